//! Experiment configuration (JSON).

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use zerotemp::examples;
use zerotemp::spectral::LocallyConstantPotential;
use zerotemp::symbolic::{full_shift, Sft, Word};
use zerotemp::walters::{PerturbationKind, TailSequence, WaltersPotential};

/// A real number given either as a JSON number or as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Num)
                    .ok_or_else(|| E::custom(format!("'{v}' is not a finite decimal number")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Report {
    Gamma,
    Subaction,
    Measure,
    Pressure,
    Regime,
    Stability,
    Appendix,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Report::Gamma => "gamma",
            Report::Subaction => "subaction",
            Report::Measure => "measure",
            Report::Pressure => "pressure",
            Report::Regime => "regime",
            Report::Stability => "stability",
            Report::Appendix => "appendix",
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    #[serde(default)]
    pub head: Vec<Num>,
    pub alpha: Option<Num>,
    /// Shorthand for a pure geometric tail with this total.
    pub sum: Option<Num>,
    pub rho: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    LocallyConstant {
        /// `lc1`, `lc2` or `three-symbol`; replaces the explicit fields.
        example: Option<String>,
        alphabet: Option<usize>,
        depth: Option<usize>,
        theta: Option<Num>,
        transitions: Option<Vec<Vec<u8>>>,
        table: Option<BTreeMap<String, Num>>,
    },
    Walters {
        b: Num,
        d: Num,
        a: TailConfig,
        c: TailConfig,
        theta: Option<Num>,
        #[serde(default)]
        relaxed: bool,
    },
    Appendix {
        gamma: Num,
        eta: Num,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindConfig {
    FirstCoord,
    CylinderIndicator,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub delta: Num,
    pub kind: KindConfig,
    /// Cylinder symbol for `cylinder-indicator`.
    pub symbol: Option<u8>,
    /// `+1` or `-1`.
    pub sign: Option<Num>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    pub beta_grid: Vec<Num>,
    pub perturbation: Option<PerturbationConfig>,
    pub reports: Vec<Report>,
}

/// A validated potential.
#[derive(Debug, Clone)]
pub enum Potential {
    LocallyConstant(LocallyConstantPotential),
    Walters(WaltersPotential),
    Appendix { gamma: f64, eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub delta: f64,
    pub sign: f64,
    pub kind: PerturbationKind,
}

/// A configuration that passed every check.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub potential: Potential,
    pub beta_grid: Vec<f64>,
    pub perturbation: Option<Perturbation>,
    pub reports: Vec<Report>,
    /// SHA-256 of the configuration bytes, hex encoded.
    pub digest: String,
}

fn tail(t: &TailConfig, name: &str) -> Result<TailSequence, String> {
    match (t.sum, t.alpha) {
        (Some(_), Some(_)) => Err(format!("{name}: give either 'sum' or 'alpha', not both")),
        (Some(s), None) if !t.head.is_empty() => Err(format!("{name}: 'sum' cannot be combined with 'head' ({})", s.0)),
        (Some(s), None) => Ok(TailSequence::with_sum(s.0, t.rho.0)),
        (None, alpha) => Ok(TailSequence {
            head: t.head.iter().map(|x| x.0).collect(),
            alpha: alpha.map_or(0.0, |a| a.0),
            rho: t.rho.0,
        }),
    }
}

fn locally_constant(
    example: &Option<String>,
    alphabet: Option<usize>,
    depth: Option<usize>,
    theta: Option<Num>,
    transitions: &Option<Vec<Vec<u8>>>,
    table: &Option<BTreeMap<String, Num>>,
) -> Result<LocallyConstantPotential, String> {
    if let Some(name) = example {
        if alphabet.is_some() || depth.is_some() || transitions.is_some() || table.is_some() {
            return Err("'example' cannot be combined with an explicit table".into());
        }
        return match name.as_str() {
            "lc1" => Ok(examples::lc1()),
            "lc2" => Ok(examples::lc2()),
            "three-symbol" => Ok(examples::three_symbol_two_cycles()),
            other => Err(format!("unknown example '{other}' (expected lc1, lc2, three-symbol)")),
        };
    }
    let theta = theta.map_or(0.5, |t| t.0);
    let depth = depth.ok_or("locally-constant potential needs 'depth'")?;
    let table = table.as_ref().ok_or("locally-constant potential needs 'table'")?;
    let sft: Sft = match (transitions, alphabet) {
        (Some(t), _) => {
            let rows = t
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| match x {
                            0 => Ok(false),
                            1 => Ok(true),
                            _ => Err(format!("transition entries must be 0 or 1, got {x}")),
                        })
                        .collect::<Result<Vec<bool>, String>>()
                })
                .collect::<Result<Vec<_>, String>>()?;
            if alphabet.is_some_and(|a| a != rows.len()) {
                return Err("'alphabet' disagrees with the size of 'transitions'".into());
            }
            Sft::new(rows, theta).map_err(|e| e.to_string())?
        }
        (None, Some(a)) if a >= 1 => full_shift(a - 1, theta).map_err(|e| e.to_string())?,
        _ => return Err("locally-constant potential needs 'alphabet' or 'transitions'".into()),
    };
    let values = table
        .iter()
        .map(|(k, v)| Word::parse(k).map(|w| (w.0, v.0)).map_err(|e| e.to_string()))
        .collect::<Result<BTreeMap<_, _>, String>>()?;
    LocallyConstantPotential::new(sft, depth, values).map_err(|e| e.to_string())
}

fn allowed(potential: &Potential, r: Report) -> bool {
    use Report::*;
    match potential {
        Potential::LocallyConstant(_) => matches!(r, Gamma | Subaction | Measure | Pressure),
        Potential::Walters(_) => matches!(r, Gamma | Subaction | Measure | Pressure | Regime | Stability),
        Potential::Appendix { .. } => matches!(r, Appendix | Pressure | Measure),
    }
}

/// Parses and validates; every failure here is a schema violation.
pub fn load(bytes: &[u8]) -> Result<Experiment, String> {
    use sha2::{Digest, Sha256};
    let cfg: ExperimentConfig = serde_json::from_slice(bytes).map_err(|e| format!("config: {e}"))?;
    let potential = match &cfg.potential {
        PotentialConfig::LocallyConstant {
            example,
            alphabet,
            depth,
            theta,
            transitions,
            table,
        } => Potential::LocallyConstant(locally_constant(example, *alphabet, *depth, *theta, transitions, table)?),
        PotentialConfig::Walters {
            b,
            d,
            a,
            c,
            theta,
            relaxed,
        } => {
            let (a, c) = (tail(a, "a")?, tail(c, "c")?);
            let theta = theta.map_or(0.5, |t| t.0);
            let w = if *relaxed {
                WaltersPotential::relaxed(b.0, d.0, a, c, theta)
            } else {
                WaltersPotential::new(b.0, d.0, a, c, theta)
            };
            Potential::Walters(w.map_err(|e| e.to_string())?)
        }
        PotentialConfig::Appendix { gamma, eta } => {
            if !(gamma.0 < eta.0 && eta.0 < 0.0) {
                return Err(format!("appendix potential needs gamma < eta < 0, got {} and {}", gamma.0, eta.0));
            }
            Potential::Appendix {
                gamma: gamma.0,
                eta: eta.0,
            }
        }
    };

    let beta_grid: Vec<f64> = cfg.beta_grid.iter().map(|x| x.0).collect();
    zerotemp::zerotemp::validate_grid(&beta_grid).map_err(|e| e.to_string())?;

    if cfg.reports.is_empty() {
        return Err("'reports' is empty".into());
    }
    let mut reports = cfg.reports.clone();
    reports.sort();
    reports.dedup();
    for &r in &reports {
        if !allowed(&potential, r) {
            return Err(format!("report '{r}' is not available for this potential"));
        }
    }
    if let Potential::LocallyConstant(a) = &potential {
        if reports.iter().any(|r| matches!(r, Report::Gamma | Report::Subaction)) && !a.is_normalized() {
            a.clone().require_normalized().map_err(|e| e.to_string())?;
        }
    }

    let perturbation = cfg
        .perturbation
        .as_ref()
        .map(|p| {
            let sign = p.sign.map_or(1.0, |s| s.0);
            if sign != 1.0 && sign != -1.0 {
                return Err(format!("perturbation sign must be 1 or -1, got {sign}"));
            }
            let kind = match (p.kind, p.symbol) {
                (KindConfig::FirstCoord, None | Some(0)) => PerturbationKind::FirstCoord,
                (KindConfig::FirstCoord, Some(s)) => {
                    return Err(format!("first-coord perturbation lives on symbol 0, got {s}"))
                }
                (KindConfig::CylinderIndicator, Some(s)) if s <= 1 => PerturbationKind::CylinderIndicator { symbol: s },
                (KindConfig::CylinderIndicator, s) => {
                    return Err(format!("cylinder-indicator needs 'symbol' 0 or 1, got {s:?}"))
                }
            };
            Ok(Perturbation {
                delta: p.delta.0,
                sign,
                kind,
            })
        })
        .transpose()?;
    if reports.contains(&Report::Stability) && perturbation.is_none() {
        return Err("report 'stability' needs a 'perturbation'".into());
    }

    Ok(Experiment {
        potential,
        beta_grid,
        perturbation,
        reports,
        digest: hex::encode(Sha256::digest(bytes)),
    })
}
