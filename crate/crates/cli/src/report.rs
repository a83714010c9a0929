//! Computes the requested reports as CSV text.

use std::fmt::Write as _;

use zerotemp::spectral::{perron, PerronData, DEFAULT_TOL};
use zerotemp::walters::{
    appendix_example, appendix_max_relative_error, appendix_numeric, classify_regime, perturbation_stability_experiment,
    walters_asymptotic_ratio, walters_gamma, walters_state, WaltersPotential, WaltersState,
};
use zerotemp::zerotemp::{estimate_gamma_threaded, par_map, subaction_from_perron};

use crate::config::{Experiment, Potential, Report};

/// A numerical failure, tagged with the operation that raised it.
#[derive(Debug)]
pub struct NumericalError {
    pub op: &'static str,
    pub source: zerotemp::Error,
}

impl std::fmt::Display for NumericalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numerical failure in {}: {}", self.op, self.source)
    }
}

impl std::error::Error for NumericalError {}

trait Tag<T> {
    fn op(self, op: &'static str) -> Result<T, NumericalError>;
}

impl<T> Tag<T> for zerotemp::Result<T> {
    fn op(self, op: &'static str) -> Result<T, NumericalError> {
        self.map_err(|source| NumericalError { op, source })
    }
}

/// Files to write (name, contents) and the summary block.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

/// 17 significant digits; infinities spelled out.
pub fn num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv(digest: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("# config-sha256: {digest}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

struct Builder<'a> {
    exp: &'a Experiment,
    files: Vec<(String, String)>,
    summary: String,
}

impl Builder<'_> {
    fn file(&mut self, report: Report, header: &[&str], rows: Vec<Vec<String>>) {
        self.files
            .push((format!("{report}.csv"), csv(&self.exp.digest, header, &rows)));
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }
}

pub fn compute(exp: &Experiment, threads: usize) -> Result<Output, NumericalError> {
    let mut b = Builder {
        exp,
        files: Vec::new(),
        summary: String::new(),
    };
    b.line(format!("config-sha256: {}", exp.digest));
    match &exp.potential {
        Potential::LocallyConstant(a) => locally_constant(&mut b, a, threads)?,
        Potential::Walters(w) => walters(&mut b, w, threads)?,
        Potential::Appendix { gamma, eta } => appendix(&mut b, *gamma, *eta)?,
    }
    Ok(Output {
        files: b.files,
        summary: b.summary,
    })
}

fn locally_constant(
    b: &mut Builder<'_>,
    a: &zerotemp::spectral::LocallyConstantPotential,
    threads: usize,
) -> Result<(), NumericalError> {
    let grid = &b.exp.beta_grid;
    b.line("potential: locally-constant");
    let data: Vec<PerronData> = par_map(grid, threads, |&beta| perron(a, beta, DEFAULT_TOL))
        .into_iter()
        .collect::<zerotemp::Result<_>>()
        .op("perron")?;
    for &r in &b.exp.reports.clone() {
        match r {
            Report::Pressure => {
                let rows = data
                    .iter()
                    .map(|p| {
                        vec![
                            num(p.beta),
                            num(p.log_lambda),
                            num(p.log_excess.unwrap_or(f64::NEG_INFINITY)),
                        ]
                    })
                    .collect();
                b.file(r, &["beta", "pressure", "log_excess"], rows);
            }
            Report::Gamma => {
                let est = estimate_gamma_threaded(a, grid, DEFAULT_TOL, threads).op("estimate_gamma")?;
                let rows = (0..grid.len())
                    .map(|i| {
                        vec![
                            num(grid[i]),
                            num(est.pressure[i]),
                            num(est.log_excess[i]),
                            num(est.gamma_hat[i]),
                            num(est.gamma_maxplus),
                        ]
                    })
                    .collect();
                b.file(r, &["beta", "pressure", "log_excess", "gamma_hat", "gamma_maxplus"], rows);
                let last = *est.gamma_hat.last().expect("grid is nonempty");
                b.line(format!(
                    "gamma: gamma_hat {} at beta {}, max-plus eigenvalue {}, entropy {}",
                    num(last),
                    num(*grid.last().expect("grid is nonempty")),
                    num(est.gamma_maxplus),
                    num(est.h)
                ));
                b.line(format!(
                    "gamma_hat non-increasing: {}, excess non-increasing: {}",
                    est.gamma_hat_non_increasing(1e-12),
                    est.excess_non_increasing(1e-12)
                ));
            }
            Report::Subaction => {
                let subs = data
                    .iter()
                    .map(|p| subaction_from_perron(a, p))
                    .collect::<zerotemp::Result<Vec<_>>>()
                    .op("estimate_subaction")?;
                let with_rec = subs.iter().all(|s| s.v_rec.is_some());
                let mut header = vec!["beta", "state", "v_hat"];
                if with_rec {
                    header.push("v_rec");
                }
                header.push("calibration_residual");
                let mut rows = Vec::new();
                for s in &subs {
                    for (i, w) in s.states.iter().enumerate() {
                        let mut row = vec![num(s.beta), w.to_string(), num(s.v_hat[i])];
                        if let Some(rec) = s.v_rec.as_ref().filter(|_| with_rec) {
                            row.push(num(rec[i]));
                        }
                        row.push(num(s.calibration_residual));
                        rows.push(row);
                    }
                }
                b.file(r, &header, rows);
                let s = subs.last().expect("grid is nonempty");
                let mut line = format!(
                    "subaction: residual {}, component spread {}",
                    num(s.calibration_residual),
                    num(s.component_spread())
                );
                if let Some(g) = s.reconstruction_gap() {
                    let _ = write!(line, ", reconstruction gap {}", num(g));
                }
                b.line(line);
            }
            Report::Measure => {
                let n = a.sft().alphabet_size();
                let mut header = vec!["beta".to_string()];
                header.extend((0..n).map(|s| format!("mu_{s}")));
                let rows = data
                    .iter()
                    .map(|p| {
                        let mut row = vec![num(p.beta)];
                        row.extend((0..n).map(|s| num(p.cylinder_mass(&[s as u8]))));
                        row
                    })
                    .collect();
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                b.file(r, &header, rows);
            }
            _ => unreachable!("rejected by the schema"),
        }
    }
    Ok(())
}

fn walters(b: &mut Builder<'_>, w: &WaltersPotential, threads: usize) -> Result<(), NumericalError> {
    let grid = b.exp.beta_grid.clone();
    let gamma = walters_gamma(w);
    b.line("potential: walters");
    let states: Vec<WaltersState> = par_map(&grid, threads, |&beta| walters_state(w, beta, 0.0, 0))
        .into_iter()
        .collect::<zerotemp::Result<_>>()
        .op("walters_pressure")?;
    for &r in &b.exp.reports.clone() {
        match r {
            Report::Pressure => {
                let rows = grid
                    .iter()
                    .zip(&states)
                    .map(|(&beta, s)| vec![num(beta), num(s.log_p.exp()), num(s.log_p)])
                    .collect();
                b.file(r, &["beta", "pressure", "log_pressure"], rows);
            }
            Report::Gamma => {
                let rows = grid
                    .iter()
                    .zip(&states)
                    .map(|(&beta, s)| {
                        vec![
                            num(beta),
                            num(s.log_p / beta),
                            num(gamma),
                            num((s.log_p - beta * gamma).exp()),
                        ]
                    })
                    .collect();
                b.file(r, &["beta", "gamma_hat", "gamma", "l_beta"], rows);
                let (beta, s) = (grid[grid.len() - 1], states[states.len() - 1]);
                b.line(format!("gamma: gamma_hat {} at beta {}, gamma {}", num(s.log_p / beta), num(beta), num(gamma)));
            }
            Report::Measure => {
                let rows = grid
                    .iter()
                    .zip(&states)
                    .map(|(&beta, s)| {
                        vec![
                            num(beta),
                            num(s.mu0),
                            num(s.ratio),
                            num(walters_asymptotic_ratio(w, s.log_p, beta)),
                        ]
                    })
                    .collect();
                b.file(r, &["beta", "mu_0", "ratio", "asymptotic_ratio"], rows);
            }
            Report::Subaction => {
                let rows = grid
                    .iter()
                    .zip(&states)
                    .map(|(&beta, s)| vec![num(beta), num(0.0), num(s.v1)])
                    .collect();
                b.file(r, &["beta", "v_hat_0", "v_hat_1"], rows);
            }
            Report::Regime => {
                let rep = classify_regime(w);
                let l = rep.l_limit.map_or_else(|| "none".to_string(), num);
                b.file(
                    r,
                    &["regime", "mirrored", "gamma", "limit_mass_0", "l_limit"],
                    vec![vec![
                        rep.regime.to_string(),
                        rep.mirrored.to_string(),
                        num(rep.gamma),
                        num(rep.limit_mass_0),
                        l,
                    ]],
                );
                let mirrored = if rep.mirrored { " (mirrored)" } else { "" };
                b.line(format!("{}, mass {:.7}{mirrored}", rep.regime, rep.limit_mass_0));
            }
            Report::Stability => {
                let p = b.exp.perturbation.expect("checked by the schema");
                let rep = perturbation_stability_experiment(w, p.delta, p.sign, p.kind, &grid)
                    .op("perturbation_stability_experiment")?;
                let rows = rep
                    .rows
                    .iter()
                    .map(|x| {
                        vec![
                            num(x.beta),
                            num(x.a_beta),
                            num(x.unperturbed.mu0),
                            num(x.perturbed.mu0),
                            num(x.mu_gap),
                            num(x.unperturbed.v1),
                            num(x.perturbed.v1),
                            num(x.v_gap),
                        ]
                    })
                    .collect();
                b.file(
                    r,
                    &["beta", "a_beta", "mu_0_unperturbed", "mu_0_perturbed", "mu_gap", "v_hat_1_unperturbed", "v_hat_1_perturbed", "v_gap"],
                    rows,
                );
                b.line(format!(
                    "stability: delta {} (gamma {}), tail mu gap {}, tail V gap {}, shrinking {}",
                    num(rep.delta),
                    num(rep.gamma),
                    num(rep.tail_mu_gap),
                    num(rep.tail_v_gap),
                    rep.shrinking
                ));
            }
            _ => unreachable!("rejected by the schema"),
        }
    }
    Ok(())
}

fn appendix(b: &mut Builder<'_>, gamma: f64, eta: f64) -> Result<(), NumericalError> {
    let grid = b.exp.beta_grid.clone();
    b.line("potential: appendix");
    let mut recs = Vec::new();
    for &beta in &grid {
        let c = appendix_example(gamma, eta, beta).op("appendix_example")?;
        let n = appendix_numeric(gamma, eta, beta).op("perron")?;
        recs.push((c, appendix_max_relative_error(&c, &n)));
    }
    for &r in &b.exp.reports.clone() {
        match r {
            Report::Appendix => {
                let rows = recs
                    .iter()
                    .map(|(c, e)| {
                        vec![
                            num(c.beta),
                            num(c.log_lambda_tilde),
                            num(c.log_h1_pert),
                            num(c.p0),
                            num(c.log_h1_unpert),
                            num(c.p_unpert),
                            num(c.mu0_unpert),
                            num(*e),
                        ]
                    })
                    .collect();
                b.file(
                    r,
                    &["beta", "log_lambda_tilde", "log_h1_perturbed", "p0", "log_h1_unperturbed", "pressure_unperturbed", "mu_0_unperturbed", "perron_rel_err"],
                    rows,
                );
                let worst = recs.iter().map(|x| x.1).fold(0.0, f64::max);
                let (c, _) = recs.last().expect("grid is nonempty");
                b.line(format!(
                    "appendix: p0 {} at beta {}, (1/beta) log H1 {} (limit {}), max perron rel err {}",
                    num(c.p0),
                    num(c.beta),
                    num(c.log_h1_pert / c.beta),
                    num(eta - gamma),
                    num(worst)
                ));
            }
            Report::Pressure => {
                let rows = recs
                    .iter()
                    .map(|(c, _)| vec![num(c.beta), num(c.p_unpert), num(c.log_lambda_tilde)])
                    .collect();
                b.file(r, &["beta", "pressure_unperturbed", "pressure_perturbed"], rows);
            }
            Report::Measure => {
                let rows = recs
                    .iter()
                    .map(|(c, _)| vec![num(c.beta), num(c.mu0_unpert), num(c.p0)])
                    .collect();
                b.file(r, &["beta", "mu_0_unperturbed", "mu_0_perturbed"], rows);
            }
            _ => unreachable!("rejected by the schema"),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
        assert_eq!(num(-1.0), "-1.0000000000000000e0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_layout() {
        let s = csv("ab", &["x", "y"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(s, "# config-sha256: ab\nx,y\n1,2\n");
    }
}
