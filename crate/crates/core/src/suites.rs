//! Numbered acceptance checks, grouped into named suites.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::aubry::{check_cost_laws, decompose_aubry, WordGraph};
use crate::examples::{lc1, lc2, three_symbol_two_cycles, zero_potential};
use crate::maxplus::{abcd_from_2x2, mp_2x2_closed_form, mp_apply, mp_eigenvalue, mp_eigenvectors, MaxPlusMatrix, Weight};
use crate::oracle::{brute_force_cycle_mean, random_integer_matrix, rng, to_f64_matrix};
use crate::spectral::{perron, LocallyConstantPotential, DEFAULT_TOL};
use crate::symbolic::full_shift;
use crate::walters::{
    appendix_example, appendix_max_relative_error, appendix_numeric, classify_regime, golden_mass, golden_ratio,
    perturbation_stability_experiment, regime_representatives, walters_gamma, walters_state, PerturbationKind,
    Regime,
};
use crate::zerotemp::{default_beta_grid, estimate_gamma, estimate_subaction};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub expected: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {}  measured: {}  expected: {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.measured,
            self.expected
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForms,
    TheoremA,
    TheoremB,
    Appendix,
    MaxplusOracle,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::ClosedForms,
        Suite::TheoremA,
        Suite::TheoremB,
        Suite::Appendix,
        Suite::MaxplusOracle,
    ];

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::ClosedForms => &[1],
            Suite::TheoremA => &[2, 4, 9],
            Suite::TheoremB => &[5, 6, 7],
            Suite::Appendix => &[8],
            Suite::MaxplusOracle => &[3],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::ClosedForms => "closed-forms",
            Suite::TheoremA => "theorem-a",
            Suite::TheoremB => "theorem-b",
            Suite::Appendix => "appendix",
            Suite::MaxplusOracle => "maxplus-oracle",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

pub fn run_suite(suite: Suite) -> Vec<CriterionResult> {
    suite.criteria().iter().map(|&id| run_criterion(id)).collect()
}

/// Criteria 1 through 9; 10 concerns the command-line runner.
pub fn run_criterion(id: u8) -> CriterionResult {
    let (name, expected, outcome): (&'static str, &str, Result<(bool, String)>) = match id {
        1 => ("closed-form perron", "rel err <= 1e-12", closed_forms()),
        2 => (
            "theorem A rate",
            "|gamma_hat(256) - gamma| <= 0.05, gamma_hat non-increasing",
            theorem_a(),
        ),
        3 => ("max-plus oracle", "0 mismatches, 2x2 err <= 1e-12", maxplus_oracle()),
        4 => ("cost-matrix laws", "all laws hold exactly", cost_laws()),
        5 => ("walters gamma", "|log P / beta - gamma| <= 0.05", walters_rate()),
        6 => ("limit measures", "regime masses within 0.02", limit_measures()),
        7 => ("theorem B stability", "mu and V gaps <= 0.02", stability()),
        8 => ("appendix selection flip", "see record", appendix()),
        9 => ("calibration residual", "residual <= 0.02, spread <= 1e-9", calibration()),
        _ => ("unknown", "", Err(Error::InvalidParameter(format!("no criterion {id}")))),
    };
    let (pass, measured) = match outcome {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        pass,
        measured,
        expected: expected.to_string(),
    }
}

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

fn closed_forms() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let beta = f64::from(k);
        let p1 = perron(&lc1(), beta, DEFAULT_TOL)?.log_lambda;
        let p2 = perron(&lc2(), beta, DEFAULT_TOL)?.log_lambda;
        worst = worst.max(rel(p1, (-beta).exp().ln_1p()));
        worst = worst.max(rel(p2, (-1.5 * beta).exp().ln_1p()));
    }
    let mut zero_err: f64 = 0.0;
    for d in 1..=3usize {
        let z = perron(&zero_potential(full_shift(d, 0.5)?), 1.0, DEFAULT_TOL)?.log_lambda;
        zero_err = zero_err.max((z - ((d + 1) as f64).ln()).abs());
    }
    Ok((
        worst <= 1e-12 && zero_err <= 1e-12,
        format!("LC rel err {worst:.3e}, zero potential err {zero_err:.3e}"),
    ))
}

fn theorem_a_examples() -> [(&'static str, LocallyConstantPotential); 3] {
    [("LC1", lc1()), ("LC2", lc2()), ("3-symbol", three_symbol_two_cycles())]
}

fn theorem_a() -> Result<(bool, String)> {
    let grid = default_beta_grid();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, a) in theorem_a_examples() {
        let est = estimate_gamma(&a, &grid, DEFAULT_TOL)?;
        let last = *est.gamma_hat.last().expect("nonempty grid");
        let close = (last - est.gamma_maxplus).abs() <= 0.05;
        let mono = est.gamma_hat_non_increasing(1e-12);
        pass &= close && mono;
        parts.push(format!(
            "{name}: gamma_hat {last:.5} vs {:.5}, non-increasing {mono}",
            est.gamma_maxplus
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn check_eigen_identity<T: Weight>(m: &MaxPlusMatrix<T>, tol: f64, diff: impl Fn(T, T) -> f64) -> Result<bool> {
    let e = mp_eigenvectors(m)?;
    for v in &e.eigenvectors {
        let lhs = mp_apply(m, v)?;
        for (l, x) in lhs.iter().zip(v) {
            let ok = match (l, x) {
                (Some(l), Some(x)) => diff(*l, e.eigenvalue + *x) <= tol,
                (None, None) => true,
                _ => false,
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn maxplus_oracle() -> Result<(bool, String)> {
    let mut r = rng(20_240_501);
    let mut mismatches = 0;
    let mut identity_failures = 0;
    let mut acyclic = 0;
    for _ in 0..500 {
        let n = r.gen_range(1..=6);
        let m = random_integer_matrix(&mut r, n, -20, 20, 0.3);
        let brute = brute_force_cycle_mean(&m);
        match (mp_eigenvalue(&m), brute) {
            (Ok(x), Some(y)) if x == y => {}
            (Err(Error::NoEigenvalue), None) => {
                acyclic += 1;
                continue;
            }
            _ => {
                mismatches += 1;
                continue;
            }
        }
        if !check_eigen_identity(&m, 0.0, |x, y| if x == y { 0.0 } else { 1.0 })? {
            identity_failures += 1;
        }
        let mf = to_f64_matrix(&m);
        if !check_eigen_identity(&mf, 1e-9, |x, y| (x - y).abs())? {
            identity_failures += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let e: [f64; 4] = std::array::from_fn(|_| r.gen_range(-10.0..0.0));
        let m = [[e[0], e[1]], [e[2], e[3]]];
        let (a, b, c, d) = abcd_from_2x2(m);
        let (lambda, offset) = mp_2x2_closed_form(a, b, c, d)?;
        let general = mp_eigenvectors(&MaxPlusMatrix::from_rows(&[m[0].to_vec(), m[1].to_vec()])?)?;
        let v = &general.eigenvectors[0];
        let off = v[1].expect("finite") - v[0].expect("finite");
        worst = worst.max((lambda - general.eigenvalue).abs()).max((offset - off).abs());
    }
    Ok((
        mismatches == 0 && identity_failures == 0 && worst <= 1e-12,
        format!(
            "{mismatches} eigenvalue mismatches ({acyclic} acyclic), {identity_failures} eigen-identity failures, 2x2 max err {worst:.3e}"
        ),
    ))
}

fn cost_laws() -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, a) in theorem_a_examples() {
        let dec = decompose_aubry(&WordGraph::from_potential(&a))?;
        match check_cost_laws(&dec.cost, 0.0) {
            Ok(()) => parts.push(format!("{name}: ok")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Ok((pass, parts.join("; ")))
}

const WALTERS_BETA: f64 = 150.0;

fn walters_rate() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (_, w) in regime_representatives() {
        let s = walters_state(&w, WALTERS_BETA, 0.0, 0)?;
        worst = worst.max((s.log_p / WALTERS_BETA - walters_gamma(&w)).abs());
    }
    Ok((worst <= 0.05, format!("max err {worst:.4}")))
}

fn limit_measures() -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (regime, w) in regime_representatives() {
        for mirror in [false, true] {
            let w = if mirror { w.swapped() } else { w.clone() };
            let s = walters_state(&w, WALTERS_BETA, 0.0, 0)?;
            let pred = classify_regime(&w).limit_mass_0;
            let ok = match (regime, mirror) {
                (Regime::ZeroDominant, false) => s.mu0 >= 0.98,
                (Regime::ZeroDominant, true) => s.mu0 <= 0.02,
                _ => (s.mu0 - pred).abs() <= 0.02,
            };
            pass &= ok;
            let tag = if mirror { " mirrored" } else { "" };
            parts.push(format!("{regime}{tag}: mu0 {:.5}", s.mu0));
            if regime == Regime::BoundaryGolden && !mirror {
                let l = (s.log_p - WALTERS_BETA * walters_gamma(&w)).exp();
                pass &= (l - golden_ratio()).abs() <= 0.02;
                pass &= (s.mu0 - golden_mass()).abs() <= 0.02;
                parts.push(format!("l(beta) {l:.5}"));
            }
        }
    }
    Ok((pass, parts.join(", ")))
}

fn stability() -> Result<(bool, String)> {
    let mut mu_gap: f64 = 0.0;
    let mut v_gap: f64 = 0.0;
    let kinds = [
        PerturbationKind::FirstCoord,
        PerturbationKind::CylinderIndicator { symbol: 1 },
    ];
    for (_, w) in regime_representatives() {
        let delta = walters_gamma(&w) - 0.5;
        for sign in [1.0, -1.0] {
            for kind in kinds {
                let rep = perturbation_stability_experiment(&w, delta, sign, kind, &[WALTERS_BETA])?;
                mu_gap = mu_gap.max(rep.rows[0].mu_gap);
                v_gap = v_gap.max(rep.rows[0].v_gap);
            }
        }
    }
    Ok((
        mu_gap <= 0.02 && v_gap <= 0.02,
        format!("max mu gap {mu_gap:.3e}, max V gap {v_gap:.3e}"),
    ))
}

fn appendix() -> Result<(bool, String)> {
    let (g, eta) = (-2.0, -1.0);
    let mut worst: f64 = 0.0;
    let mut mu_err: f64 = 0.0;
    for beta in [5.0, 10.0, 20.0] {
        let c = appendix_example(g, eta, beta)?;
        let n = appendix_numeric(g, eta, beta)?;
        worst = worst.max(appendix_max_relative_error(&c, &n));
        mu_err = mu_err.max((n.mu0_unpert - 0.5).abs()).max((c.mu0_unpert - 0.5).abs());
    }
    let p0 = appendix_example(g, eta, 20.0)?.p0;
    let at50 = appendix_example(g, eta, 50.0)?;
    let slope = at50.log_h1_pert / 50.0;
    let n50 = appendix_numeric(g, eta, 50.0)?;
    mu_err = mu_err.max((n50.mu0_unpert - 0.5).abs());
    let pass = worst <= 1e-10 && p0 <= 1e-8 && (slope - (eta - g)).abs() <= 0.02 && mu_err <= 1e-10;
    Ok((
        pass,
        format!(
            "closed vs perron rel err {worst:.3e}, p0(20) {p0:.3e}, (1/50) log H1 {slope:.5}, unperturbed mu0 err {mu_err:.3e}"
        ),
    ))
}

fn calibration() -> Result<(bool, String)> {
    let mut residual: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for a in [lc1(), lc2()] {
        let s = estimate_subaction(&a, 256.0, DEFAULT_TOL)?;
        residual = residual.max(s.calibration_residual);
        spread = spread.max(s.component_spread());
    }
    Ok((
        residual <= 0.02 && spread <= 1e-9,
        format!("residual {residual:.3e}, component spread {spread:.3e}"),
    ))
}
