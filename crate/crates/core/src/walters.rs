//! Walters-type potentials on the full 2-shift.
//!
//! `A(0^∞) = A(1^∞) = 0`, `A = b` on `[01]`, `A = d` on `[10]`, `A = a_n` on
//! `[0^n 1]` and `A = c_n` on `[1^n 0]` for `n ≥ 2`. A point is a sequence of
//! runs; a complete run `0^m` (followed by 1) contributes
//! `βb + β(a_2 + … + a_m)` to the Birkhoff sum, so pressure, cylinder
//! masses and eigenfunction ratios all reduce to one-dimensional series in
//! the partial sums `s_j = a_2 + … + a_{1+j}`.
//!
//! Pressures at large `β` are far below the smallest positive `f64`, so
//! they are carried as `log P`.

use std::fmt;

use crate::logsum::{log_add_exp, log_one_minus_exp_neg, LogAccumulator};
use crate::spectral::{perron, LocallyConstantPotential, DEFAULT_TOL};
use crate::symbolic::full_shift;
use crate::{Error, Result};

const MAX_TRUNC: usize = 100_000;
const TIE_TOL: f64 = 1e-12;

/// `a_n` for `n ≥ 2`: explicit values `head = [a_2, …, a_{m+1}]`, then
/// `a_n = α ρ^{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSequence {
    pub head: Vec<f64>,
    pub alpha: f64,
    pub rho: f64,
}

impl TailSequence {
    pub fn geometric(alpha: f64, rho: f64) -> Self {
        Self {
            head: Vec::new(),
            alpha,
            rho,
        }
    }

    /// `a_n = α ρ^{n−1}` summing to `total`.
    pub fn with_sum(total: f64, rho: f64) -> Self {
        Self::geometric(total * (1.0 - rho) / rho, rho)
    }

    /// Finitely many nonzero terms.
    pub fn finite(head: Vec<f64>) -> Self {
        Self {
            head,
            alpha: 0.0,
            rho: 0.5,
        }
    }

    /// `a_n`, `n ≥ 2`.
    pub fn term(&self, n: usize) -> f64 {
        assert!(n >= 2, "terms start at n = 2");
        self.head
            .get(n - 2)
            .copied()
            .unwrap_or_else(|| self.alpha * self.rho.powi(n as i32 - 1))
    }

    /// `Σ_{n≥2} a_n`.
    pub fn total(&self) -> f64 {
        let m = self.head.len() as i32;
        self.head.iter().sum::<f64>() + self.alpha * self.rho.powi(m + 1) / (1.0 - self.rho)
    }

    /// `s_j = a_2 + … + a_{1+j}` for `j = 0..=n` (`s_0 = 0`).
    pub fn partial_sums(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = crate::logsum::Neumaier::default();
        out.push(0.0);
        for j in 1..=n {
            acc.add(self.term(j + 1));
            out.push(acc.value());
        }
        out
    }

    /// Smallest `C` with `s_j ≤ a + C θ^j` for all `j ≥ 1`.
    pub fn tail_constant(&self, theta: f64) -> f64 {
        let total = self.total();
        let m = self.head.len() + 1;
        let sums = self.partial_sums(m);
        (1..=m)
            .map(|j| (sums[j] - total) / theta.powi(j as i32))
            .fold(0.0, f64::max)
    }

    fn validate(&self, strict: bool, name: &str) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!("{name}: rho = {} not in (0,1)", self.rho)));
        }
        let bad_head = self.head.iter().any(|&x| !(x.is_finite() && if strict { x < 0.0 } else { x <= 0.0 }));
        let bad_alpha = !(self.alpha.is_finite() && if strict { self.alpha < 0.0 } else { self.alpha <= 0.0 });
        if bad_head || bad_alpha {
            let rule = if strict { "< 0" } else { "<= 0" };
            return Err(Error::InvalidParameter(format!("{name}: terms must be {rule}")));
        }
        if !(self.term(2) < 0.0) {
            return Err(Error::InvalidParameter(format!("{name}: second term must be < 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaltersPotential {
    pub b: f64,
    pub d: f64,
    pub a_seq: TailSequence,
    pub c_seq: TailSequence,
    pub theta: f64,
}

impl WaltersPotential {
    /// All of `b`, `d`, `a_n`, `c_n` strictly negative, tails decaying no
    /// slower than `θ^n`.
    pub fn new(b: f64, d: f64, a_seq: TailSequence, c_seq: TailSequence, theta: f64) -> Result<Self> {
        Self::build(b, d, a_seq, c_seq, theta, true)
    }

    /// Weaker hypotheses: `A ≤ 0`, `b + d < 0`, `a_2 < 0`, `c_2 < 0`.
    pub fn relaxed(b: f64, d: f64, a_seq: TailSequence, c_seq: TailSequence, theta: f64) -> Result<Self> {
        Self::build(b, d, a_seq, c_seq, theta, false)
    }

    fn build(b: f64, d: f64, a_seq: TailSequence, c_seq: TailSequence, theta: f64, strict: bool) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta = {theta} not in (0,1)")));
        }
        let ok_bd = if strict {
            b < 0.0 && d < 0.0
        } else {
            b <= 0.0 && d <= 0.0 && b + d < 0.0
        };
        if !ok_bd {
            return Err(Error::InvalidParameter(format!("b = {b}, d = {d} violate the sign conditions")));
        }
        a_seq.validate(strict, "a")?;
        c_seq.validate(strict, "c")?;
        for (name, s) in [("a", &a_seq), ("c", &c_seq)] {
            if s.alpha != 0.0 && s.rho > theta {
                return Err(Error::InvalidParameter(format!(
                    "{name}: tail ratio {} decays slower than theta = {theta}",
                    s.rho
                )));
            }
        }
        Ok(Self {
            b,
            d,
            a_seq,
            c_seq,
            theta,
        })
    }

    /// `a = Σ a_n`.
    pub fn a(&self) -> f64 {
        self.a_seq.total()
    }

    /// `c = Σ c_n`.
    pub fn c(&self) -> f64 {
        self.c_seq.total()
    }

    /// Relabels `0 ↔ 1`.
    pub fn swapped(&self) -> Self {
        Self {
            b: self.d,
            d: self.b,
            a_seq: self.c_seq.clone(),
            c_seq: self.a_seq.clone(),
            theta: self.theta,
        }
    }

    /// Max-plus matrix `[[a+b+d, c+d], [a+b, b+c+d]]` of the two fixed points.
    pub fn cost_matrix(&self) -> [[f64; 2]; 2] {
        let (a, b, c, d) = (self.a(), self.b, self.c(), self.d);
        [[a + b + d, c + d], [a + b, b + c + d]]
    }

    /// Locally constant potential of depth `depth` agreeing with `A` when
    /// `a_n = c_n = 0` for `n > depth`.
    pub fn truncated_table(&self, depth: usize) -> Result<LocallyConstantPotential> {
        if depth < 1 {
            return Err(Error::InvalidParameter("truncation depth must be >= 1".into()));
        }
        let sft = full_shift(1, self.theta)?;
        LocallyConstantPotential::from_fn(sft, depth, |w| {
            let first = w[0];
            let run = w.iter().take_while(|&&s| s == first).count();
            match (first, run) {
                (_, r) if r == w.len() => 0.0,
                (0, 1) => self.b,
                (1, 1) => self.d,
                (0, r) => self.a_seq.term(r),
                (_, r) => self.c_seq.term(r),
            }
        })
    }

    /// The same potential with `a_n = c_n = 0` beyond `depth`.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        let cut = |s: &TailSequence| TailSequence::finite((2..=depth).map(|n| s.term(n)).collect());
        Self::relaxed(self.b, self.d, cut(&self.a_seq), cut(&self.c_seq), self.theta)
    }
}

/// The four regime representatives used throughout the tests.
pub fn regime_representatives() -> [(Regime, WaltersPotential); 4] {
    let w = |a: f64, c: f64, bd: f64| {
        WaltersPotential::new(
            bd,
            bd,
            TailSequence::with_sum(a, 0.5),
            TailSequence::with_sum(c, 0.5),
            0.5,
        )
        .expect("valid representative")
    };
    [
        (Regime::Symmetric, w(-1.0, -1.0, -1.0)),
        (Regime::TwoCycleDominant, w(-1.0, -2.0, -1.0)),
        (Regime::ZeroDominant, w(-1.0, -3.0, -0.5)),
        (Regime::BoundaryGolden, w(-1.0, -3.0, -1.0)),
    ]
}

/// `γ = max{a+b+d, c+b+d, (a+c+b+d)/2}`.
pub fn walters_gamma(w: &WaltersPotential) -> f64 {
    let (a, c, bd) = (w.a(), w.c(), w.b + w.d);
    (a + bd).max(c + bd).max((a + c + bd) / 2.0)
}

/// Perturbation `B_β = a_β 1_{[0]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstCoordPerturbation {
    pub a_beta: f64,
}

impl FirstCoordPerturbation {
    pub fn none() -> Self {
        Self { a_beta: 0.0 }
    }

    /// `a_β = sign · e^{βδ}`.
    pub fn exponential(sign: f64, delta: f64, beta: f64) -> Self {
        Self {
            a_beta: sign.signum() * (beta * delta).exp(),
        }
    }
}

/// Number of explicit series terms: beyond it `β s_j = β a` to double
/// precision.
pub fn truncation(seq: &TailSequence, beta: f64) -> usize {
    let m = seq.head.len();
    if seq.alpha == 0.0 {
        return m.max(1);
    }
    let scale = beta * seq.alpha.abs() / (1.0 - seq.rho);
    let mut j = m.max(1);
    while j < MAX_TRUNC && scale * seq.rho.powi(j as i32 + 1) >= 1e-16 {
        j += 1;
    }
    j
}

/// `log(1 − e^{−z})` from `log z`.
fn log1mexp_from_log(log_z: f64) -> f64 {
    if log_z < -30.0 {
        log_z - 0.5 * log_z.exp()
    } else {
        log_one_minus_exp_neg(log_z.exp())
    }
}

/// `(log D, log N)` with `D = 1 + Σ_{j≥1} e^{β s_j − jz}` and
/// `N = 1 + Σ_{j≥1} (j+1) e^{β s_j − jz}`, for `z = e^{log_z} > 0`.
pub fn run_series(seq: &TailSequence, beta: f64, log_z: f64) -> (f64, f64) {
    let trunc = truncation(seq, beta);
    let sums = seq.partial_sums(trunc);
    let z = log_z.exp();
    let mut d = LogAccumulator::new();
    let mut n = LogAccumulator::new();
    d.push(0.0);
    n.push(0.0);
    for (j, s) in sums.iter().enumerate().take(trunc).skip(1) {
        let e = beta * s - j as f64 * z;
        d.push(e);
        n.push(e + ((j + 1) as f64).ln());
    }
    let l = log1mexp_from_log(log_z);
    let tail_d = beta * seq.total() - trunc as f64 * z - l;
    let tail_n = tail_d + log_add_exp((trunc as f64).ln(), -l);
    d.push(tail_d);
    n.push(tail_n);
    (d.log_value(), n.log_value())
}

/// `log(e^u − a)` for `e^u > a`.
fn log_z(log_p: f64, a_beta: f64) -> Option<f64> {
    if a_beta == 0.0 {
        Some(log_p)
    } else if a_beta < 0.0 {
        Some(log_add_exp(log_p, (-a_beta).ln()))
    } else {
        let r = a_beta.ln() - log_p;
        (r < 0.0).then(|| log_p + (-r.exp()).ln_1p())
    }
}

/// `log P(βA + B_β)`: the root of
/// `e^{2P} = e^{β(b+d)+a_β} (1 + Σ e^{βs^a_j + j a_β − jP}) (1 + Σ e^{βs^c_j − jP})`.
///
/// Bisection runs on `t = log P`, or on `t = log(P − a_β)` when `a_β > 0`
/// since then `P` may sit within rounding of `a_β`.
pub fn walters_pressure(w: &WaltersPotential, beta: f64, pert: FirstCoordPerturbation) -> Result<f64> {
    solve_pressure(w, beta, pert).map(|(u, _)| u)
}

/// `(log P, log(P − a_β))`.
fn solve_pressure(w: &WaltersPotential, beta: f64, pert: FirstCoordPerturbation) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let a_beta = pert.a_beta;
    let shifted = a_beta > 0.0;
    // (log P, log(P − a_β))
    let coords = |t: f64| -> Option<(f64, f64)> {
        if shifted {
            Some((log_add_exp(a_beta.ln(), t), t))
        } else {
            log_z(t, a_beta).map(|lz| (t, lz))
        }
    };
    // positive when t is above the root
    let f = |t: f64| -> Option<f64> {
        let (u, lz) = coords(t)?;
        let (log_da, _) = run_series(&w.a_seq, beta, lz);
        let (log_dc, _) = run_series(&w.c_seq, beta, u);
        Some(2.0 * u.exp() - beta * (w.b + w.d) - a_beta - log_da - log_dc)
    };
    let hi = (2f64.ln() + a_beta.abs()).ln() + 1.0;
    let mut lo = beta * walters_gamma(w) - 10.0;
    let mut step = 10.0f64;
    while f(lo).is_some_and(|v| v >= 0.0) && lo > -1e7 {
        lo -= step;
        step *= 2.0;
    }
    let below = f(lo).map(|v| v < 0.0);
    let above = f(hi).map(|v| v > 0.0);
    if below != Some(true) || above != Some(true) {
        return Err(Error::BracketFailure { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match f(mid) {
            Some(v) if v > 0.0 => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(coords(0.5 * (lo + hi)).expect("inside the bracket"))
}

/// Cylinder masses from the run-length series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderRatio {
    pub log_s0: f64,
    pub log_s1: f64,
    /// `S₀/S₁ = μ([0])/μ([1])`.
    pub ratio: f64,
    /// `μ([0]) = S₀/(S₀ + S₁)`.
    pub mu0: f64,
}

/// `S₀ = N_a/D_a` (with `z = P − a_β`) and `S₁ = N_c/D_c` (with `z = P`).
pub fn walters_cylinder_ratio(
    w: &WaltersPotential,
    pert: FirstCoordPerturbation,
    beta: f64,
    log_p: f64,
) -> Result<CylinderRatio> {
    let lz = checked_log_z(log_p, pert.a_beta)?;
    Ok(cylinder_from_logs(w, beta, log_p, lz))
}

fn checked_log_z(log_p: f64, a_beta: f64) -> Result<f64> {
    log_z(log_p, a_beta).ok_or(Error::DivergentSeries {
        a_beta,
        pressure: log_p.exp(),
    })
}

fn cylinder_from_logs(w: &WaltersPotential, beta: f64, log_p: f64, lz: f64) -> CylinderRatio {
    let (log_da, log_na) = run_series(&w.a_seq, beta, lz);
    let (log_dc, log_nc) = run_series(&w.c_seq, beta, log_p);
    let log_s0 = log_na - log_da;
    let log_s1 = log_nc - log_dc;
    let diff = log_s0 - log_s1;
    CylinderRatio {
        log_s0,
        log_s1,
        ratio: diff.exp(),
        mu0: 1.0 / (1.0 + (-diff).exp()),
    }
}

/// `log(H(1^∞)/H(0^∞))`.
///
/// With `u_0 = Σ_m e^{β(b + s_{m−1}) + m(a_β − P)}` the run generating
/// function of 0-blocks, the ratio is
/// `u_0 · (1 − e^{a_β − P})/(1 − e^{−P})`.
pub fn walters_log_h_ratio(
    w: &WaltersPotential,
    pert: FirstCoordPerturbation,
    beta: f64,
    log_p: f64,
) -> Result<f64> {
    let lz = checked_log_z(log_p, pert.a_beta)?;
    Ok(h_ratio_from_logs(w, beta, log_p, lz))
}

fn h_ratio_from_logs(w: &WaltersPotential, beta: f64, log_p: f64, lz: f64) -> f64 {
    let (log_da, _) = run_series(&w.a_seq, beta, lz);
    let log_u0 = beta * w.b - lz.exp() + log_da;
    log_u0 + log1mexp_from_log(lz) - log1mexp_from_log(log_p)
}

/// `(P² + e^{βa})/(P + e^{βa}) · (P + e^{βc})/(P² + e^{βc})`, in logs.
pub fn walters_log_asymptotic_ratio(w: &WaltersPotential, log_p: f64, beta: f64) -> f64 {
    let (ba, bc) = (beta * w.a(), beta * w.c());
    log_add_exp(2.0 * log_p, ba) - log_add_exp(log_p, ba) + log_add_exp(log_p, bc)
        - log_add_exp(2.0 * log_p, bc)
}

pub fn walters_asymptotic_ratio(w: &WaltersPotential, log_p: f64, beta: f64) -> f64 {
    walters_log_asymptotic_ratio(w, log_p, beta).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Symmetric,
    TwoCycleDominant,
    ZeroDominant,
    BoundaryGolden,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Symmetric => "symmetric",
            Regime::TwoCycleDominant => "two-cycle-dominant",
            Regime::ZeroDominant => "zero-dominant",
            Regime::BoundaryGolden => "boundary-golden",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaltersZeroTempReport {
    pub gamma: f64,
    pub regime: Regime,
    /// `c > a`: the roles of 0 and 1 are exchanged.
    pub mirrored: bool,
    pub limit_mass_0: f64,
    pub l_limit: Option<f64>,
}

pub fn golden_mass() -> f64 {
    (10.0 + 2.0 * 5f64.sqrt()) / 20.0
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// Limit of `μ_{βA}([0])` from the case split on `a`, `c`, `b + d`.
pub fn classify_regime(w: &WaltersPotential) -> WaltersZeroTempReport {
    let gamma = walters_gamma(w);
    let (a, c, bd) = (w.a(), w.c(), w.b + w.d);
    if (a - c).abs() <= TIE_TOL {
        return WaltersZeroTempReport {
            gamma,
            regime: Regime::Symmetric,
            mirrored: false,
            limit_mass_0: 0.5,
            l_limit: None,
        };
    }
    let mirrored = c > a;
    let (hi, lo) = if mirrored { (c, a) } else { (a, c) };
    let key = hi + bd - lo;
    let (regime, mass, l_limit) = if key.abs() <= TIE_TOL {
        (Regime::BoundaryGolden, golden_mass(), Some(golden_ratio()))
    } else if key < 0.0 {
        (Regime::TwoCycleDominant, 0.5, None)
    } else {
        (Regime::ZeroDominant, 1.0, None)
    };
    WaltersZeroTempReport {
        gamma,
        regime,
        mirrored,
        limit_mass_0: if mirrored { 1.0 - mass } else { mass },
        l_limit,
    }
}

/// Measures and subaction value at one `β` for the potential `βA + B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaltersState {
    pub log_p: f64,
    pub mu0: f64,
    pub ratio: f64,
    /// `(1/β) log(H(1^∞)/H(0^∞))`.
    pub v1: f64,
}

/// Where the perturbation lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    /// `B_β = a_β` on `[0]`, 0 on `[1]`.
    FirstCoord,
    /// `B_β = a_β 1_{[ω]}` with `ω` the given symbol.
    CylinderIndicator { symbol: u8 },
}

/// Equilibrium data of `βA + a_β 1_{[symbol]}`.
pub fn walters_state(w: &WaltersPotential, beta: f64, a_beta: f64, symbol: u8) -> Result<WaltersState> {
    let pert = FirstCoordPerturbation { a_beta };
    if symbol == 1 {
        let s = walters_state(&w.swapped(), beta, a_beta, 0)?;
        return Ok(WaltersState {
            log_p: s.log_p,
            mu0: 1.0 - s.mu0,
            ratio: 1.0 / s.ratio,
            v1: -s.v1,
        });
    }
    let (log_p, lz) = solve_pressure(w, beta, pert)?;
    let r = cylinder_from_logs(w, beta, log_p, lz);
    let h = h_ratio_from_logs(w, beta, log_p, lz);
    Ok(WaltersState {
        log_p,
        mu0: r.mu0,
        ratio: r.ratio,
        v1: h / beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub beta: f64,
    pub a_beta: f64,
    pub unperturbed: WaltersState,
    pub perturbed: WaltersState,
    pub mu_gap: f64,
    pub v_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub gamma: f64,
    pub delta: f64,
    pub rows: Vec<StabilityRow>,
    /// Sup of the gaps over the second half of the grid.
    pub tail_mu_gap: f64,
    pub tail_v_gap: f64,
    /// Whether the `μ([0])` gap at the last β is no larger than at the first.
    pub shrinking: bool,
}

/// Compares `βA + B_β` with `βA` along the grid, `a_β = sign · e^{βδ}`.
pub fn perturbation_stability_experiment(
    w: &WaltersPotential,
    delta: f64,
    sign: f64,
    kind: PerturbationKind,
    beta_grid: &[f64],
) -> Result<StabilityReport> {
    crate::zerotemp::validate_grid(beta_grid)?;
    let symbol = match kind {
        PerturbationKind::FirstCoord => 0,
        PerturbationKind::CylinderIndicator { symbol } if symbol <= 1 => symbol,
        PerturbationKind::CylinderIndicator { symbol } => {
            return Err(Error::InvalidParameter(format!("symbol {symbol} not in {{0, 1}}")))
        }
    };
    let rows = beta_grid
        .iter()
        .map(|&beta| {
            let a_beta = FirstCoordPerturbation::exponential(sign, delta, beta).a_beta;
            let unperturbed = walters_state(w, beta, 0.0, 0)?;
            let perturbed = walters_state(w, beta, a_beta, symbol)?;
            Ok(StabilityRow {
                beta,
                a_beta,
                unperturbed,
                perturbed,
                mu_gap: (perturbed.mu0 - unperturbed.mu0).abs(),
                v_gap: (perturbed.v1 - unperturbed.v1).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let half = rows.len() / 2;
    let tail = &rows[half..];
    Ok(StabilityReport {
        gamma: walters_gamma(w),
        delta,
        tail_mu_gap: tail.iter().map(|r| r.mu_gap).fold(0.0, f64::max),
        tail_v_gap: tail.iter().map(|r| r.v_gap).fold(0.0, f64::max),
        shrinking: rows.last().map(|r| r.mu_gap) <= rows.first().map(|r| r.mu_gap),
        rows,
    })
}

/// `Σ_{1≤j<β} (j+1) e^{β s_j + j a_β − jP}`, the part of `N_a` that vanishes.
pub fn claim1_partial_sum(w: &WaltersPotential, beta: f64, a_beta: f64, log_p: f64) -> f64 {
    let p = log_p.exp();
    let k = beta.ceil() as usize;
    let sums = w.a_seq.partial_sums(k);
    (1..k)
        .map(|j| ((j + 1) as f64).ln() + beta * sums[j] + j as f64 * (a_beta - p))
        .collect::<LogAccumulator>()
        .log_value()
        .exp()
}

/// `(P Σ_{j≥β} e^{−jz}, P² Σ_{j≥β} (j+1) e^{−jz})` with `z = P − a_β`; both
/// tend to 1.
pub fn claim3_products(beta: f64, a_beta: f64, log_p: f64) -> Result<(f64, f64)> {
    let lz = log_z(log_p, a_beta).ok_or(Error::DivergentSeries {
        a_beta,
        pressure: log_p.exp(),
    })?;
    let k = beta.ceil();
    let l = log1mexp_from_log(lz);
    let log_s = -k * lz.exp() - l;
    let log_w = log_s + log_add_exp(k.ln(), -l);
    Ok(((log_p + log_s).exp(), (2.0 * log_p + log_w).exp()))
}

/// Closed forms of the two-state example with
/// `A(01) = A(10) = γ_p`, `A(00) = A(11) = 0` and
/// `B_β(11) = log(1 + e^{βη})`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixRecord {
    pub beta: f64,
    /// `log λ̃_β`, `λ̃_β = 1 + (e^{βη} + √(e^{2βη} + 4e^{2βγ}))/2`.
    pub log_lambda_tilde: f64,
    /// `log H_{βA+B}(1)` with `H(0) = 1`.
    pub log_h1_pert: f64,
    /// `μ_{βA+B}([0])`.
    pub p0: f64,
    /// `log H_{βA}(1)`.
    pub log_h1_unpert: f64,
    /// `P(βA) = log(1 + e^{βγ})`.
    pub p_unpert: f64,
    /// `μ_{βA}([0])`.
    pub mu0_unpert: f64,
}

fn check_appendix_params(gamma_p: f64, eta: f64, beta: f64) -> Result<()> {
    if !(gamma_p < eta && eta < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need gamma < eta < 0, got gamma = {gamma_p}, eta = {eta}"
        )));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

pub fn appendix_example(gamma_p: f64, eta: f64, beta: f64) -> Result<AppendixRecord> {
    check_appendix_params(gamma_p, eta, beta)?;
    let (be, bg) = (beta * eta, beta * gamma_p);
    // log √s with s = e^{2βη} + 4e^{2βγ}
    let log_sqrt_s = 0.5 * log_add_exp(2.0 * be, 4f64.ln() + 2.0 * bg);
    let log_excess = log_add_exp(be, log_sqrt_s) - 2f64.ln();
    let log_lambda_tilde = log_excess.exp().ln_1p();
    let log_h1_pert = log_excess - bg;
    // 1/2 − e^{βη}/(2√s) = 2e^{2βγ} / (√s (√s + e^{βη}))
    let log_p0 = 2f64.ln() + 2.0 * bg - log_sqrt_s - log_add_exp(log_sqrt_s, be);
    Ok(AppendixRecord {
        beta,
        log_lambda_tilde,
        log_h1_pert,
        p0: log_p0.exp(),
        log_h1_unpert: 0.0,
        p_unpert: bg.exp().ln_1p(),
        mu0_unpert: 0.5,
    })
}

/// The same quantities from [`perron`] on the explicit tables.
pub fn appendix_numeric(gamma_p: f64, eta: f64, beta: f64) -> Result<AppendixRecord> {
    check_appendix_params(gamma_p, eta, beta)?;
    let sft = full_shift(1, 0.5)?;
    let bump = (beta * eta).exp().ln_1p();
    let scaled = |with_b: bool| {
        LocallyConstantPotential::from_fn(sft.clone(), 1, move |w| match w {
            [0, 1] | [1, 0] => beta * gamma_p,
            [1, 1] if with_b => bump,
            _ => 0.0,
        })
    };
    let pert = perron(&scaled(true)?, 1.0, DEFAULT_TOL)?;
    let unpert = perron(&scaled(false)?, 1.0, DEFAULT_TOL)?;
    Ok(AppendixRecord {
        beta,
        log_lambda_tilde: pert.log_lambda,
        log_h1_pert: pert.log_h[1],
        p0: pert.cylinder_mass(&[0]),
        log_h1_unpert: unpert.log_h[1],
        p_unpert: unpert.log_lambda,
        mu0_unpert: unpert.cylinder_mass(&[0]),
    })
}

/// Largest relative disagreement between closed forms and [`perron`]:
/// `λ̃`, `H₁` and `p₀` compared as relative errors of the values themselves.
pub fn appendix_max_relative_error(closed: &AppendixRecord, numeric: &AppendixRecord) -> f64 {
    let rel = |x: f64, y: f64| ((x - y) / x).abs();
    let log_rel = |lx: f64, ly: f64| (ly - lx).exp_m1().abs();
    [
        log_rel(closed.log_lambda_tilde, numeric.log_lambda_tilde),
        log_rel(closed.log_h1_pert, numeric.log_h1_pert),
        rel(closed.p0, numeric.p0),
        log_rel(closed.log_h1_unpert, numeric.log_h1_unpert),
        rel(closed.p_unpert, numeric.p_unpert),
        rel(closed.mu0_unpert, numeric.mu0_unpert),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rep(r: Regime) -> WaltersPotential {
        regime_representatives().into_iter().find(|x| x.0 == r).unwrap().1
    }

    #[test]
    fn tail_sums() {
        let s = TailSequence::with_sum(-3.0, 0.5);
        assert_relative_eq!(s.total(), -3.0, max_relative = 1e-15);
        assert_relative_eq!(s.term(2), -1.5);
        let s = TailSequence {
            head: vec![-1.0, -0.5],
            alpha: -2.0,
            rho: 0.25,
        };
        let direct: f64 = (2..200).map(|n| s.term(n)).sum();
        assert_relative_eq!(s.total(), direct, max_relative = 1e-14);
        let sums = s.partial_sums(50);
        let c = s.tail_constant(0.5);
        for (j, sj) in sums.iter().enumerate().skip(1) {
            assert!(*sj >= s.total() - 1e-15);
            assert!(*sj <= s.total() + c * 0.5f64.powi(j as i32) + 1e-15);
        }
    }

    #[test]
    fn validation() {
        let g = |a| TailSequence::with_sum(a, 0.5);
        assert!(WaltersPotential::new(0.0, -1.0, g(-1.0), g(-1.0), 0.5).is_err());
        assert!(WaltersPotential::new(-1.0, -1.0, g(-1.0), g(-1.0), 0.4).is_err());
        assert!(WaltersPotential::new(-1.0, -1.0, TailSequence::finite(vec![-1.0]), g(-1.0), 0.5).is_err());
        assert!(WaltersPotential::relaxed(0.0, -1.0, TailSequence::finite(vec![-1.0]), g(-1.0), 0.5).is_ok());
        assert!(WaltersPotential::relaxed(0.0, 0.0, g(-1.0), g(-1.0), 0.5).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(walters_gamma(&rep(Regime::BoundaryGolden)), -3.0);
        assert_eq!(walters_gamma(&rep(Regime::Symmetric)), -2.0);
        let tiny = TailSequence::geometric(-1e-300, 0.5);
        let w = WaltersPotential::new(-1.0, -1.0, tiny.clone(), tiny, 0.5).unwrap();
        assert_relative_eq!(walters_gamma(&w), -1.0);
    }

    #[test]
    fn degenerate_tails_match_lc1() {
        let tiny = TailSequence::geometric(-1e-300, 0.5);
        let w = WaltersPotential::new(-1.0, -1.0, tiny.clone(), tiny, 0.5).unwrap();
        for beta in [1.0, 5.0, 20.0] {
            let lp = walters_pressure(&w, beta, FirstCoordPerturbation::none()).unwrap();
            assert_relative_eq!(lp.exp(), (-beta).exp().ln_1p(), max_relative = 1e-12);
            let h = walters_log_h_ratio(&w, FirstCoordPerturbation::none(), beta, lp).unwrap();
            assert!(h.abs() < 1e-10);
        }
    }

    #[test]
    fn regimes() {
        for (r, w) in regime_representatives() {
            let rep = classify_regime(&w);
            assert_eq!(rep.regime, r);
            assert!(!rep.mirrored);
            let m = classify_regime(&w.swapped());
            assert_eq!(m.regime, r);
            assert_eq!(m.mirrored, r != Regime::Symmetric);
            assert_relative_eq!(m.limit_mass_0, 1.0 - rep.limit_mass_0);
        }
        assert_eq!(classify_regime(&rep(Regime::BoundaryGolden)).l_limit, Some(golden_ratio()));
        assert_eq!(Regime::BoundaryGolden.to_string(), "boundary-golden");
    }

    #[test]
    fn swap_symmetry() {
        let w = rep(Regime::ZeroDominant);
        let beta = 30.0;
        let s = walters_state(&w, beta, 0.0, 0).unwrap();
        let t = walters_state(&w.swapped(), beta, 0.0, 0).unwrap();
        assert_relative_eq!(s.log_p, t.log_p, max_relative = 1e-12);
        assert_relative_eq!(s.mu0, 1.0 - t.mu0, max_relative = 1e-10);
        assert_relative_eq!(s.v1, -t.v1, max_relative = 1e-10);
    }

    #[test]
    fn golden_boundary_at_150() {
        let w = rep(Regime::BoundaryGolden);
        let beta = 150.0;
        let lp = walters_pressure(&w, beta, FirstCoordPerturbation::none()).unwrap();
        let l = (lp - beta * walters_gamma(&w)).exp();
        assert!((l - golden_ratio()).abs() < 0.02, "l = {l}");
        let r = walters_cylinder_ratio(&w, FirstCoordPerturbation::none(), beta, lp).unwrap();
        assert!((r.mu0 - golden_mass()).abs() < 0.02);
        let asym = walters_asymptotic_ratio(&w, lp, beta);
        assert!((asym / r.ratio - 1.0).abs() < 0.02);
    }

    #[test]
    fn divergent_series_is_reported() {
        let w = rep(Regime::Symmetric);
        let pert = FirstCoordPerturbation { a_beta: 1e-3 };
        assert!(matches!(
            walters_cylinder_ratio(&w, pert, 10.0, (1e-4f64).ln()),
            Err(Error::DivergentSeries { .. })
        ));
    }

    #[test]
    fn appendix_closed_forms() {
        let r = appendix_example(-2.0, -1.0, 10.0).unwrap();
        let direct = 0.5 - 1.0 / (2.0 * (1.0 + 4.0 * (-20f64).exp()).sqrt());
        assert_relative_eq!(r.p0, direct, max_relative = 1e-6);
        assert!((r.p0 - 2.06e-9).abs() < 0.01e-9);
        assert!(appendix_example(-1.0, -2.0, 1.0).is_err());
        for beta in [5.0, 10.0, 20.0] {
            let c = appendix_example(-2.0, -1.0, beta).unwrap();
            let n = appendix_numeric(-2.0, -1.0, beta).unwrap();
            assert!(appendix_max_relative_error(&c, &n) < 1e-10);
        }
    }

    #[test]
    fn claims_at_150() {
        let beta = 150.0;
        for (_, w) in regime_representatives() {
            let delta = walters_gamma(&w) - 0.5;
            for a_beta in [0.0, (beta * delta).exp(), -(beta * delta).exp()] {
                let pert = FirstCoordPerturbation { a_beta };
                let lp = walters_pressure(&w, beta, pert).unwrap();
                assert!(claim1_partial_sum(&w, beta, a_beta, lp) < 1e-8);
                let (x, y) = claim3_products(beta, a_beta, lp).unwrap();
                assert!((x - 1.0).abs() < 0.05 && (y - 1.0).abs() < 0.05, "{x} {y}");
            }
        }
    }

    #[test]
    fn regime_predictions_at_150() {
        let beta = 150.0;
        for (r, w) in regime_representatives() {
            if r == Regime::ZeroDominant {
                let s = walters_state(&w, beta, 0.0, 0).unwrap();
                assert!(s.ratio > 100.0 && s.mu0 > 0.99);
            }
            for w in [w.clone(), w.swapped()] {
                let s = walters_state(&w, beta, 0.0, 0).unwrap();
                let pred = classify_regime(&w).limit_mass_0;
                assert!((s.mu0 - pred).abs() <= 0.02, "{} vs {pred}", s.mu0);
                assert!((s.log_p / beta - walters_gamma(&w)).abs() <= 0.05);
                let asym = walters_asymptotic_ratio(&w, s.log_p, beta);
                assert!((asym / s.ratio - 1.0).abs() < 0.02);
            }
        }
    }

    #[test]
    fn asymptotic_ratio_examples() {
        let w = rep(Regime::Symmetric);
        assert_eq!(walters_log_asymptotic_ratio(&w, -300.0, 150.0), 0.0);
        let w = rep(Regime::BoundaryGolden);
        let beta = 400.0;
        let lp = golden_ratio().ln() + beta * walters_gamma(&w);
        let r = walters_asymptotic_ratio(&w, lp, beta);
        assert_relative_eq!(r, (3.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_perturbation_has_no_gap() {
        let w = rep(Regime::BoundaryGolden);
        let rep = perturbation_stability_experiment(&w, -1e9, 1.0, PerturbationKind::FirstCoord, &[10.0, 20.0])
            .unwrap();
        for r in &rep.rows {
            assert_eq!(r.a_beta, 0.0);
            assert_eq!(r.mu_gap, 0.0);
            assert_eq!(r.v_gap, 0.0);
        }
    }

    #[test]
    fn stability_gap_shrinks() {
        let w = rep(Regime::TwoCycleDominant);
        let delta = walters_gamma(&w) - 0.5;
        let grid = [4.0, 8.0, 16.0, 32.0];
        for kind in [PerturbationKind::FirstCoord, PerturbationKind::CylinderIndicator { symbol: 1 }] {
            let rep = perturbation_stability_experiment(&w, delta, 1.0, kind, &grid).unwrap();
            assert!(rep.shrinking);
            assert!(rep.rows[0].mu_gap > 0.0);
        }
        let bad = PerturbationKind::CylinderIndicator { symbol: 2 };
        assert!(perturbation_stability_experiment(&w, delta, 1.0, bad, &grid).is_err());
    }

    #[test]
    fn appendix_limits() {
        let r = appendix_example(-2.0, -1.0, 50.0).unwrap();
        assert!((r.log_h1_pert / 50.0 - 1.0).abs() < 0.02);
        assert!(appendix_example(-2.0, -1.0, 20.0).unwrap().p0 < 1e-8);
        assert_eq!(r.mu0_unpert, 0.5);
    }

    fn arb_walters() -> impl Strategy<Value = WaltersPotential> {
        (-3.0f64..-0.1, -3.0f64..-0.1, -3.0f64..-0.1, -3.0f64..-0.1, 0.1f64..0.5).prop_map(|(a, c, b, d, rho)| {
            WaltersPotential::new(b, d, TailSequence::with_sum(a, rho), TailSequence::with_sum(c, rho), 0.5).unwrap()
        })
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pressure_sandwich(w in arb_walters(), beta in 1.0f64..60.0, frac in -2.0f64..2.0) {
            let base = walters_pressure(&w, beta, FirstCoordPerturbation::none()).unwrap();
            let a_beta = frac * base.exp();
            let p = walters_pressure(&w, beta, FirstCoordPerturbation { a_beta }).unwrap();
            let gap = (p.exp() - base.exp()).abs();
            prop_assert!(gap <= a_beta.abs() * (1.0 + 1e-9) + 1e-12 * base.exp());
        }

        #[test]
        fn relabeling_symmetry(w in arb_walters(), beta in 1.0f64..60.0, a_beta in -0.1f64..0.1) {
            let s = walters_state(&w, beta, a_beta, 1).unwrap();
            let t = walters_state(&w.swapped(), beta, a_beta, 0).unwrap();
            prop_assert!((s.log_p - t.log_p).abs() <= 1e-10 * s.log_p.abs().max(1.0));
            prop_assert!((s.mu0 + t.mu0 - 1.0).abs() <= 1e-9);
            prop_assert!((s.v1 + t.v1).abs() <= 1e-9);
        }

        #[test]
        fn tail_bounds(w in arb_walters(), beta in 1.0f64..200.0) {
            let seq = &w.a_seq;
            let trunc = truncation(seq, beta);
            let sums = seq.partial_sums(trunc);
            let (a, c) = (seq.total(), seq.tail_constant(w.theta));
            for (j, s) in sums.iter().enumerate().skip(1) {
                prop_assert!(*s >= a - 1e-12);
                prop_assert!(*s <= a + c * w.theta.powi(j as i32) + 1e-12);
            }
        }

        #[test]
        fn matches_truncated_table(w in arb_walters(), beta in 0.5f64..4.0, a_beta in -0.3f64..0.3) {
            let t = w.truncated(5).unwrap();
            let table = t.truncated_table(5).unwrap();
            let sft = full_shift(1, 0.5).unwrap();
            let tilted = LocallyConstantPotential::from_fn(sft, 5, |x| {
                beta * table.value(x).unwrap() + if x[0] == 0 { a_beta } else { 0.0 }
            }).unwrap();
            let p = perron(&tilted, 1.0, DEFAULT_TOL).unwrap();
            let s = walters_state(&t, beta, a_beta, 0).unwrap();
            prop_assert!((s.log_p.exp() / p.log_lambda - 1.0).abs() < 1e-9);
            prop_assert!((s.mu0 - p.cylinder_mass(&[0])).abs() < 1e-9);
            let h = p.log_h[p.state_of(&[1; 5]).unwrap()] - p.log_h[p.state_of(&[0; 5]).unwrap()];
            prop_assert!((s.v1 * beta - h).abs() < 1e-8);
        }
    }
}
