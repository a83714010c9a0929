//! Transfer operators of locally constant potentials.
//!
//! A potential of depth `k` is a function of the first `k + 1` symbols. Its
//! Ruelle operator acts on functions of the first `k` symbols (depth 0 is
//! lifted to `k = 1`), so it is a finite matrix indexed by the admissible
//! `k`-words in lexicographic order. All computations stay in the log domain.

use std::collections::{BTreeMap, HashMap};

use crate::aubry::{decompose_aubry, WordGraph};
use crate::logsum::{log_log1p_exp, log_sum_exp, LogAccumulator};
use crate::symbolic::{Sft, Word};
use crate::{Error, Result};

const MAX_SQUARINGS: usize = 4096;
const NORMALIZED_TOL: f64 = 1e-12;

/// Default tolerance for [`perron`].
pub const DEFAULT_TOL: f64 = 1e-14;

/// A potential constant on cylinders of length `depth + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantPotential {
    sft: Sft,
    depth: usize,
    values: BTreeMap<Vec<u8>, f64>,
    normalized: bool,
}

impl LocallyConstantPotential {
    /// Builds a potential from a table over admissible `(depth + 1)`-words.
    ///
    /// Extra entries for inadmissible words are rejected; missing entries
    /// are reported.
    pub fn new(sft: Sft, depth: usize, values: BTreeMap<Vec<u8>, f64>) -> Result<Self> {
        for (w, v) in &values {
            if w.len() != depth + 1 || !sft.is_admissible(w) {
                return Err(Error::InadmissibleWord(w.clone()));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "potential value {v} on {w:?} is not finite"
                )));
            }
        }
        for w in sft.enumerate_words(depth + 1) {
            if !values.contains_key(&w.0) {
                return Err(Error::IncompleteTable(w.0));
            }
        }
        let mut p = Self {
            sft,
            depth,
            values,
            normalized: false,
        };
        p.normalized = p.values.values().all(|&v| v <= 0.0)
            && WordGraph::from_potential(&p)
                .max_cycle_mean()
                .is_ok_and(|m| m.abs() <= NORMALIZED_TOL);
        Ok(p)
    }

    pub fn from_fn(sft: Sft, depth: usize, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        let values = sft
            .enumerate_words(depth + 1)
            .into_iter()
            .map(|w| {
                let v = f(&w.0);
                (w.0, v)
            })
            .collect();
        Self::new(sft, depth, values)
    }

    /// Fails unless all values are `≤ 0` and the maximal ergodic average is 0.
    pub fn require_normalized(self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        let m = WordGraph::from_potential(&self).max_cycle_mean()?;
        if m > NORMALIZED_TOL {
            return Err(Error::PositiveCycle(m));
        }
        Err(Error::InvalidParameter(format!(
            "potential is not normalized (maximal ergodic average {m}, values must be <= 0)"
        )))
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Length of the words indexing the transfer matrix.
    pub fn state_len(&self) -> usize {
        self.depth.max(1)
    }

    pub fn states(&self) -> Vec<Word> {
        self.sft.enumerate_words(self.state_len())
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn values(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.values
    }

    /// Value on the cylinder of a `(depth + 1)`-word.
    pub fn value(&self, word: &[u8]) -> Option<f64> {
        self.values.get(word).copied()
    }

    /// Value on a `(state_len + 1)`-word.
    pub fn edge_value(&self, word: &[u8]) -> Option<f64> {
        self.value(&word[..self.depth + 1])
    }

    /// Pointwise sum with another potential on the same shift.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.sft != other.sft {
            return Err(Error::InvalidParameter("potentials live on different shifts".into()));
        }
        let depth = self.depth.max(other.depth);
        Self::from_fn(self.sft.clone(), depth, |w| {
            self.value(&w[..self.depth + 1]).unwrap_or(f64::NAN)
                + other.value(&w[..other.depth + 1]).unwrap_or(f64::NAN)
        })
    }
}

/// Square matrix of log-entries (`−∞` for a zero entry).
#[derive(Debug, Clone, PartialEq)]
pub struct LogMatrix {
    n: usize,
    data: Vec<f64>,
}

impl LogMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn square(&self) -> Self {
        let n = self.n;
        let mut out = vec![f64::NEG_INFINITY; n * n];
        let mut terms = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for (k, t) in terms.iter_mut().enumerate() {
                    *t = self.get(i, k) + self.get(k, j);
                }
                out[i * n + j] = log_sum_exp(&terms);
            }
        }
        Self { n, data: out }
    }

    fn transposed(&self) -> Self {
        let n = self.n;
        let data = (0..n * n).map(|e| self.get(e % n, e / n)).collect();
        Self { n, data }
    }

    /// `M + e^{log_c} I`.
    fn shifted(&self, log_c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] = crate::logsum::log_add_exp(out.data[i * self.n + i], log_c);
        }
        out
    }

    /// `log(M ψ)` for `ψ` given in logs.
    pub fn apply(&self, log_v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(log_v)
                    .map(|(m, v)| m + v)
                    .collect::<LogAccumulator>()
                    .log_value()
            })
            .collect()
    }
}

/// Perron data of a nonnegative matrix given in logs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPerron {
    pub log_rho: f64,
    /// Right eigenvector, arbitrary scale.
    pub log_right: Vec<f64>,
    /// Left eigenvector, arbitrary scale.
    pub log_left: Vec<f64>,
}

/// Perron root and eigenvectors by repeated squaring in the log domain.
///
/// `M^{2^s}` converges to the rank-one projector `ρ^{2^s} r lᵀ` at a rate
/// `(|λ₂|/ρ)^{2^s}`; the row sums then give `r`, the column sums `l`.
/// Rounding in the squares leaves an error along eigenvalues close to `−ρ`
/// (nearly periodic matrices); two lazy power steps `v ← v + Mv/ρ` remove
/// it without perturbing the matrix entries. With `lazy`, `I + M` is squared
/// instead, which suits 0/1 adjacency matrices that may be periodic.
pub fn log_perron(m: &LogMatrix, lazy: bool, tol: f64) -> Result<LogPerron> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if m.n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let (mut log_right, mut log_left) = if lazy {
        squared_limit(m.shifted(0.0), tol)?
    } else {
        squared_limit(m.clone(), tol)?
    };
    if !lazy {
        let mt = m.transposed();
        for _ in 0..2 {
            let rho = rayleigh(m, &log_right, &log_left);
            log_right = lazy_step(m, &log_right, rho);
            log_left = lazy_step(&mt, &log_left, rho);
        }
    }
    let log_rho = rayleigh(m, &log_right, &log_left);
    Ok(LogPerron {
        log_rho,
        log_right,
        log_left,
    })
}

/// Row and column log-sums of the normalized limit of `p^{2^s}`.
fn squared_limit(mut p: LogMatrix, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p.n;
    let mut last_spread = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_SQUARINGS {
        p = p.square();
        let max = p.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::Reducible);
        }
        for x in &mut p.data {
            *x -= max;
        }
        let spread = rank_one_spread(&p);
        if spread <= tol || (spread < 1e-8 && spread >= last_spread) {
            converged = true;
            break;
        }
        last_spread = spread;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Perron squaring",
            iterations: MAX_SQUARINGS,
        });
    }
    if p.data.contains(&f64::NEG_INFINITY) {
        return Err(Error::Reducible);
    }
    let right = (0..n).map(|i| log_sum_exp(p.row(i))).collect();
    let left = (0..n)
        .map(|j| log_sum_exp(&(0..n).map(|i| p.get(i, j)).collect::<Vec<_>>()))
        .collect();
    Ok((right, left))
}

/// `log(v + Mv/ρ)`.
fn lazy_step(m: &LogMatrix, log_v: &[f64], log_rho: f64) -> Vec<f64> {
    m.apply(log_v)
        .iter()
        .zip(log_v)
        .map(|(mv, v)| crate::logsum::log_add_exp(*v, mv - log_rho))
        .collect()
}

/// `log(lᵀ M r / lᵀ r)`.
fn rayleigh(m: &LogMatrix, log_right: &[f64], log_left: &[f64]) -> f64 {
    let mr = m.apply(log_right);
    let num: LogAccumulator = log_left.iter().zip(&mr).map(|(l, x)| l + x).collect();
    let den: LogAccumulator = log_left.iter().zip(log_right).map(|(l, r)| l + r).collect();
    num.log_value() - den.log_value()
}

/// Largest deviation of `p` from a rank-one matrix, in logs.
fn rank_one_spread(p: &LogMatrix) -> f64 {
    let n = p.n;
    let mut spread: f64 = 0.0;
    for j in 1..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let d = p.get(i, j) - p.get(i, 0);
            if d.is_nan() {
                return f64::INFINITY;
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
        spread = spread.max(hi - lo);
    }
    spread
}

/// Log-entries of `L_{βA}` on functions of the first `k` symbols.
///
/// Entry `(x, z)` is `βA(a·x)` where `z` is the first `k` symbols of `a·x`,
/// i.e. row = target word, column = word obtained by prepending `a`.
pub fn transfer_matrix(a: &LocallyConstantPotential, beta: f64) -> Result<LogMatrix> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let k = a.state_len();
    let states = a.states();
    let index = state_index(&states);
    let n = states.len();
    let mut data = vec![f64::NEG_INFINITY; n * n];
    for (x_idx, x) in states.iter().enumerate() {
        for s in 0..a.sft.alphabet_size() as u8 {
            if !a.sft.allowed(s, x.0[0]) {
                continue;
            }
            let mut ax = Vec::with_capacity(k + 1);
            ax.push(s);
            ax.extend_from_slice(&x.0);
            let v = a.edge_value(&ax).ok_or_else(|| Error::IncompleteTable(ax.clone()))?;
            data[x_idx * n + index[&ax[..k]]] = beta * v;
        }
    }
    LogMatrix::new(n, data)
}

fn state_index(states: &[Word]) -> HashMap<Vec<u8>, usize> {
    states.iter().enumerate().map(|(i, w)| (w.0.clone(), i)).collect()
}

/// Perron data of `L_{βA}` together with the equilibrium measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub beta: f64,
    /// `log λ = P(βA)`.
    pub log_lambda: f64,
    /// Entropy of the maximising part, when the potential is normalized.
    pub h: Option<f64>,
    /// `log(P(βA) − h)`; `−∞` when the excess vanishes.
    pub log_excess: Option<f64>,
    pub states: Vec<Word>,
    /// `log H` with `H(0^k) = 1`.
    pub log_h: Vec<f64>,
    /// `log ν` with `Σ ν = 1`.
    pub log_nu: Vec<f64>,
    matrix: LogMatrix,
    index: HashMap<Vec<u8>, usize>,
    log_duality: f64,
}

impl PerronData {
    pub fn pressure(&self) -> f64 {
        self.log_lambda
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.log_h.iter().map(|x| x.exp()).collect()
    }

    pub fn nu_values(&self) -> Vec<f64> {
        self.log_nu.iter().map(|x| x.exp()).collect()
    }

    pub fn state_of(&self, word: &[u8]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn matrix(&self) -> &LogMatrix {
        &self.matrix
    }

    /// `log Σ_w ν(w) H(w)`.
    pub fn log_duality(&self) -> f64 {
        self.log_duality
    }

    /// Log of the equilibrium mass of `[w]`; `−∞` for inadmissible words.
    pub fn log_cylinder_mass(&self, w: &[u8]) -> f64 {
        let k = self.states[0].len();
        if w.len() < k {
            let acc: LogAccumulator = self
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.0.starts_with(w))
                .map(|(i, _)| self.log_h[i] + self.log_nu[i] - self.log_duality)
                .collect();
            return acc.log_value();
        }
        let Some(&last) = self.index.get(&w[w.len() - k..]) else {
            return f64::NEG_INFINITY;
        };
        let mut log_mass = self.log_h[last] + self.log_nu[last] - self.log_duality;
        let mut cur = last;
        for start in (0..w.len() - k).rev() {
            let Some(&prev) = self.index.get(&w[start..start + k]) else {
                return f64::NEG_INFINITY;
            };
            let entry = self.matrix.get(cur, prev);
            if entry == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            log_mass += entry + self.log_h[prev] - self.log_lambda - self.log_h[cur];
            cur = prev;
        }
        log_mass
    }

    pub fn cylinder_mass(&self, w: &[u8]) -> f64 {
        self.log_cylinder_mass(w).exp()
    }

    /// `∫ A dμ_{βA}` for the potential the data was built from.
    pub fn integral(&self, a: &LocallyConstantPotential) -> f64 {
        let k = a.state_len();
        let mut acc = crate::logsum::Neumaier::default();
        for w in a.sft().enumerate_words(k + 1) {
            let v = a.edge_value(&w.0).unwrap_or(0.0);
            acc.add(v * self.cylinder_mass(&w.0));
        }
        acc.value()
    }
}

/// Pressure, eigenfunction, eigenmeasure and equilibrium measure of `βA`.
///
/// When `A` is normalized (values `≤ 0`, maximal ergodic average 0) the
/// excess `λ − e^h` is computed without cancellation: with `K` the critical
/// part of the matrix and `w` a left Perron vector of `K` on a component of
/// maximal entropy, `λ − e^h = w(M − K)H / wH`, a sum of nonnegative terms.
pub fn perron(a: &LocallyConstantPotential, beta: f64, tol: f64) -> Result<PerronData> {
    let matrix = transfer_matrix(a, beta)?;
    let lp = log_perron(&matrix, false, tol)?;
    let states = a.states();
    let index = state_index(&states);
    let n = states.len();

    let zero_word = vec![0u8; a.state_len()];
    let anchor = index.get(&zero_word).copied().unwrap_or(0);
    let log_h: Vec<f64> = lp.log_right.iter().map(|x| x - lp.log_right[anchor]).collect();
    let nu_total = log_sum_exp(&lp.log_left);
    let log_nu: Vec<f64> = lp.log_left.iter().map(|x| x - nu_total).collect();
    let log_duality = log_sum_exp(
        &log_h.iter().zip(&log_nu).map(|(h, v)| h + v).collect::<Vec<_>>(),
    );

    let (log_lambda, h, log_excess) = if a.is_normalized() {
        let (h, log_delta) = critical_excess(a, &matrix, &log_h, tol)?;
        if log_delta == f64::NEG_INFINITY {
            (h, Some(h), Some(f64::NEG_INFINITY))
        } else {
            let x = log_delta - h;
            let p = h + x.exp().ln_1p();
            (p, Some(h), Some(log_log1p_exp(x)))
        }
    } else {
        (lp.log_rho, None, None)
    };
    debug_assert_eq!(log_h.len(), n);

    Ok(PerronData {
        beta,
        log_lambda,
        h,
        log_excess,
        states,
        log_h,
        log_nu,
        matrix,
        index,
        log_duality,
    })
}

/// `(h, log(λ − e^h))` for a normalized potential.
fn critical_excess(
    a: &LocallyConstantPotential,
    matrix: &LogMatrix,
    log_h: &[f64],
    tol: f64,
) -> Result<(f64, f64)> {
    let graph = WordGraph::from_potential(a);
    let dec = decompose_aubry(&graph)?;
    let best = dec.maximal_set[0];
    let h = dec.entropies[best];
    let comp = &dec.components[best];
    let n = matrix.dim();

    // K restricted to the component: edge z -> x is entry (x, z)
    let m = comp.len();
    let mut k_data = vec![f64::NEG_INFINITY; m * m];
    for (ix, &x) in comp.iter().enumerate() {
        for (iz, &z) in comp.iter().enumerate() {
            if dec.is_critical(z, x) {
                k_data[ix * m + iz] = 0.0;
            }
        }
    }
    let kp = log_perron(&LogMatrix::new(m, k_data)?, true, tol)?;

    let mut num = LogAccumulator::new();
    let mut den = LogAccumulator::new();
    for (ix, &x) in comp.iter().enumerate() {
        let lw = kp.log_left[ix];
        den.push(lw + log_h[x]);
        for z in 0..n {
            let e = matrix.get(x, z);
            if e == f64::NEG_INFINITY || dec.is_critical(z, x) {
                continue;
            }
            num.push(lw + e + log_h[z]);
        }
    }
    Ok((h, num.log_value() - den.log_value()))
}

/// Mass of `[w]` under the equilibrium measure; 0 for inadmissible words.
pub fn equilibrium_cylinder_mass(p: &PerronData, w: &Word) -> f64 {
    p.cylinder_mass(&w.0)
}

/// `[P − B, P + B]`, the range of `P(βA + B)` when `‖B‖_∞ ≤ B`.
pub fn pressure_bounds_under_perturbation(p_unperturbed: f64, b_sup: f64) -> Result<(f64, f64)> {
    if !(b_sup >= 0.0) {
        return Err(Error::InvalidParameter(format!("sup norm {b_sup} must be >= 0")));
    }
    Ok((p_unperturbed - b_sup, p_unperturbed + b_sup))
}
