//! Zero-temperature asymptotics of locally constant potentials.
//!
//! For a normalized potential `A` (values `≤ 0`, `m(A) = 0`) the pressure
//! `P(βA)` decreases to the entropy `h` of the Aubry set, and the excess
//! `P(βA) − h` decays like `e^{βγ}` with `γ` the max-plus eigenvalue of the
//! cost matrix between maximal-entropy components.

use std::thread;

use crate::aubry::{decompose_aubry, AubryDecomposition, WordGraph};
use crate::maxplus::{mp_eigenvectors, MaxPlusEigenData};
use crate::spectral::{perron, LocallyConstantPotential, PerronData};
use crate::symbolic::Word;
use crate::{Error, Result};

/// `2, 4, 8, …, 256`.
pub fn default_beta_grid() -> Vec<f64> {
    (1..=8).map(|i| f64::from(1u32 << i)).collect()
}

/// Checks that `grid` is nonempty, positive and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("beta grid is empty".into()));
    }
    if grid.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::InvalidParameter("beta values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("beta grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Maps `f` over `items` on up to `threads` scoped workers, preserving order.
pub fn par_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub beta_grid: Vec<f64>,
    pub pressure: Vec<f64>,
    /// `log(P(βA) − h)`.
    pub log_excess: Vec<f64>,
    /// `(1/β) log(P(βA) − h)`.
    pub gamma_hat: Vec<f64>,
    pub gamma_maxplus: f64,
    pub h: f64,
    pub decomposition: AubryDecomposition,
}

impl GammaEstimate {
    /// Whether `gamma_hat` never increases by more than `slack`.
    pub fn gamma_hat_non_increasing(&self, slack: f64) -> bool {
        self.gamma_hat.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    /// Whether `P(βA) − h` never increases by more than a relative `slack`.
    pub fn excess_non_increasing(&self, slack: f64) -> bool {
        self.log_excess.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    /// Fits `C = max β|γ̂ − γ|` on the first half of the grid and checks
    /// `|γ̂ − γ| ≤ C/β` on the second half.
    pub fn convergence_fit(&self) -> ConvergenceFit {
        let errs: Vec<f64> = self
            .beta_grid
            .iter()
            .zip(&self.gamma_hat)
            .map(|(b, g)| b * (g - self.gamma_maxplus).abs())
            .collect();
        let half = errs.len().div_ceil(2);
        let c = errs[..half].iter().copied().fold(0.0, f64::max);
        let worst = errs[half..].iter().copied().fold(0.0, f64::max);
        ConvergenceFit {
            c,
            worst_second_half: worst,
            holds: worst <= c * (1.0 + 1e-9) + 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceFit {
    pub c: f64,
    /// `max β|γ̂ − γ|` over the second half.
    pub worst_second_half: f64,
    pub holds: bool,
}

/// `γ̂(β)` on the grid against the max-plus prediction.
pub fn estimate_gamma(a: &LocallyConstantPotential, beta_grid: &[f64], tol: f64) -> Result<GammaEstimate> {
    estimate_gamma_threaded(a, beta_grid, tol, 1)
}

pub fn estimate_gamma_threaded(
    a: &LocallyConstantPotential,
    beta_grid: &[f64],
    tol: f64,
    threads: usize,
) -> Result<GammaEstimate> {
    if !a.is_normalized() {
        a.clone().require_normalized()?;
    }
    validate_grid(beta_grid)?;
    let data = par_map(beta_grid, threads, |&b| perron(a, b, tol));
    let mut pressure = Vec::with_capacity(data.len());
    let mut log_excess = Vec::with_capacity(data.len());
    let mut gamma_hat = Vec::with_capacity(data.len());
    let mut h = 0.0;
    for (p, &beta) in data.into_iter().zip(beta_grid) {
        let p = p?;
        let le = p.log_excess.expect("normalized potential");
        if le == f64::NEG_INFINITY {
            return Err(Error::NonPositiveExcess(beta));
        }
        h = p.h.expect("normalized potential");
        pressure.push(p.log_lambda);
        log_excess.push(le);
        gamma_hat.push(le / beta);
    }
    let decomposition = decompose_aubry(&WordGraph::from_potential(a))?;
    let gamma_maxplus = mp_eigenvectors(&decomposition.restricted_cost())?.eigenvalue;
    Ok(GammaEstimate {
        beta_grid: beta_grid.to_vec(),
        pressure,
        log_excess,
        gamma_hat,
        gamma_maxplus,
        h,
        decomposition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubactionEstimate {
    pub beta: f64,
    pub states: Vec<Word>,
    /// `(1/β) log H`, zero at `0^k`.
    pub v_hat: Vec<f64>,
    /// `max_x |max_{σz=x} [A(z) + V̂(z) − V̂(x)]|`.
    pub calibration_residual: f64,
    /// `max_j [V(Σ_j) + S(Σ_j, x)]` from the max-plus eigenvector; `None`
    /// when the eigenspace is not one-dimensional.
    pub v_rec: Option<Vec<f64>>,
    /// Max-plus eigen-data of the cost restricted to maximal components.
    pub eigen: Option<MaxPlusEigenData<f64>>,
    pub decomposition: AubryDecomposition,
}

impl SubactionEstimate {
    /// `max |V̂ − V_rec|`.
    pub fn reconstruction_gap(&self) -> Option<f64> {
        self.v_rec.as_ref().map(|r| {
            r.iter()
                .zip(&self.v_hat)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        })
    }

    /// Largest spread of `V̂` within a single Aubry component.
    pub fn component_spread(&self) -> f64 {
        self.decomposition
            .components
            .iter()
            .map(|c| {
                let vals = c.iter().map(|&i| self.v_hat[i]);
                let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// `V̂` at the least node of each component.
    pub fn component_values(&self) -> Vec<f64> {
        self.decomposition.components.iter().map(|c| self.v_hat[c[0]]).collect()
    }
}

/// Subaction estimate `(1/β) log H_{βA}` and its max-plus reconstruction.
pub fn estimate_subaction(a: &LocallyConstantPotential, beta: f64, tol: f64) -> Result<SubactionEstimate> {
    let p = perron(a, beta, tol)?;
    subaction_from_perron(a, &p)
}

pub fn subaction_from_perron(a: &LocallyConstantPotential, p: &PerronData) -> Result<SubactionEstimate> {
    let g = WordGraph::from_potential(a);
    let decomposition = decompose_aubry(&g)?;
    let v_hat: Vec<f64> = p.log_h.iter().map(|x| x / p.beta).collect();
    let n = v_hat.len();

    let mut residual: f64 = 0.0;
    for x in 0..n {
        let best = (0..n)
            .filter_map(|z| g.weights.get(z, x).map(|w| w + v_hat[z] - v_hat[x]))
            .fold(f64::NEG_INFINITY, f64::max);
        residual = residual.max(best.abs());
    }

    let (eigen, v_rec) = if decomposition.cost.dim() == 0 {
        (None, None)
    } else {
        let eigen = mp_eigenvectors(&decomposition.restricted_cost())?;
        let v_rec = if eigen.eigenspace_dim == 1 {
            Some(reconstruct(&decomposition, &eigen.eigenvectors[0], &p.states))
        } else {
            None
        };
        (Some(eigen), v_rec)
    };

    Ok(SubactionEstimate {
        beta: p.beta,
        states: p.states.clone(),
        v_hat,
        calibration_residual: residual,
        v_rec,
        eigen,
        decomposition,
    })
}

/// `V(x) = max_j [V(Σ_j) + S(s_j, x)]`, with the values on low-entropy
/// components obtained from `V_S = A_SS* ⊗ A_SK ⊗ V_K`.
fn reconstruct(dec: &AubryDecomposition, v_k: &[Option<f64>], states: &[Word]) -> Vec<f64> {
    let l = dec.components.len();
    let mut v = vec![None; l];
    for (pos, &i) in dec.maximal_set.iter().enumerate() {
        v[i] = v_k[pos];
    }
    let small: Vec<usize> = (0..l).filter(|i| !dec.maximal_set.contains(i)).collect();
    if !small.is_empty() {
        let star = dec.cost.submatrix(&small).star_closure();
        for (p, &s) in small.iter().enumerate() {
            let mut best: Option<f64> = None;
            for (q, &t) in small.iter().enumerate() {
                for &k in &dec.maximal_set {
                    if let (Some(x), Some(y), Some(z)) = (star.get(p, q), dec.cost.get(t, k), v[k]) {
                        best = Some(best.map_or(x + y + z, |b: f64| b.max(x + y + z)));
                    }
                }
            }
            v[s] = best;
        }
    }

    let n = states.len();
    let mut rec: Vec<f64> = (0..n)
        .map(|x| {
            (0..l)
                .filter_map(|j| {
                    let s = dec.components[j][0];
                    let path = if s == x { Some(0.0) } else { dec.mane.get(s, x) };
                    match (v[j], path) {
                        (Some(a), Some(b)) => Some(a + b),
                        _ => None,
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let anchor = states.iter().position(|w| w.0.iter().all(|&s| s == 0)).unwrap_or(0);
    let shift = rec[anchor];
    for r in &mut rec {
        *r -= shift;
    }
    rec
}

/// Equilibrium masses of the given cylinders at inverse temperature `beta`.
pub fn limit_measure_estimate(
    a: &LocallyConstantPotential,
    beta: f64,
    words: &[Word],
    tol: f64,
) -> Result<Vec<(Word, f64)>> {
    let p = perron(a, beta, tol)?;
    Ok(words.iter().map(|w| (w.clone(), p.cylinder_mass(&w.0))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{lc1, lc2, zero_potential};
    use crate::spectral::DEFAULT_TOL;
    use crate::symbolic::full_shift;

    #[test]
    fn lc1_gamma() {
        let est = estimate_gamma(&lc1(), &default_beta_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(est.gamma_maxplus, -1.0);
        assert_eq!(est.h, 0.0);
        for (b, g) in est.beta_grid.iter().zip(&est.gamma_hat) {
            let exact = (-b).exp().ln_1p().ln() / b;
            assert!((g - exact).abs() <= 1e-12 * exact.abs());
        }
        assert!((est.gamma_hat.last().unwrap() + 1.0).abs() < 0.05);
        assert!(est.convergence_fit().holds);
    }

    #[test]
    fn lc2_gamma() {
        let est = estimate_gamma(&lc2(), &default_beta_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(est.gamma_maxplus, -1.5);
        assert!((est.gamma_hat.last().unwrap() + 1.5).abs() < 0.05);
    }

    #[test]
    fn zero_potential_has_no_excess() {
        let a = zero_potential(full_shift(1, 0.5).unwrap());
        assert_eq!(
            estimate_gamma(&a, &[1.0, 2.0], DEFAULT_TOL),
            Err(Error::NonPositiveExcess(1.0))
        );
    }

    #[test]
    fn grid_is_validated() {
        assert!(estimate_gamma(&lc1(), &[2.0, 2.0], DEFAULT_TOL).is_err());
        assert!(estimate_gamma(&lc1(), &[], DEFAULT_TOL).is_err());
        assert!(estimate_gamma(&lc1(), &[-1.0], DEFAULT_TOL).is_err());
    }

    #[test]
    fn threaded_matches_sequential() {
        let grid = default_beta_grid();
        let a = estimate_gamma_threaded(&lc2(), &grid, DEFAULT_TOL, 1).unwrap();
        let b = estimate_gamma_threaded(&lc2(), &grid, DEFAULT_TOL, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subaction_examples() {
        let s = estimate_subaction(&lc1(), 7.0, DEFAULT_TOL).unwrap();
        assert!(s.v_hat[1].abs() < 1e-12);
        let s = estimate_subaction(&lc2(), 50.0, DEFAULT_TOL).unwrap();
        assert_eq!(s.v_hat[0], 0.0);
        assert!((s.v_hat[1] - 0.5).abs() < 0.01);
        assert!(s.reconstruction_gap().unwrap() < 0.01);
        let s = estimate_subaction(&lc2(), 200.0, DEFAULT_TOL).unwrap();
        assert!(s.calibration_residual < 0.02);
        let offset = s.eigen.as_ref().unwrap().eigenvectors[0][1].unwrap();
        assert!((s.v_hat[1] - offset).abs() < 0.02);
    }

    #[test]
    fn lc1_measures() {
        let words = [Word(vec![0]), Word(vec![0, 1])];
        let m = limit_measure_estimate(&lc1(), 50.0, &words, DEFAULT_TOL).unwrap();
        assert!((m[0].1 - 0.5).abs() < 1e-6);
        assert!(m[1].1 < 1e-20);
        let z = zero_potential(full_shift(1, 0.5).unwrap());
        let m = limit_measure_estimate(&z, 50.0, &words, DEFAULT_TOL).unwrap();
        assert!((m[1].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u32> = (0..17).collect();
        assert_eq!(par_map(&xs, 4, |x| x * 2), xs.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
