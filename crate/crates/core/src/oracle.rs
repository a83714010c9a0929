//! Independent reference computations used by tests and verification suites.

use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::maxplus::{MaxPlusMatrix, Weight};

/// Maximum cycle mean by enumerating every simple cycle.
///
/// Exponential in `n`; intended for `n ≤ 7`. Returns `None` if the matrix has
/// no finite cycle.
pub fn brute_force_cycle_mean<T: Weight>(m: &MaxPlusMatrix<T>) -> Option<T> {
    let n = m.dim();
    let mut best: Option<T> = None;
    let mut on_path = vec![false; n];
    // each simple cycle is enumerated once, from its least node
    for start in 0..n {
        on_path[start] = true;
        walk(m, start, start, T::zero(), 1, &mut on_path, &mut best);
        on_path[start] = false;
    }
    best
}

fn walk<T: Weight>(
    m: &MaxPlusMatrix<T>,
    start: usize,
    at: usize,
    weight: T,
    len: usize,
    on_path: &mut [bool],
    best: &mut Option<T>,
) {
    for next in start..m.dim() {
        let Some(w) = m.get(at, next) else { continue };
        if next == start {
            let mean = (weight + w).div_len(len);
            if best.is_none_or(|b| mean > b) {
                *best = Some(mean);
            }
        } else if !on_path[next] {
            on_path[next] = true;
            walk(m, start, next, weight + w, len + 1, on_path, best);
            on_path[next] = false;
        }
    }
}

/// Deterministic generator for oracle inputs.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `n × n` matrix with integer entries in `[lo, hi]`; each entry is
/// `−∞` with probability `p_missing`.
pub fn random_integer_matrix(
    rng: &mut impl Rng,
    n: usize,
    lo: i64,
    hi: i64,
    p_missing: f64,
) -> MaxPlusMatrix<Rational64> {
    let entries = (0..n * n)
        .map(|_| {
            if rng.gen_bool(p_missing) {
                None
            } else {
                Some(Rational64::from_integer(rng.gen_range(lo..=hi)))
            }
        })
        .collect();
    MaxPlusMatrix::new(n, entries).expect("sized correctly")
}

/// Converts an exact matrix to floating point.
pub fn to_f64_matrix(m: &MaxPlusMatrix<Rational64>) -> MaxPlusMatrix<f64> {
    let entries = m.entries().iter().map(|e| e.map(|x| x.to_f64())).collect();
    MaxPlusMatrix::new(m.dim(), entries).expect("same size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_cycles() {
        let m = MaxPlusMatrix::from_rows(&[vec![-2.0, -1.0], vec![-1.0, -2.0]]).unwrap();
        assert_eq!(brute_force_cycle_mean(&m), Some(-1.0));
        let m = MaxPlusMatrix::from_rows(&[vec![-3.0, -2.0], vec![-1.0, -3.0]]).unwrap();
        assert_eq!(brute_force_cycle_mean(&m), Some(-1.5));
    }

    #[test]
    fn acyclic_is_none() {
        let mut m = MaxPlusMatrix::<f64>::new(3, vec![None; 9]).unwrap();
        m.set(0, 1, Some(0.0));
        m.set(1, 2, Some(0.0));
        assert_eq!(brute_force_cycle_mean(&m), None);
    }

    #[test]
    fn generator_is_reproducible() {
        let a = random_integer_matrix(&mut rng(7), 4, -9, 0, 0.2);
        let b = random_integer_matrix(&mut rng(7), 4, -9, 0, 0.2);
        assert_eq!(a, b);
    }
}
