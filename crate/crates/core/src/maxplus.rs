//! Max-plus (tropical) linear algebra over `ℝ ∪ {−∞}`.
//!
//! Entries are `Option<T>` with `None` standing for `−∞`. Two scalar types
//! are supported: `f64` for pipeline use and [`Rational64`] for exact oracle
//! checks.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_rational::Rational64;

use crate::{Error, Result};

/// Scalar usable as a max-plus weight.
pub trait Weight: Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    fn div_len(self, len: usize) -> Self;
    /// Slack used when testing "attains the optimum".
    fn tolerance() -> Self;
    fn to_f64(self) -> f64;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn div_len(self, len: usize) -> Self {
        self / len as f64
    }
    fn tolerance() -> Self {
        1e-9
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Weight for Rational64 {
    fn zero() -> Self {
        Rational64::from_integer(0)
    }
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn div_len(self, len: usize) -> Self {
        self / Rational64::from_integer(len as i64)
    }
    fn tolerance() -> Self {
        Self::zero()
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// `⊕` on extended scalars.
#[inline]
pub fn mp_max<T: Weight>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x >= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `⊗` on extended scalars.
#[inline]
pub fn mp_mul<T: Weight>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

/// Square max-plus matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlusMatrix<T = f64> {
    n: usize,
    entries: Vec<Option<T>>,
}

impl<T: Weight> MaxPlusMatrix<T> {
    pub fn new(n: usize, entries: Vec<Option<T>>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            entries.extend(r.iter().map(|&x| Some(x)));
        }
        Self::new(n, entries)
    }

    /// Tropical identity: 0 on the diagonal, −∞ elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![None; n * n];
        for i in 0..n {
            entries[i * n + i] = Some(T::zero());
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<T>) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[Option<T>] {
        &self.entries
    }

    /// Adds `c` to every finite entry.
    pub fn shifted(&self, c: T) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| e.map(|x| x + c)).collect(),
        }
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            for &j in idx {
                entries.push(self.get(i, j));
            }
        }
        Self {
            n: idx.len(),
            entries,
        }
    }

    /// Rectangular block `rows × cols`, row-major.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Option<T>>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        let mut entries = vec![None; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_none() {
                    continue;
                }
                for j in 0..n {
                    let e = &mut entries[i * n + j];
                    *e = mp_max(*e, mp_mul(a, other.get(k, j)));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// `M⁺ = M ⊕ M² ⊕ …`, i.e. best path weights of length ≥ 1.
    ///
    /// Floyd–Warshall in the max-plus semiring. Only meaningful when no cycle
    /// has positive weight; otherwise the returned diagonal is positive.
    pub fn plus_closure(&self) -> Self {
        let n = self.n;
        let mut d = self.entries.clone();
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik.is_none() {
                    continue;
                }
                for j in 0..n {
                    let via = mp_mul(dik, d[k * n + j]);
                    d[i * n + j] = mp_max(d[i * n + j], via);
                }
            }
        }
        Self { n, entries: d }
    }

    /// `M* = I ⊕ M⁺`.
    pub fn star_closure(&self) -> Self {
        let mut s = self.plus_closure();
        for i in 0..self.n {
            let d = s.get(i, i);
            s.set(i, i, mp_max(d, Some(T::zero())));
        }
        s
    }
}

/// `(M ⊗ v)_i = max_j (M_ij + v_j)`.
pub fn mp_apply<T: Weight>(m: &MaxPlusMatrix<T>, v: &[Option<T>]) -> Result<Vec<Option<T>>> {
    if v.len() != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            got: v.len(),
        });
    }
    Ok((0..m.n)
        .map(|i| {
            (0..m.n).fold(None, |acc, j| mp_max(acc, mp_mul(m.get(i, j), v[j])))
        })
        .collect())
}

/// Maximum cycle mean, by Karp's recurrence adapted to maximisation.
///
/// `D_k(v)` is the best weight of a walk of exactly `k` edges ending at `v`
/// (starting anywhere), and the maximum cycle mean is
/// `max_v min_{k<n} (D_n(v) − D_k(v)) / (n − k)`.
pub fn mp_eigenvalue<T: Weight>(m: &MaxPlusMatrix<T>) -> Result<T> {
    let n = m.n;
    if n == 0 {
        return Err(Error::NoEigenvalue);
    }
    let mut table: Vec<Vec<Option<T>>> = Vec::with_capacity(n + 1);
    table.push(vec![Some(T::zero()); n]);
    for k in 0..n {
        let prev = &table[k];
        let next = (0..n)
            .map(|v| {
                (0..n).fold(None, |acc, u| mp_max(acc, mp_mul(prev[u], m.get(u, v))))
            })
            .collect();
        table.push(next);
    }
    let mut best: Option<T> = None;
    for v in 0..n {
        let Some(dn) = table[n][v] else { continue };
        let mut worst: Option<T> = None;
        for (k, row) in table.iter().enumerate().take(n) {
            if let Some(dk) = row[v] {
                let mean = (dn - dk).div_len(n - k);
                worst = Some(match worst {
                    Some(w) if w <= mean => w,
                    _ => mean,
                });
            }
        }
        best = mp_max(best, worst);
    }
    best.ok_or(Error::NoEigenvalue)
}

/// Eigen-structure of an irreducible max-plus matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlusEigenData<T = f64> {
    pub eigenvalue: T,
    /// One vector per critical class, first finite component pinned to 0.
    pub eigenvectors: Vec<Vec<Option<T>>>,
    pub critical_nodes: Vec<usize>,
    /// Critical classes (strongly connected components of the critical graph).
    pub critical_classes: Vec<Vec<usize>>,
    pub eigenspace_dim: usize,
}

/// Eigenvalue, critical graph and a basis of the eigenspace.
///
/// The eigenvectors are the columns of `(M − λ)*` at critical nodes, one per
/// critical class.
pub fn mp_eigenvectors<T: Weight>(m: &MaxPlusMatrix<T>) -> Result<MaxPlusEigenData<T>> {
    let lambda = mp_eigenvalue(m)?;
    let b = m.shifted(T::zero() - lambda);
    let plus = b.plus_closure();
    let tol = T::tolerance();
    let neg_tol = T::zero() - tol;
    let n = m.n;

    let critical_nodes: Vec<usize> = (0..n)
        .filter(|&i| plus.get(i, i).is_some_and(|d| d >= neg_tol))
        .collect();

    // two critical nodes share a class iff they lie on a common critical cycle
    let mut critical_classes: Vec<Vec<usize>> = Vec::new();
    for &i in &critical_nodes {
        let joined = critical_classes.iter_mut().find(|class| {
            let r = class[0];
            mp_mul(plus.get(i, r), plus.get(r, i)).is_some_and(|w| w >= neg_tol)
        });
        match joined {
            Some(class) => class.push(i),
            None => critical_classes.push(vec![i]),
        }
    }

    let star = b.star_closure();
    let eigenvectors = critical_classes
        .iter()
        .map(|class| {
            let col: Vec<Option<T>> = (0..n).map(|i| star.get(i, class[0])).collect();
            pin_first(col)
        })
        .collect::<Vec<_>>();

    Ok(MaxPlusEigenData {
        eigenvalue: lambda,
        eigenspace_dim: eigenvectors.len(),
        eigenvectors,
        critical_nodes,
        critical_classes,
    })
}

fn pin_first<T: Weight>(v: Vec<Option<T>>) -> Vec<Option<T>> {
    match v.iter().find_map(|x| *x) {
        Some(c) => v.into_iter().map(|x| x.map(|y| y - c)).collect(),
        None => v,
    }
}

/// Closed-form eigen-data of the 2×2 matrix
/// `[[a+b+d, c+d], [a+b, b+c+d]]`.
///
/// Returns `(λ, y − x)` for the eigenvector `(x, y)`, where
/// `λ = max{a+b+d, b+c+d, (a+b+c+d)/2}`. Each attained branch determines the
/// offset (`−d`, `b`, or `(a+b−c−d)/2`); attained branches must agree.
pub fn mp_2x2_closed_form(a: f64, b: f64, c: f64, d: f64) -> Result<(f64, f64)> {
    let branches = [
        (a + b + d, -d),
        (b + c + d, b),
        ((a + b + c + d) / 2.0, (a + b - c - d) / 2.0),
    ];
    let lambda = branches.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + a.abs() + b.abs() + c.abs() + d.abs();
    let mut offset: Option<f64> = None;
    for &(value, off) in &branches {
        if lambda - value <= 1e-12 * scale {
            match offset {
                None => offset = Some(off),
                Some(o) if (o - off).abs() <= 1e-9 * scale => {}
                Some(o) => return Err(Error::InconsistentTie(o, off)),
            }
        }
    }
    Ok((lambda, offset.expect("the maximum is attained by some branch")))
}

/// Recovers `(a, b, c, d)` from a 2×2 matrix in the layout used by
/// [`mp_2x2_closed_form`].
pub fn abcd_from_2x2(m: [[f64; 2]; 2]) -> (f64, f64, f64, f64) {
    let d = m[0][0] - m[1][0];
    let b = m[1][1] - m[0][1];
    let a = m[1][0] - b;
    let c = m[0][1] - d;
    (a, b, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> MaxPlusMatrix {
        MaxPlusMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn fin(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    #[test]
    fn apply_examples() {
        let v = fin(&[3.0, -1.0, 2.5]);
        assert_eq!(mp_apply(&MaxPlusMatrix::identity(3), &v).unwrap(), v);
        let a = m(&[&[-2.0, -1.0], &[-1.0, -2.0]]);
        assert_eq!(mp_apply(&a, &fin(&[0.0, 0.0])).unwrap(), fin(&[-1.0, -1.0]));
        let c = m(&[&[-3.0, -2.0], &[-1.0, -3.0]]);
        assert_eq!(mp_apply(&c, &fin(&[0.0, 0.5])).unwrap(), fin(&[-1.5, -1.0]));
        assert!(matches!(
            mp_apply(&c, &fin(&[0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(mp_eigenvalue(&m(&[&[-2.0, -1.0], &[-1.0, -2.0]])).unwrap(), -1.0);
        assert_eq!(mp_eigenvalue(&m(&[&[-3.0, -2.0], &[-1.0, -3.0]])).unwrap(), -1.5);
        let c = m(&[&[-0.7; 3], &[-0.7; 3], &[-0.7; 3]]);
        assert!((mp_eigenvalue(&c).unwrap() + 0.7).abs() < 1e-15);
    }

    #[test]
    fn acyclic_has_no_eigenvalue() {
        let mut a = MaxPlusMatrix::<f64>::new(2, vec![None; 4]).unwrap();
        a.set(0, 1, Some(-1.0));
        assert_eq!(mp_eigenvalue(&a), Err(Error::NoEigenvalue));
        assert!(mp_eigenvectors(&a).is_err());
    }

    #[test]
    fn eigenvector_examples() {
        let e = mp_eigenvectors(&m(&[&[-2.0, -1.0], &[-1.0, -2.0]])).unwrap();
        assert_eq!(e.eigenvalue, -1.0);
        assert_eq!(e.eigenvectors, vec![fin(&[0.0, 0.0])]);

        let e = mp_eigenvectors(&m(&[&[-3.0, -2.0], &[-1.0, -3.0]])).unwrap();
        assert_eq!(e.eigenspace_dim, 1);
        assert_eq!(e.eigenvectors, vec![fin(&[0.0, 0.5])]);

        let e = mp_eigenvectors(&m(&[&[0.0, -5.0], &[-5.0, 0.0]])).unwrap();
        assert_eq!(e.eigenvalue, 0.0);
        assert_eq!(e.eigenspace_dim, 2);
        // (0, −5) and (−5, 0), pinned on the first coordinate
        assert_eq!(e.eigenvectors, vec![fin(&[0.0, -5.0]), fin(&[0.0, 5.0])]);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(mp_2x2_closed_form(0.0, -1.0, 0.0, -1.0).unwrap(), (-1.0, 0.0));
        assert_eq!(mp_2x2_closed_form(0.0, -1.0, 0.0, -2.0).unwrap(), (-1.5, 0.5));
        // two attained branches, both give offset 1
        let (l, off) = mp_2x2_closed_form(-1.0, -1.0, -3.0, -1.0).unwrap();
        assert_eq!((l, off), (-3.0, 1.0));
        let mat = m(&[&[-3.0, -4.0], &[-2.0, -5.0]]);
        let e = mp_eigenvectors(&mat).unwrap();
        assert_eq!(e.eigenvalue, -3.0);
        assert_eq!(e.eigenvectors[0][1].unwrap() - e.eigenvectors[0][0].unwrap(), 1.0);
    }

    #[test]
    fn inconsistent_tie_is_reported() {
        // a = c with b + d > 0: both self-loops critical, eigenspace of dim 2
        let r = mp_2x2_closed_form(0.0, 1.0, 0.0, 1.0);
        assert!(matches!(r, Err(Error::InconsistentTie(_, _))));
        let (a, b, c, d) = (0.0, 1.0, 0.0, 1.0);
        let mat = m(&[&[a + b + d, c + d], &[a + b, b + c + d]]);
        assert_eq!(mp_eigenvectors(&mat).unwrap().eigenspace_dim, 2);
    }

    #[test]
    fn abcd_roundtrip() {
        let (a, b, c, d) = (-0.3, -1.2, -2.5, -0.4);
        let mat = [[a + b + d, c + d], [a + b, b + c + d]];
        let (a2, b2, c2, d2) = abcd_from_2x2(mat);
        for (x, y) in [(a, a2), (b, b2), (c, c2), (d, d2)] {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn rational_mode_is_exact() {
        let r = |x: i64| Rational64::from_integer(x);
        let mat = MaxPlusMatrix::from_rows(&[vec![r(-3), r(-2)], vec![r(-1), r(-3)]]).unwrap();
        let e = mp_eigenvectors(&mat).unwrap();
        assert_eq!(e.eigenvalue, Rational64::new(-3, 2));
        assert_eq!(e.eigenvectors[0], vec![Some(r(0)), Some(Rational64::new(1, 2))]);
    }

    fn arb_matrix() -> impl Strategy<Value = MaxPlusMatrix> {
        (1usize..=5).prop_flat_map(|n| {
            proptest::collection::vec(-9.0f64..0.0, n * n).prop_map(move |v| {
                MaxPlusMatrix::new(n, v.into_iter().map(Some).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn eigen_identity(mat in arb_matrix()) {
            let e = mp_eigenvectors(&mat).unwrap();
            prop_assert!(e.eigenspace_dim >= 1);
            for v in &e.eigenvectors {
                let lhs = mp_apply(&mat, v).unwrap();
                for (l, x) in lhs.iter().zip(v) {
                    prop_assert!((l.unwrap() - (e.eigenvalue + x.unwrap())).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn tropical_homogeneity(mat in arb_matrix(), c in -5.0f64..5.0) {
            let e = mp_eigenvectors(&mat).unwrap();
            let s = mp_eigenvectors(&mat.shifted(c)).unwrap();
            prop_assert!((s.eigenvalue - e.eigenvalue - c).abs() < 1e-12);
            prop_assert_eq!(s.eigenspace_dim, e.eigenspace_dim);
            for (u, v) in s.eigenvectors.iter().zip(&e.eigenvectors) {
                for (x, y) in u.iter().zip(v) {
                    prop_assert!((x.unwrap() - y.unwrap()).abs() < 1e-12);
                }
            }
        }
    }
}
