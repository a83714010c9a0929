//! Subshifts of finite type, finite words and eventually periodic points.

use std::fmt;

use crate::{Error, Result};

/// One-sided subshift of finite type over the alphabet `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sft {
    alphabet_size: usize,
    transitions: Vec<bool>,
    theta: f64,
}

impl Sft {
    /// Builds a shift from its 0/1 transition matrix; entry `(i, j)` allows
    /// `j` to follow `i`.
    pub fn new(transitions: Vec<Vec<bool>>, theta: f64) -> Result<Self> {
        let n = transitions.len();
        if n == 0 || n > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "alphabet size must be in 1..=255, got {n}"
            )));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &transitions {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        for i in 0..n {
            let out = (0..n).any(|j| flat[i * n + j]);
            let inc = (0..n).any(|j| flat[j * n + i]);
            if !out || !inc {
                return Err(Error::DeadSymbol(i));
            }
        }
        Ok(Self {
            alphabet_size: n,
            transitions: flat,
            theta,
        })
    }

    /// Verifies aperiodicity and returns the shift unchanged.
    pub fn assert_aperiodic(self) -> Result<Self> {
        if self.is_aperiodic() {
            Ok(self)
        } else {
            Err(Error::NotAperiodic(self.alphabet_size * self.alphabet_size))
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn allowed(&self, from: u8, to: u8) -> bool {
        let n = self.alphabet_size;
        let (i, j) = (from as usize, to as usize);
        i < n && j < n && self.transitions[i * n + j]
    }

    pub fn is_admissible(&self, symbols: &[u8]) -> bool {
        symbols.iter().all(|&s| (s as usize) < self.alphabet_size)
            && symbols.windows(2).all(|w| self.allowed(w[0], w[1]))
    }

    /// Some power `T^p`, `p ≤ n²`, of the transition matrix is entrywise
    /// positive.
    pub fn is_aperiodic(&self) -> bool {
        let n = self.alphabet_size;
        let mut power = self.transitions.clone();
        for _ in 0..n * n {
            if power.iter().all(|&b| b) {
                return true;
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if power[i * n + k] {
                        for j in 0..n {
                            next[i * n + j] |= self.transitions[k * n + j];
                        }
                    }
                }
            }
            power = next;
        }
        power.iter().all(|&b| b)
    }

    /// All admissible words of the given length, lexicographically ordered.
    ///
    /// This order is the state indexing used by every transfer matrix.
    pub fn enumerate_words(&self, length: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if length == 0 {
            out.push(Word(Vec::new()));
            return out;
        }
        let mut stack = Vec::with_capacity(length);
        self.extend_words(&mut stack, length, &mut out);
        out
    }

    fn extend_words(&self, prefix: &mut Vec<u8>, length: usize, out: &mut Vec<Word>) {
        if prefix.len() == length {
            out.push(Word(prefix.clone()));
            return;
        }
        for s in 0..self.alphabet_size as u8 {
            if prefix.last().is_none_or(|&p| self.allowed(p, s)) {
                prefix.push(s);
                self.extend_words(prefix, length, out);
                prefix.pop();
            }
        }
    }

    /// `θ^{min{i : x_i ≠ y_i}}`, and 0 when the points coincide.
    pub fn distance(&self, x: &MarkedPoint, y: &MarkedPoint) -> f64 {
        match x.first_difference(y) {
            Some(i) => self.theta.powi(i as i32),
            None => 0.0,
        }
    }
}

/// Full shift on `d + 1` symbols.
pub fn full_shift(d: usize, theta: f64) -> Result<Sft> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    Sft::new(vec![vec![true; d + 1]; d + 1], theta)
}

/// Golden-mean shift: two symbols, `11` forbidden.
pub fn golden_mean(theta: f64) -> Result<Sft> {
    Sft::new(vec![vec![true, true], vec![true, false]], theta)
}

/// Finite word over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    /// Checked constructor.
    pub fn new(sft: &Sft, symbols: Vec<u8>) -> Result<Self> {
        if sft.is_admissible(&symbols) {
            Ok(Self(symbols))
        } else {
            Err(Error::InadmissibleWord(symbols))
        }
    }

    /// Parses a digit string such as `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidParameter(format!("bad symbol {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `s` repeated `n` times.
    pub fn repeat(s: u8, n: usize) -> Self {
        Self(vec![s; n])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl From<&[u8]> for Word {
    fn from(s: &[u8]) -> Self {
        Word(s.to_vec())
    }
}

/// How a [`MarkedPoint`] was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    FixedPoint,
    Preperiodic,
    CylinderRepresentative,
}

/// Eventually fixed point `prefix · tail^∞`.
///
/// Stored in canonical form: trailing prefix symbols equal to the tail are
/// absorbed, so structural equality is equality of points.
#[derive(Debug, Clone)]
pub struct MarkedPoint {
    kind: PointKind,
    prefix: Vec<u8>,
    tail: u8,
}

impl PartialEq for MarkedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.prefix == other.prefix && self.tail == other.tail
    }
}

impl Eq for MarkedPoint {}

impl MarkedPoint {
    /// `i^∞`.
    pub fn fixed(sft: &Sft, i: u8) -> Result<Self> {
        Self::build(sft, PointKind::FixedPoint, Vec::new(), i)
    }

    /// `w · i^∞`.
    pub fn preperiodic(sft: &Sft, word: &[u8], i: u8) -> Result<Self> {
        Self::build(sft, PointKind::Preperiodic, word.to_vec(), i)
    }

    /// A point of the cylinder `[w]`: `w` followed by the least symbol that
    /// can follow it and repeat forever.
    pub fn cylinder_representative(sft: &Sft, word: &[u8]) -> Result<Self> {
        let last = *word
            .last()
            .ok_or_else(|| Error::InvalidParameter("empty cylinder word".into()))?;
        let tail = (0..sft.alphabet_size() as u8)
            .find(|&t| sft.allowed(last, t) && sft.allowed(t, t))
            .or_else(|| sft.allowed(last, last).then_some(last))
            .ok_or_else(|| Error::InadmissibleWord(word.to_vec()))?;
        Self::build(sft, PointKind::CylinderRepresentative, word.to_vec(), tail)
    }

    fn build(sft: &Sft, kind: PointKind, mut prefix: Vec<u8>, tail: u8) -> Result<Self> {
        let mut full = prefix.clone();
        full.push(tail);
        full.push(tail);
        if !sft.is_admissible(&full) {
            return Err(Error::InadmissibleWord(full));
        }
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Ok(Self { kind, prefix, tail })
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> u8 {
        self.tail
    }

    /// The `i`-th coordinate.
    pub fn symbol(&self, i: usize) -> u8 {
        self.prefix.get(i).copied().unwrap_or(self.tail)
    }

    /// The first `n` coordinates.
    pub fn expand(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    fn first_difference(&self, other: &Self) -> Option<usize> {
        let horizon = self.prefix.len().max(other.prefix.len()) + 1;
        (0..horizon).find(|&i| self.symbol(i) != other.symbol(i))
    }
}

impl fmt::Display for MarkedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.prefix {
            write!(f, "{s}")?;
        }
        write!(f, "({})^inf", self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(sft: &Sft, len: usize) -> Vec<String> {
        sft.enumerate_words(len).iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn full_shift_has_all_transitions() {
        let s = full_shift(1, 0.5).unwrap();
        assert_eq!(s.alphabet_size(), 2);
        assert!((0..2).all(|i| (0..2).all(|j| s.allowed(i, j))));
        let s = full_shift(2, 0.5).unwrap();
        assert_eq!(s.alphabet_size(), 3);
        assert_eq!(words(&s, 2).len(), 9);
    }

    #[test]
    fn theta_out_of_range_rejected() {
        assert!(matches!(full_shift(1, 1.5), Err(Error::InvalidParameter(_))));
        assert!(full_shift(1, 0.0).is_err());
        assert!(full_shift(0, 0.5).is_err());
    }

    #[test]
    fn dead_symbol_rejected() {
        let t = vec![vec![true, false], vec![false, false]];
        assert_eq!(Sft::new(t, 0.5), Err(Error::DeadSymbol(1)));
    }

    #[test]
    fn aperiodicity() {
        assert!(golden_mean(0.5).unwrap().is_aperiodic());
        let flip = Sft::new(vec![vec![false, true], vec![true, false]], 0.5).unwrap();
        assert!(!flip.is_aperiodic());
        assert!(matches!(flip.assert_aperiodic(), Err(Error::NotAperiodic(_))));
    }

    #[test]
    fn enumeration_examples() {
        let s = full_shift(1, 0.5).unwrap();
        assert_eq!(words(&s, 2), ["00", "01", "10", "11"]);
        assert_eq!(words(&s, 1), ["0", "1"]);
        let g = golden_mean(0.5).unwrap();
        assert_eq!(words(&g, 2), ["00", "01", "10"]);
    }

    #[test]
    fn distance_examples() {
        let s = full_shift(1, 0.5).unwrap();
        let zero = MarkedPoint::fixed(&s, 0).unwrap();
        let one_zero = MarkedPoint::preperiodic(&s, &[1], 0).unwrap();
        assert_eq!(s.distance(&zero, &one_zero), 1.0);
        for n in 0..12 {
            let p = MarkedPoint::preperiodic(&s, &vec![0; n], 1).unwrap();
            assert_eq!(s.distance(&zero, &p), 0.5f64.powi(n as i32));
        }
        assert_eq!(s.distance(&zero, &zero), 0.0);
        // 0·1·1^∞ is 01^∞
        let a = MarkedPoint::preperiodic(&s, &[0, 1], 1).unwrap();
        let b = MarkedPoint::preperiodic(&s, &[0], 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(s.distance(&a, &b), 0.0);
    }

    #[test]
    fn marked_point_must_be_legal() {
        let g = golden_mean(0.5).unwrap();
        assert!(MarkedPoint::fixed(&g, 1).is_err());
        assert!(MarkedPoint::preperiodic(&g, &[1], 0).is_ok());
        let rep = MarkedPoint::cylinder_representative(&g, &[0, 1]).unwrap();
        assert_eq!(rep.expand(4), vec![0, 1, 0, 0]);
        assert_eq!(rep.kind(), PointKind::CylinderRepresentative);
    }

    fn transition_power_sum(s: &Sft, p: usize) -> usize {
        let n = s.alphabet_size();
        let mut v = vec![1usize; n];
        for _ in 0..p {
            v = (0..n)
                .map(|i| (0..n).filter(|&j| s.allowed(i as u8, j as u8)).map(|j| v[j]).sum())
                .collect();
        }
        v.iter().sum()
    }

    fn arb_sft() -> impl Strategy<Value = Sft> {
        (2usize..=4)
            .prop_flat_map(|n| proptest::collection::vec(proptest::bool::weighted(0.7), n * n))
            .prop_filter_map("dead symbol", |flat| {
                let n = (flat.len() as f64).sqrt() as usize;
                let rows = flat.chunks(n).map(|r| r.to_vec()).collect();
                Sft::new(rows, 0.5).ok()
            })
    }

    fn arb_point(n: u8) -> impl Strategy<Value = (Vec<u8>, u8)> {
        (proptest::collection::vec(0..n, 0..5), 0..n)
    }

    proptest! {
        #[test]
        fn word_count_matches_matrix_power(s in arb_sft(), len in 1usize..6) {
            prop_assert_eq!(s.enumerate_words(len).len(), transition_power_sum(&s, len - 1));
            let ws = s.enumerate_words(len);
            prop_assert!(ws.windows(2).all(|p| p[0] < p[1]));
        }

        #[test]
        fn distance_is_an_ultrametric(
            x in arb_point(2), y in arb_point(2), z in arb_point(2)
        ) {
            let s = full_shift(1, 0.5).unwrap();
            let p = |(w, t): &(Vec<u8>, u8)| MarkedPoint::preperiodic(&s, w, *t).unwrap();
            let (x, y, z) = (p(&x), p(&y), p(&z));
            prop_assert_eq!(s.distance(&x, &y), s.distance(&y, &x));
            prop_assert!(s.distance(&x, &z) <= s.distance(&x, &y).max(s.distance(&y, &z)));
            prop_assert_eq!(s.distance(&x, &y) == 0.0, x == y);
            prop_assert_eq!(s.distance(&x, &y) == 0.0, x.expand(12) == y.expand(12));
        }
    }
}
