//! Mañé potential, Aubry set and inter-component costs on the word graph.
//!
//! The word graph of a potential of depth `k` has the admissible `k`-words as
//! nodes (`k ≥ 1`) and an edge `z → x` of weight `A(a·x)` whenever the
//! `(k + 1)`-word `a·x` is admissible and starts with `z`; it follows the
//! shift map. Path weights are Birkhoff sums, so for cylinder-level points
//! the Mañé potential is a maximum-weight path.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::maxplus::{mp_eigenvalue, MaxPlusMatrix};
use crate::spectral::{log_perron, LocallyConstantPotential, LogMatrix, DEFAULT_TOL};
use crate::symbolic::Word;
use crate::{Error, Result};

const CRITICAL_TOL: f64 = 1e-12;

/// Weighted graph of `k`-words following the shift.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    pub nodes: Vec<Word>,
    /// `weights[(u, v)]` is the weight of `u → v`, `None` if absent.
    pub weights: MaxPlusMatrix<f64>,
}

impl WordGraph {
    pub fn from_potential(a: &LocallyConstantPotential) -> Self {
        let nodes = a.states();
        let n = nodes.len();
        let k = a.state_len();
        let mut weights = MaxPlusMatrix::new(n, vec![None; n * n]).expect("square");
        for (x_idx, x) in nodes.iter().enumerate() {
            for s in 0..a.sft().alphabet_size() as u8 {
                if !a.sft().allowed(s, x.0[0]) {
                    continue;
                }
                let mut ax = vec![s];
                ax.extend_from_slice(&x.0);
                let z = nodes
                    .binary_search(&Word(ax[..k].to_vec()))
                    .expect("prefix of an admissible word is admissible");
                weights.set(z, x_idx, a.edge_value(&ax));
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, w: &[u8]) -> Option<usize> {
        self.nodes.iter().position(|n| n.0 == w)
    }

    /// Maximal cycle mean, i.e. the maximal ergodic average `m(A)`.
    pub fn max_cycle_mean(&self) -> Result<f64> {
        mp_eigenvalue(&self.weights)
    }

    /// Maximum path weights (length ≥ 1) between all pairs.
    ///
    /// Fails with [`Error::PositiveCycle`] if some cycle has positive weight.
    pub fn mane_matrix(&self) -> Result<MaxPlusMatrix<f64>> {
        let plus = self.weights.plus_closure();
        for i in 0..self.len() {
            if let Some(d) = plus.get(i, i) {
                if d > CRITICAL_TOL {
                    return Err(Error::PositiveCycle(self.max_cycle_mean().unwrap_or(d)));
                }
            }
        }
        Ok(plus)
    }
}

/// `S(u, v)`: maximum weight of a path of length ≥ 1 from `u` to `v`,
/// `−∞` if `v` is unreachable.
pub fn mane_potential(g: &WordGraph, u: usize, v: usize) -> Result<f64> {
    Ok(g.mane_matrix()?.get(u, v).unwrap_or(f64::NEG_INFINITY))
}

/// Whether `S(u, v) + S(v, u) = 0` within `1e−12`.
pub fn symmetrized_mane_check(g: &WordGraph, u: usize, v: usize) -> Result<bool> {
    let s = g.mane_matrix()?;
    Ok(match (s.get(u, v), s.get(v, u)) {
        (Some(x), Some(y)) => (x + y).abs() <= CRITICAL_TOL,
        _ => false,
    })
}

/// Components of the Aubry set and the costs of moving between them.
#[derive(Debug, Clone, PartialEq)]
pub struct AubryDecomposition {
    /// Node indices of each component, sorted; components ordered by least node.
    pub components: Vec<Vec<usize>>,
    pub entropies: Vec<f64>,
    /// Components of maximal entropy.
    pub maximal_set: Vec<usize>,
    /// `a_ij` over all components. Empty when every edge is critical.
    pub cost: MaxPlusMatrix<f64>,
    /// Non-critical edges from a component into itself; they enter the cost
    /// diagonal.
    pub flagged_edges: Vec<(usize, usize)>,
    /// Mañé potential, all pairs.
    pub mane: MaxPlusMatrix<f64>,
    critical: Vec<bool>,
}

impl AubryDecomposition {
    pub fn h(&self) -> f64 {
        self.entropies[self.maximal_set[0]]
    }

    pub fn is_critical(&self, u: usize, v: usize) -> bool {
        self.critical[u * self.mane.dim() + v]
    }

    pub fn component_of(&self, node: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&node))
    }

    /// Cost matrix restricted to the components of maximal entropy.
    pub fn restricted_cost(&self) -> MaxPlusMatrix<f64> {
        if self.cost.dim() == 0 {
            return self.cost.clone();
        }
        self.cost.submatrix(&self.maximal_set)
    }
}

/// Critical graph, its strongly connected components, their entropies and
/// the cost matrix `a_ij = max [A(u→v) + S(s_j, u)]` over edges entering
/// `Σ_i` (critical edges inside `Σ_i` excluded), `s_j` the least node of `Σ_j`.
pub fn decompose_aubry(g: &WordGraph) -> Result<AubryDecomposition> {
    let n = g.len();
    let mane = g.mane_matrix()?;
    let star = |u: usize, v: usize| -> Option<f64> {
        if u == v {
            Some(mane.get(u, v).map_or(0.0, |d| d.max(0.0)))
        } else {
            mane.get(u, v)
        }
    };

    let mut critical = vec![false; n * n];
    let mut crit_graph = DiGraph::<usize, ()>::new();
    let ids: Vec<_> = (0..n).map(|i| crit_graph.add_node(i)).collect();
    let mut on_cycle = vec![false; n];
    for u in 0..n {
        for v in 0..n {
            let (Some(w), Some(back)) = (g.weights.get(u, v), star(v, u)) else {
                continue;
            };
            if w + back >= -CRITICAL_TOL {
                critical[u * n + v] = true;
                on_cycle[u] = true;
                crit_graph.add_edge(ids[u], ids[v], ());
            }
        }
    }

    let mut components: Vec<Vec<usize>> = tarjan_scc(&crit_graph)
        .into_iter()
        .map(|scc| {
            let mut c: Vec<usize> = scc.into_iter().map(|id| crit_graph[id]).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| on_cycle[c[0]])
        .collect();
    if components.is_empty() {
        return Err(Error::EmptyAubrySet);
    }
    components.sort_unstable_by_key(|c| c[0]);

    let entropies = components
        .iter()
        .map(|c| component_entropy(c, &critical, n))
        .collect::<Result<Vec<_>>>()?;
    let h = entropies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximal_set = (0..components.len())
        .filter(|&i| entropies[i] >= h - CRITICAL_TOL)
        .collect();

    let mut flagged_edges = Vec::new();
    let all_critical = (0..n * n).all(|e| g.weights.entries()[e].is_none() || critical[e]);
    let l = if all_critical { 0 } else { components.len() };
    let mut cost = MaxPlusMatrix::new(l, vec![None; l * l])?;
    let membership: Vec<Option<usize>> = (0..n)
        .map(|v| components.iter().position(|c| c.binary_search(&v).is_ok()))
        .collect();
    for u in 0..n {
        for v in 0..n {
            let Some(w) = g.weights.get(u, v) else { continue };
            let Some(i) = membership[v] else { continue };
            if membership[u] == Some(i) {
                if critical[u * n + v] {
                    continue;
                }
                flagged_edges.push((u, v));
            }
            for j in 0..l {
                if let Some(s) = star(components[j][0], u) {
                    let cur = cost.get(i, j);
                    if cur.is_none_or(|c| w + s > c) {
                        cost.set(i, j, Some(w + s));
                    }
                }
            }
        }
    }

    Ok(AubryDecomposition {
        components,
        entropies,
        maximal_set,
        cost,
        flagged_edges,
        mane,
        critical,
    })
}

/// Log of the Perron root of the critical 0/1 adjacency on `comp`.
fn component_entropy(comp: &[usize], critical: &[bool], n: usize) -> Result<f64> {
    let m = comp.len();
    let mut data = vec![f64::NEG_INFINITY; m * m];
    for (a, &u) in comp.iter().enumerate() {
        for (b, &v) in comp.iter().enumerate() {
            if critical[u * n + v] {
                data[a * m + b] = 0.0;
            }
        }
    }
    Ok(log_perron(&LogMatrix::new(m, data)?, true, DEFAULT_TOL)?.log_rho.max(0.0))
}

/// Checks `a_ij ≤ 0`, `a_ii < 0` and `a_li + a_ij ≤ a_lj` (with `slack`).
///
/// Returns a description of the first violation.
pub fn check_cost_laws(cost: &MaxPlusMatrix<f64>, slack: f64) -> std::result::Result<(), String> {
    let l = cost.dim();
    for i in 0..l {
        for j in 0..l {
            let Some(a) = cost.get(i, j) else {
                return Err(format!("a[{i}][{j}] is -inf"));
            };
            if a > slack {
                return Err(format!("a[{i}][{j}] = {a} > 0"));
            }
            if i == j && a >= 0.0 {
                return Err(format!("a[{i}][{i}] = {a} is not negative"));
            }
        }
    }
    for l_ in 0..l {
        for i in 0..l {
            for j in 0..l {
                let (x, y, z) = (cost.get(l_, i), cost.get(i, j), cost.get(l_, j));
                if let (Some(x), Some(y), Some(z)) = (x, y, z) {
                    if x + y > z + slack {
                        return Err(format!("a[{l_}][{i}] + a[{i}][{j}] = {} > a[{l_}][{j}] = {z}", x + y));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Eigenvalue of `A_KK ⊕ A_KS ⊗ A_SS* ⊗ A_SK`, where `K` is the maximal set
/// and `S` the remaining components: the rate obtained after eliminating the
/// unknowns of the low-entropy components from the full system.
pub fn eliminated_eigenvalue(dec: &AubryDecomposition) -> Result<f64> {
    let big = &dec.maximal_set;
    let small: Vec<usize> = (0..dec.cost.dim()).filter(|i| !big.contains(i)).collect();
    let akk = dec.cost.submatrix(big);
    if small.is_empty() {
        return mp_eigenvalue(&akk);
    }
    let ass_star = dec.cost.submatrix(&small).star_closure();
    let mut schur = akk.clone();
    for (a, &i) in big.iter().enumerate() {
        for (b, &j) in big.iter().enumerate() {
            let mut best = schur.get(a, b);
            for (p, &s) in small.iter().enumerate() {
                for (q, &t) in small.iter().enumerate() {
                    let via = [dec.cost.get(i, s), ass_star.get(p, q), dec.cost.get(t, j)];
                    if let [Some(x), Some(y), Some(z)] = via {
                        best = Some(best.map_or(x + y + z, |c: f64| c.max(x + y + z)));
                    }
                }
            }
            schur.set(a, b, best);
        }
    }
    mp_eigenvalue(&schur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::full_shift;

    fn two_symbol(b: f64, d: f64) -> LocallyConstantPotential {
        LocallyConstantPotential::from_fn(full_shift(1, 0.5).unwrap(), 1, |w| match w {
            [0, 1] => b,
            [1, 0] => d,
            _ => 0.0,
        })
        .unwrap()
    }

    fn cost_rows(c: &MaxPlusMatrix<f64>) -> Vec<Vec<f64>> {
        (0..c.dim())
            .map(|i| (0..c.dim()).map(|j| c.get(i, j).unwrap()).collect())
            .collect()
    }

    #[test]
    fn mane_examples() {
        let g = WordGraph::from_potential(&two_symbol(-1.0, -1.0));
        assert_eq!(mane_potential(&g, 0, 0).unwrap(), 0.0);
        assert_eq!(mane_potential(&g, 0, 1).unwrap(), -1.0);
        let g = WordGraph::from_potential(&two_symbol(-1.0, -2.0));
        assert_eq!(mane_potential(&g, 1, 0).unwrap(), -2.0);
        assert_eq!(mane_potential(&g, 0, 1).unwrap(), -1.0);
    }

    #[test]
    fn symmetrized_examples() {
        let g = WordGraph::from_potential(&two_symbol(-1.0, -1.0));
        assert!(symmetrized_mane_check(&g, 0, 0).unwrap());
        assert!(!symmetrized_mane_check(&g, 0, 1).unwrap());
    }

    #[test]
    fn lc1_and_lc2_costs() {
        let dec = decompose_aubry(&WordGraph::from_potential(&two_symbol(-1.0, -1.0))).unwrap();
        assert_eq!(dec.components, vec![vec![0], vec![1]]);
        assert_eq!(dec.entropies, vec![0.0, 0.0]);
        assert_eq!(cost_rows(&dec.cost), vec![vec![-2.0, -1.0], vec![-1.0, -2.0]]);
        assert!(dec.flagged_edges.is_empty());

        let dec = decompose_aubry(&WordGraph::from_potential(&two_symbol(-1.0, -2.0))).unwrap();
        assert_eq!(cost_rows(&dec.cost), vec![vec![-3.0, -2.0], vec![-1.0, -3.0]]);
    }

    #[test]
    fn zero_potential_is_one_component() {
        let a = LocallyConstantPotential::from_fn(full_shift(1, 0.5).unwrap(), 1, |_| 0.0).unwrap();
        let dec = decompose_aubry(&WordGraph::from_potential(&a)).unwrap();
        assert_eq!(dec.components, vec![vec![0, 1]]);
        assert!((dec.h() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(dec.cost.dim(), 0);
    }

    #[test]
    fn positive_cycle_is_rejected() {
        let a = LocallyConstantPotential::from_fn(full_shift(1, 0.5).unwrap(), 1, |w| {
            if w == [1, 1] { 0.5 } else { 0.0 }
        })
        .unwrap();
        let g = WordGraph::from_potential(&a);
        assert!(matches!(decompose_aubry(&g), Err(Error::PositiveCycle(_))));
    }

    #[test]
    fn two_disjoint_zero_cycles() {
        // zero on the loop at 0 and on the 2-cycle 1 -> 2 -> 1, negative elsewhere
        let a = LocallyConstantPotential::from_fn(full_shift(2, 0.5).unwrap(), 1, |w| match w {
            [0, 0] | [1, 2] | [2, 1] => 0.0,
            [x, y] => -1.0 - 0.25 * (*x as f64) - 0.5 * (*y as f64),
            _ => unreachable!(),
        })
        .unwrap();
        let g = WordGraph::from_potential(&a);
        let dec = decompose_aubry(&g).unwrap();
        assert_eq!(dec.components, vec![vec![0], vec![1, 2]]);
        assert_eq!(dec.entropies, vec![0.0, 0.0]);
        check_cost_laws(&dec.cost, 0.0).unwrap();
        assert!(symmetrized_mane_check(&g, 1, 2).unwrap());
        assert!(!symmetrized_mane_check(&g, 0, 1).unwrap());
    }

    #[test]
    fn elimination_preserves_eigenvalue() {
        // component {0} with entropy log 2 on a 3-shift, plus a zero loop at 2
        let a = LocallyConstantPotential::from_fn(full_shift(2, 0.5).unwrap(), 2, |w| {
            let zero_block = w.iter().all(|&s| s < 2) || w == [2, 2, 2];
            if zero_block { 0.0 } else { -1.0 }
        })
        .unwrap();
        let dec = decompose_aubry(&WordGraph::from_potential(&a)).unwrap();
        assert_eq!(dec.components.len(), 2);
        assert_eq!(dec.maximal_set.len(), 1);
        check_cost_laws(&dec.cost, 1e-12).unwrap();
        let full = eliminated_eigenvalue(&dec).unwrap();
        let restricted = mp_eigenvalue(&dec.restricted_cost()).unwrap();
        assert!((full - restricted).abs() < 1e-12);
    }
}
