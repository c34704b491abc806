//! Exact spanning-tree and rooted-forest counts via the matrix-tree theorem, single-edge
//! inclusion probabilities via effective resistance, and exhaustive enumeration oracles.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::graph::{contract, Graph};
use crate::linalg::{bareiss_det, ln_biguint, EnvelopeCholesky, SymmetricMatrix};
use crate::unionfind::UnionFind;

/// Graphs with at most this many vertices get exact big-integer counts.
pub const EXACT_VERTEX_LIMIT: usize = 64;

/// Largest edge count accepted by exhaustive enumeration (2^28 subsets).
pub const ENUMERATION_EDGE_LIMIT: usize = 28;

/// Logarithm of a nonnegative count, with the exact value when it was computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCount {
    /// `ln(count)`; `-inf` for a zero count.
    pub value: f64,
    pub exact: Option<BigUint>,
}

impl LogCount {
    pub fn zero() -> Self {
        LogCount {
            value: f64::NEG_INFINITY,
            exact: Some(BigUint::zero()),
        }
    }

    pub fn from_exact(count: BigUint) -> Self {
        LogCount {
            value: ln_biguint(&count),
            exact: Some(count),
        }
    }

    pub fn from_log(value: f64) -> Self {
        LogCount { value, exact: None }
    }

    pub fn is_zero(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }

    /// Exact count as `u64` when available and small enough.
    pub fn as_u64(&self) -> Option<u64> {
        use num_traits::ToPrimitive;
        self.exact.as_ref().and_then(|c| c.to_u64())
    }
}

/// Principal minor of the Laplacian on the vertices marked `keep`. Degrees count every
/// non-loop edge, including edges to dropped vertices.
fn minor_exact(g: &Graph, keep: &[usize]) -> BigUint {
    let mut index = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let k = keep.len();
    let mut m = vec![vec![BigInt::zero(); k]; k];
    for &(u, v) in g.edges() {
        if u == v {
            continue;
        }
        let (iu, iv) = (index[u], index[v]);
        if iu != usize::MAX {
            m[iu][iu] += 1;
        }
        if iv != usize::MAX {
            m[iv][iv] += 1;
        }
        if iu != usize::MAX && iv != usize::MAX {
            m[iu][iv] -= 1;
            m[iv][iu] -= 1;
        }
    }
    let det = bareiss_det(m);
    det.to_biguint().unwrap_or_default()
}

fn minor_matrix(g: &Graph, keep: &[usize]) -> (SymmetricMatrix, Vec<usize>) {
    let mut index = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let mut a = SymmetricMatrix::new(keep.len());
    for &(u, v) in g.edges() {
        if u == v {
            continue;
        }
        let (iu, iv) = (index[u], index[v]);
        if iu != usize::MAX {
            a.add_diagonal(iu, 1.0);
        }
        if iv != usize::MAX {
            a.add_diagonal(iv, 1.0);
        }
        if iu != usize::MAX && iv != usize::MAX {
            a.add_off_diagonal(iu, iv, -1.0);
        }
    }
    (a, index)
}

fn minor_count(g: &Graph, keep: &[usize]) -> Result<LogCount> {
    if g.vertex_count() <= EXACT_VERTEX_LIMIT {
        let c = minor_exact(g, keep);
        return Ok(if c.is_zero() {
            LogCount::zero()
        } else {
            LogCount::from_exact(c)
        });
    }
    if keep.is_empty() {
        return Ok(LogCount::from_exact(BigUint::one()));
    }
    let (a, _) = minor_matrix(g, keep);
    match EnvelopeCholesky::factor(a) {
        Ok(ch) => Ok(LogCount::from_log(ch.log_det())),
        Err(Error::Singular { .. }) => Ok(LogCount::zero()),
        Err(e) => Err(e),
    }
}

/// Number of spanning trees (matrix-tree theorem, vertex 0 deleted). Disconnected graphs
/// give a zero count; self-loops are ignored.
pub fn count_spanning_trees(g: &Graph) -> Result<LogCount> {
    if g.vertex_count() <= 1 {
        return Ok(LogCount::from_exact(BigUint::one()));
    }
    if !g.is_connected() {
        return Ok(LogCount::zero());
    }
    let keep: Vec<usize> = (1..g.vertex_count()).collect();
    minor_count(g, &keep)
}

/// Number of spanning forests with exactly one root in each component: the principal
/// minor of the Laplacian on the non-root vertices. On the exact path the result is
/// cross-checked against the tree count of the graph with the roots identified.
pub fn count_rooted_forests(g: &Graph, roots: &[usize]) -> Result<LogCount> {
    if roots.is_empty() {
        return Err(Error::invalid("root set is empty"));
    }
    let mut is_root = vec![false; g.vertex_count()];
    for &r in roots {
        g.check_vertex(r)?;
        is_root[r] = true;
    }
    let mut uf = UnionFind::new(g.vertex_count());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut rooted = vec![false; g.vertex_count()];
    for &r in roots {
        let c = uf.find(r);
        rooted[c] = true;
    }
    if (0..g.vertex_count()).any(|v| !rooted[uf.find(v)]) {
        return Ok(LogCount::zero());
    }
    let keep: Vec<usize> = (0..g.vertex_count()).filter(|&v| !is_root[v]).collect();
    let count = minor_count(g, &keep)?;
    if let Some(exact) = &count.exact {
        let mut distinct: Vec<usize> = roots.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let q = contract(g, &[distinct])?;
        let via_quotient = count_spanning_trees(&q.graph)?;
        if via_quotient.exact.as_ref() != Some(exact) {
            return Err(Error::Internal(format!(
                "rooted forest count {exact} disagrees with quotient tree count {:?}",
                via_quotient.exact
            )));
        }
    }
    Ok(count)
}

/// Probability that each edge lies in the uniform spanning tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTable {
    pub probs: Vec<f64>,
}

impl MarginalTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Effective-resistance solver for a connected graph (ground at vertex 0).
pub struct ResistanceSolver<'g> {
    g: &'g Graph,
    index: Vec<usize>,
    factor: Option<EnvelopeCholesky>,
}

impl<'g> ResistanceSolver<'g> {
    pub fn new(g: &'g Graph) -> Result<Self> {
        g.require_connected()?;
        let keep: Vec<usize> = (1..g.vertex_count()).collect();
        let (a, index) = minor_matrix(g, &keep);
        let factor = if keep.is_empty() {
            None
        } else {
            Some(EnvelopeCholesky::factor(a)?)
        };
        Ok(ResistanceSolver { g, index, factor })
    }

    /// Effective resistance between `u` and `v` with unit conductances.
    pub fn resistance(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        let factor = self.factor.as_ref().expect("two distinct vertices exist");
        let mut b = vec![0.0; factor.dim()];
        if self.index[u] != usize::MAX {
            b[self.index[u]] += 1.0;
        }
        if self.index[v] != usize::MAX {
            b[self.index[v]] -= 1.0;
        }
        let x = factor.solve(&b);
        let at = |w: usize| {
            if self.index[w] == usize::MAX {
                0.0
            } else {
                x[self.index[w]]
            }
        };
        at(u) - at(v)
    }

    /// `P(e in T)` for the uniform spanning tree `T`; zero for self-loops.
    pub fn edge_marginal(&self, e: usize) -> f64 {
        let (u, v) = self.g.edge(e);
        if u == v {
            0.0
        } else {
            self.resistance(u, v)
        }
    }
}

pub fn edge_marginal(g: &Graph, e: usize) -> Result<f64> {
    if e >= g.edge_count() {
        return Err(Error::invalid(format!(
            "edge id {e} outside 0..{}",
            g.edge_count()
        )));
    }
    if g.is_self_loop(e) {
        return Ok(0.0);
    }
    Ok(ResistanceSolver::new(g)?.edge_marginal(e))
}

pub fn edge_marginals(g: &Graph) -> Result<MarginalTable> {
    let solver = ResistanceSolver::new(g)?;
    let probs = (0..g.edge_count())
        .into_par_iter()
        .map(|e| solver.edge_marginal(e))
        .collect();
    Ok(MarginalTable { probs })
}

/// `P(e in T) = tau(G / e) / tau(G)` computed from two tree counts.
pub fn deletion_contraction_marginal(g: &Graph, e: usize) -> Result<f64> {
    let (u, v) = g.edge(e);
    if u == v {
        return Ok(0.0);
    }
    let total = count_spanning_trees(g)?;
    if total.is_zero() {
        return Err(Error::Disconnected {
            components: g.component_count(),
        });
    }
    let q = contract(g, &[vec![u, v]])?;
    let with_e = count_spanning_trees(&q.graph)?;
    Ok((with_e.value - total.value).exp())
}

/// A copy of `g` without the edges flagged in `drop` (boundary preserved, ids compacted).
pub fn without_edges(g: &Graph, drop: &[bool]) -> Graph {
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| !drop[*e])
        .map(|(_, &p)| p)
        .collect();
    Graph::new(g.vertex_count(), edges, g.boundary().to_vec()).expect("subgraph of a valid graph")
}

/// Exact law of the pattern `T ∩ edges` under the uniform spanning tree `T` of `g`.
/// Entry `mask` is the probability that `T` contains exactly the edges `edges[i]` with
/// bit `i` set. Each probability is a ratio of two tree counts.
pub fn pattern_probabilities(g: &Graph, edges: &[usize]) -> Result<Vec<f64>> {
    if edges.len() > 20 {
        return Err(Error::Capacity {
            what: "pattern edges",
            requested: edges.len() as u128,
            limit: 20,
        });
    }
    let total = count_spanning_trees(g)?;
    if total.is_zero() {
        return Err(Error::Disconnected {
            components: g.component_count(),
        });
    }
    (0..1u32 << edges.len())
        .into_par_iter()
        .map(|mask| {
            let mut drop = vec![false; g.edge_count()];
            let mut uf = UnionFind::new(g.vertex_count());
            for (i, &e) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let (u, v) = g.edge(e);
                    if !uf.union(u, v) {
                        return Ok(0.0);
                    }
                } else {
                    drop[e] = true;
                }
            }
            let reduced = without_edges(g, &drop);
            let mut classes: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
            for v in 0..g.vertex_count() {
                classes[uf.find(v)].push(v);
            }
            classes.retain(|c| c.len() > 1);
            let q = contract(&reduced, &classes)?;
            let c = count_spanning_trees(&q.graph)?;
            Ok(if c.is_zero() {
                0.0
            } else {
                (c.value - total.value).exp()
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForestConstraint {
    /// Spanning trees.
    AllTrees,
    /// Every component contains exactly one of the listed roots.
    RootedExactlyOne(Vec<usize>),
    /// Every component contains at least one boundary vertex of the graph.
    BoundaryAtLeastOne,
}

struct MaskChecker<'a> {
    g: &'a Graph,
    constraint: &'a ForestConstraint,
    is_root: Vec<bool>,
}

impl MaskChecker<'_> {
    fn accepts(&self, mask: u32, uf: &mut UnionFind, hits: &mut [u32]) -> bool {
        let n = self.g.vertex_count();
        if let ForestConstraint::AllTrees = self.constraint {
            if mask.count_ones() as usize + 1 != n {
                return false;
            }
        }
        *uf = UnionFind::new(n);
        let mut bits = mask;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (u, v) = self.g.edge(e);
            if !uf.union(u, v) {
                return false;
            }
        }
        match self.constraint {
            ForestConstraint::AllTrees => uf.set_count() == 1,
            ForestConstraint::RootedExactlyOne(_) | ForestConstraint::BoundaryAtLeastOne => {
                hits.iter_mut().for_each(|h| *h = 0);
                for v in 0..n {
                    if self.is_root[v] {
                        hits[uf.find(v)] += 1;
                    }
                }
                let exactly_one = matches!(self.constraint, ForestConstraint::RootedExactlyOne(_));
                (0..n).all(|v| {
                    let r = uf.find(v);
                    r != v
                        || if exactly_one {
                            hits[r] == 1
                        } else {
                            hits[r] >= 1
                        }
                })
            }
        }
    }
}

fn enumerate_masks(g: &Graph, constraint: &ForestConstraint) -> Result<Vec<u32>> {
    let m = g.edge_count();
    if m > ENUMERATION_EDGE_LIMIT {
        return Err(Error::Capacity {
            what: "edges for exhaustive enumeration",
            requested: m as u128,
            limit: ENUMERATION_EDGE_LIMIT as u128,
        });
    }
    let mut is_root = vec![false; g.vertex_count()];
    match constraint {
        ForestConstraint::RootedExactlyOne(roots) => {
            if roots.is_empty() {
                return Err(Error::invalid("root set is empty"));
            }
            for &r in roots {
                g.check_vertex(r)?;
                is_root[r] = true;
            }
        }
        ForestConstraint::BoundaryAtLeastOne => {
            for &b in g.boundary() {
                is_root[b] = true;
            }
        }
        ForestConstraint::AllTrees => {}
    }
    let checker = MaskChecker {
        g,
        constraint,
        is_root,
    };
    let total: u64 = 1 << m;
    let chunk: u64 = 1 << 14;
    let chunks = total.div_ceil(chunk);
    let parts: Vec<Vec<u32>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut uf = UnionFind::new(g.vertex_count());
            let mut hits = vec![0u32; g.vertex_count()];
            let lo = c * chunk;
            let hi = (lo + chunk).min(total);
            (lo..hi)
                .map(|x| x as u32)
                .filter(|&mask| checker.accepts(mask, &mut uf, &mut hits))
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Every edge subset that is an acyclic spanning subgraph satisfying `constraint`, in
/// increasing order of the edge bitmask (bit `e` = edge id `e`).
pub fn enumerate_forests<'g>(
    g: &'g Graph,
    constraint: &ForestConstraint,
) -> Result<Vec<Forest<'g>>> {
    enumerate_masks(g, constraint)?
        .into_iter()
        .map(|mask| {
            let edges = (0..g.edge_count()).filter(|e| mask >> e & 1 == 1).collect();
            Forest::new(g, edges)
        })
        .collect()
}

/// Bitmasks of the forests [`enumerate_forests`] would return.
pub fn enumerate_forest_masks(g: &Graph, constraint: &ForestConstraint) -> Result<Vec<u32>> {
    enumerate_masks(g, constraint)
}

pub fn count_forests(g: &Graph, constraint: &ForestConstraint) -> Result<u64> {
    Ok(enumerate_masks(g, constraint)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_box, build_torus};

    fn k(n: usize) -> Graph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        Graph::new(n, e, vec![]).unwrap()
    }

    #[test]
    fn tree_counts() {
        assert_eq!(count_spanning_trees(&k(2)).unwrap().as_u64(), Some(1));
        assert_eq!(
            count_spanning_trees(&build_box(2, 2).unwrap())
                .unwrap()
                .as_u64(),
            Some(4)
        );
        assert_eq!(count_spanning_trees(&k(4)).unwrap().as_u64(), Some(16));
        assert_eq!(count_spanning_trees(&k(6)).unwrap().as_u64(), Some(1296));
        let disc = Graph::new(3, vec![(0, 1)], vec![]).unwrap();
        assert!(count_spanning_trees(&disc).unwrap().is_zero());
    }

    #[test]
    fn rooted_counts() {
        let p = build_box(1, 3).unwrap();
        assert_eq!(
            count_rooted_forests(&p, &[0, 1, 2]).unwrap().as_u64(),
            Some(1)
        );
        assert_eq!(count_rooted_forests(&p, &[0, 2]).unwrap().as_u64(), Some(2));
        let c4 = build_box(2, 2).unwrap();
        assert_eq!(count_rooted_forests(&c4, &[3]).unwrap().as_u64(), Some(4));
        assert!(count_rooted_forests(&c4, &[]).is_err());
    }

    #[test]
    fn float_path_agrees_with_exact() {
        // 9x9 box has 81 vertices, beyond the exact limit; compare with the quotient formula
        let g = build_box(2, 9).unwrap();
        let c = count_spanning_trees(&g).unwrap();
        assert!(c.exact.is_none());
        let g8 = build_box(2, 8).unwrap();
        let exact = count_spanning_trees(&g8).unwrap();
        let (a, _) = minor_matrix(&g8, &(1..64).collect::<Vec<_>>());
        let approx = EnvelopeCholesky::factor(a).unwrap().log_det();
        assert!((exact.value - approx).abs() < 1e-9 * exact.value);
        // torus 3x3: 11664 spanning trees
        let t = count_spanning_trees(&build_torus(2, 3).unwrap()).unwrap();
        assert_eq!(t.as_u64(), Some(11664));
    }

    #[test]
    fn marginal_examples() {
        assert!((edge_marginal(&k(2), 0).unwrap() - 1.0).abs() < 1e-12);
        let c4 = build_box(2, 2).unwrap();
        for e in 0..4 {
            assert!((edge_marginal(&c4, e).unwrap() - 0.75).abs() < 1e-12);
        }
        let k4 = k(4);
        for e in 0..6 {
            assert!((edge_marginal(&k4, e).unwrap() - 0.5).abs() < 1e-12);
        }
        let looped = Graph::new(2, vec![(0, 1), (1, 1)], vec![]).unwrap();
        assert_eq!(edge_marginal(&looped, 1).unwrap(), 0.0);
    }

    #[test]
    fn enumeration_examples() {
        let p = build_box(1, 3).unwrap();
        let at_least = enumerate_forests(&p, &ForestConstraint::BoundaryAtLeastOne).unwrap();
        let sets: Vec<Vec<usize>> = at_least.iter().map(|f| f.edges().to_vec()).collect();
        assert_eq!(sets, vec![vec![0], vec![1], vec![0, 1]]);
        let exactly =
            enumerate_forests(&p, &ForestConstraint::RootedExactlyOne(vec![0, 2])).unwrap();
        assert_eq!(exactly.len(), 2);
        assert_eq!(
            count_forests(&k(2), &ForestConstraint::AllTrees).unwrap(),
            1
        );
        let big = build_box(2, 5).unwrap();
        assert!(enumerate_forests(&big, &ForestConstraint::AllTrees)
            .unwrap_err()
            .is_capacity());
    }

    #[test]
    fn pattern_law_sums_to_one() {
        let g = build_box(2, 3).unwrap();
        let probs = pattern_probabilities(&g, &[0, 1, 2]).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // single-edge pattern recovers the marginal
        let single = pattern_probabilities(&g, &[4]).unwrap();
        assert!((single[1] - edge_marginal(&g, 4).unwrap()).abs() < 1e-12);
    }
}
