//! Boundary relations on windows and conditional resampling.
//!
//! For a window `H` of a host graph and a forest `F`, the *outside* relation joins two
//! window-boundary vertices when `F` connects them using edges not internal to `H`; the
//! *inside* relation joins them when `F_H` (the edges of `F` internal to `H`) does.
//! Edges with one endpoint in the window count as outside edges.
//!
//! Strong resampling replaces `F_H` with a uniform spanning tree of `H` after
//! identifying vertices that are outside-related. Weak resampling replaces `F_H` with a
//! uniform element of the set of window forests that induce the same inside relation and
//! whose every component meets the window boundary.
//!
//! The escape and trunk closures are finite-volume readings of constructions on
//! infinite forests: "reaches infinity" is read as "reaches a host-boundary vertex".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::graph::{contract, Graph, Window};
use crate::rng::{RandomStream, StreamRng};
use crate::sampler::{
    sample_boundary_mode, wilson_rooted_forest, wilson_tree, BoundaryMode, WalkPath,
};
use crate::unionfind::UnionFind;

/// Window internal edge counts up to this use exhaustive enumeration in weak resampling.
pub const WEAK_ENUMERATION_EDGE_LIMIT: usize = 20;
/// Rejected proposals tolerated before falling back to enumeration.
pub const WEAK_REJECTION_CAP: usize = 1_000_000;

/// Partition of a window boundary, kept in canonical form: each block sorted, blocks
/// ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryPartition {
    blocks: Vec<Vec<usize>>,
}

impl BoundaryPartition {
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Self {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        BoundaryPartition { blocks }
    }

    /// Groups `vertices` by `label`.
    pub fn from_labels(vertices: &[usize], mut label: impl FnMut(usize) -> usize) -> Self {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &v in vertices {
            groups.entry(label(v)).or_default().push(v);
        }
        Self::from_blocks(groups.into_values().collect())
    }

    pub fn singletons(vertices: &[usize]) -> Self {
        Self::from_blocks(vertices.iter().map(|&v| vec![v]).collect())
    }

    pub fn canonical_form(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }
}

/// Partition of the window boundary by connectivity through `f_outside`, which must not
/// contain edges internal to the window.
pub fn outside_relation(
    g: &Graph,
    w: &Window<'_>,
    f_outside: &[usize],
) -> Result<BoundaryPartition> {
    let mut uf = UnionFind::new(g.vertex_count());
    for &e in f_outside {
        if e >= g.edge_count() {
            return Err(Error::invalid(format!("edge id {e} outside the host")));
        }
        if w.is_internal_edge(e) {
            return Err(Error::invalid(format!(
                "edge {e} is internal to the window; outside restriction is malformed"
            )));
        }
        let (u, v) = g.edge(e);
        uf.union(u, v);
    }
    Ok(BoundaryPartition::from_labels(w.window_boundary(), |v| {
        uf.find(v)
    }))
}

/// Partition of the window boundary by connectivity through `f_inside`, an acyclic set
/// of window-internal edges.
pub fn inside_relation(w: &Window<'_>, f_inside: &[usize]) -> Result<BoundaryPartition> {
    let g = w.host();
    let mut uf = UnionFind::new(g.vertex_count());
    for &e in f_inside {
        if e >= g.edge_count() || !w.is_internal_edge(e) {
            return Err(Error::invalid(format!(
                "edge {e} is not internal to the window"
            )));
        }
        let (u, v) = g.edge(e);
        if !uf.union(u, v) {
            return Err(Error::Cycle { edge: e });
        }
    }
    Ok(BoundaryPartition::from_labels(w.window_boundary(), |v| {
        uf.find(v)
    }))
}

/// Replaces `F_H` by a uniform spanning tree of the window with outside-related
/// boundary vertices identified. `f` must be a spanning tree of `g`.
pub fn strong_gibbs_resample<'g>(
    g: &'g Graph,
    w: &Window<'_>,
    f: &Forest<'g>,
    stream: RandomStream,
) -> Result<Forest<'g>> {
    if !f.is_spanning_tree() {
        return Err(Error::invalid(
            "strong resampling needs a spanning tree of a finite graph",
        ));
    }
    let (_, outside) = f.split_by_window(w);
    let p_out = outside_relation(g, w, &outside)?;
    let local = w.local_graph();
    let idx = w.local_index();
    let classes: Vec<Vec<usize>> = p_out
        .canonical_form()
        .iter()
        .filter(|b| b.len() > 1)
        .map(|b| b.iter().map(|&v| idx[v]).collect())
        .collect();
    let q = contract(&local, &classes)?;
    if !q.graph.is_connected() {
        return Err(Error::Internal(
            "window quotient is disconnected for a spanning-tree input".into(),
        ));
    }
    let tree = wilson_tree(&q.graph, 0, stream)?;
    let mut edges = outside;
    edges.extend(
        q.pull_back(tree.edges())
            .into_iter()
            .map(|le| w.internal_edges()[le]),
    );
    let out = Forest::new(g, edges)?;
    if !out.is_spanning_tree() {
        return Err(Error::Internal(
            "strong resample lost spanning property".into(),
        ));
    }
    Ok(out)
}

/// Checks window forests (over local ids) against a target boundary partition.
struct PatternMatcher {
    local: Graph,
    // local non-loop edge ids
    edges: Vec<usize>,
    // local boundary vertex -> block index of the target partition
    block_of: Vec<usize>,
    blocks: usize,
}

impl PatternMatcher {
    fn new(w: &Window<'_>, p: &BoundaryPartition) -> Self {
        let local = w.local_graph();
        let idx = w.local_index();
        let edges = (0..local.edge_count())
            .filter(|&e| !local.is_self_loop(e))
            .collect();
        let mut block_of = vec![usize::MAX; local.vertex_count()];
        for (bi, block) in p.canonical_form().iter().enumerate() {
            for &v in block {
                block_of[idx[v]] = bi;
            }
        }
        PatternMatcher {
            local,
            edges,
            block_of,
            blocks: p.block_count(),
        }
    }

    /// `local_edges` is acyclic, induces the target partition, and every component
    /// contains a window-boundary vertex.
    fn matches(&self, local_edges: impl Iterator<Item = usize>) -> bool {
        let n = self.local.vertex_count();
        let mut uf = UnionFind::new(n);
        for e in local_edges {
            let (u, v) = self.local.edge(e);
            if !uf.union(u, v) {
                return false;
            }
        }
        let mut root_block = vec![usize::MAX; n];
        let mut block_root = vec![usize::MAX; self.blocks];
        for v in 0..n {
            let b = self.block_of[v];
            if b == usize::MAX {
                continue;
            }
            let r = uf.find(v);
            if root_block[r] == usize::MAX && block_root[b] == usize::MAX {
                root_block[r] = b;
                block_root[b] = r;
            } else if root_block[r] != b || block_root[b] != r {
                return false;
            }
        }
        (0..n).all(|v| root_block[uf.find(v)] != usize::MAX)
    }

    fn enumerate(&self) -> Result<Vec<Vec<usize>>> {
        let k = self.edges.len();
        if k > crate::kirchhoff::ENUMERATION_EDGE_LIMIT {
            return Err(Error::Capacity {
                what: "window edges for enumeration",
                requested: k as u128,
                limit: crate::kirchhoff::ENUMERATION_EDGE_LIMIT as u128,
            });
        }
        Ok((0..1u64 << k)
            .filter_map(|mask| {
                let chosen = || (0..k).filter(move |i| mask >> i & 1 == 1);
                self.matches(chosen().map(|i| self.edges[i]))
                    .then(|| chosen().map(|i| self.edges[i]).collect())
            })
            .collect())
    }
}

/// All window forests `S(P)` (as host edge ids) inducing partition `p` on the window
/// boundary with every component meeting the window boundary.
pub fn compatible_patterns(w: &Window<'_>, p: &BoundaryPartition) -> Result<Vec<Vec<usize>>> {
    let m = PatternMatcher::new(w, p);
    Ok(m.enumerate()?
        .into_iter()
        .map(|local| {
            let mut host: Vec<usize> = local.into_iter().map(|e| w.internal_edges()[e]).collect();
            host.sort_unstable();
            host
        })
        .collect())
}

/// Replaces `F_H` by a uniform element of `S(P)` where `P` is the current inside relation.
/// Small windows enumerate `S(P)`; larger ones propose uniform forests rooted at one
/// representative per block of `P` and accept when the induced partition is `P`.
pub fn weak_gibbs_resample<'g>(
    g: &'g Graph,
    w: &Window<'_>,
    f: &Forest<'g>,
    stream: RandomStream,
) -> Result<Forest<'g>> {
    if w.vertices().len() == g.vertex_count() {
        return Err(Error::invalid(
            "window must be strictly smaller than the graph",
        ));
    }
    let (inside, outside) = f.split_by_window(w);
    let p = inside_relation(w, &inside)?;
    let matcher = PatternMatcher::new(w, &p);
    let mut rng = stream.rng();

    let chosen_local: Vec<usize> = if matcher.edges.len() <= WEAK_ENUMERATION_EDGE_LIMIT {
        let set = matcher.enumerate()?;
        if set.is_empty() {
            return Err(Error::Internal("compatible pattern set is empty".into()));
        }
        set[rng.below(set.len())].clone()
    } else {
        reject_sample(&matcher, &p, w, &mut rng)?
    };

    let mut edges = outside;
    edges.extend(chosen_local.into_iter().map(|e| w.internal_edges()[e]));
    match f.roots() {
        Some(roots) => Forest::rooted(g, edges, roots.to_vec()),
        None => Forest::new(g, edges),
    }
}

fn reject_sample(
    matcher: &PatternMatcher,
    p: &BoundaryPartition,
    w: &Window<'_>,
    rng: &mut StreamRng,
) -> Result<Vec<usize>> {
    let idx = w.local_index();
    let reps: Vec<usize> = p.canonical_form().iter().map(|b| idx[b[0]]).collect();
    for _ in 0..WEAK_REJECTION_CAP {
        let proposal_stream = RandomStream::new(rng.next_u64(), rng.next_u64());
        let proposal = match wilson_rooted_forest(&matcher.local, &reps, proposal_stream) {
            Ok(f) => f,
            // window components without a representative: fall through to enumeration
            Err(Error::Disconnected { .. }) => break,
            Err(e) => return Err(e),
        };
        if matcher.matches(proposal.edges().iter().copied()) {
            return Ok(proposal.edges().to_vec());
        }
    }
    let set = matcher.enumerate()?;
    if set.is_empty() {
        return Err(Error::Internal("compatible pattern set is empty".into()));
    }
    Ok(set[rng.below(set.len())].clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeClosure {
    /// The input vertex set `C` (sorted).
    pub window: Vec<usize>,
    /// Vertices of `C` that start a forest path to the host boundary meeting `C` only there.
    pub c_f: Vec<usize>,
    /// `c_f` plus every vertex all of whose forest paths to the host boundary pass through `c_f`.
    pub c_tilde: Vec<usize>,
}

/// Components of the forest after deleting `removed`, flagging those that contain a
/// host-boundary vertex.
fn components_avoiding(g: &Graph, f: &Forest<'_>, removed: &[bool]) -> (UnionFind, Vec<bool>) {
    let mut uf = UnionFind::new(g.vertex_count());
    for &e in f.edges() {
        let (u, v) = g.edge(e);
        if !removed[u] && !removed[v] {
            uf.union(u, v);
        }
    }
    let mut reaches = vec![false; g.vertex_count()];
    for &b in g.boundary() {
        if !removed[b] {
            let r = uf.find(b);
            reaches[r] = true;
        }
    }
    (uf, reaches)
}

pub fn escape_closure(g: &Graph, f: &Forest<'_>, c: &[usize]) -> Result<EscapeClosure> {
    let mut in_c = vec![false; g.vertex_count()];
    for &v in c {
        g.check_vertex(v)?;
        in_c[v] = true;
    }
    let adj = f.adjacency();
    let (mut uf, reaches) = components_avoiding(g, f, &in_c);
    let window: Vec<usize> = (0..g.vertex_count()).filter(|&v| in_c[v]).collect();
    let c_f: Vec<usize> = window
        .iter()
        .copied()
        .filter(|&v| {
            g.is_boundary(v) || adj[v].iter().any(|&(w, _)| !in_c[w] && reaches[uf.find(w)])
        })
        .collect();

    let mut in_cf = vec![false; g.vertex_count()];
    for &v in &c_f {
        in_cf[v] = true;
    }
    let (mut uf2, reaches2) = components_avoiding(g, f, &in_cf);
    let c_tilde = (0..g.vertex_count())
        .filter(|&v| in_cf[v] || !reaches2[uf2.find(v)])
        .collect();
    Ok(EscapeClosure {
        window,
        c_f,
        c_tilde,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrunkClosure {
    pub c1: usize,
    pub c2: usize,
    /// Trunk segment from `c1` to `c2` plus the forest branches hanging off its interior
    /// that do not reach the host boundary.
    pub region: Vec<usize>,
}

/// Checks that `trunk` is a self-avoiding path along edges of `f`.
pub(crate) fn validate_forest_path(f: &Forest<'_>, path: &WalkPath) -> Result<()> {
    let g = f.host();
    if path.is_empty() {
        return Err(Error::invalid("trunk is empty"));
    }
    if !path.is_self_avoiding() {
        return Err(Error::invalid("trunk is not self-avoiding"));
    }
    for &v in &path.vertices {
        g.check_vertex(v)?;
    }
    for pair in path.vertices.windows(2) {
        let joined = g
            .neighbors(pair[0])
            .iter()
            .any(|&(w, e)| w == pair[1] && f.contains_edge(e));
        if !joined {
            return Err(Error::invalid(format!(
                "trunk step {} -> {} is not a forest edge",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

pub fn trunk_closure(
    g: &Graph,
    f: &Forest<'_>,
    trunk: &WalkPath,
    c: &[usize],
) -> Result<TrunkClosure> {
    validate_forest_path(f, trunk)?;
    let mut in_c = vec![false; g.vertex_count()];
    for &v in c {
        g.check_vertex(v)?;
        in_c[v] = true;
    }
    let hits: Vec<usize> = (0..trunk.len())
        .filter(|&i| in_c[trunk.vertices[i]])
        .collect();
    let (i1, i2) = match (hits.first(), hits.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::invalid("trunk does not meet the vertex set C")),
    };
    let segment = &trunk.vertices[i1..=i2];
    let mut on_segment = vec![false; g.vertex_count()];
    for &v in segment {
        on_segment[v] = true;
    }
    let (mut uf, reaches) = components_avoiding(g, f, &on_segment);
    let adj = f.adjacency();
    let mut attached = vec![false; g.vertex_count()];
    if segment.len() > 2 {
        for &s in &segment[1..segment.len() - 1] {
            for &(w, _) in &adj[s] {
                if !on_segment[w] {
                    let r = uf.find(w);
                    attached[r] = true;
                }
            }
        }
    }
    let region = (0..g.vertex_count())
        .filter(|&v| {
            on_segment[v] || {
                let r = uf.find(v);
                attached[r] && !reaches[r]
            }
        })
        .collect();
    Ok(TrunkClosure {
        c1: segment[0],
        c2: *segment.last().unwrap(),
        region,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GibbsKind {
    Weak,
    Strong,
}

/// Window-edge marginals before and after one resampling step, over independent samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsCheck {
    pub samples: u64,
    pub window_edges: Vec<usize>,
    /// runs whose inside relation was unchanged by the step
    pub inside_preserved: u64,
    pub pre_marginals: Vec<f64>,
    pub post_marginals: Vec<f64>,
    /// paired z-score of post minus pre, per window edge
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
}

/// Draws `samples` forests from the boundary-mode law, applies one resampling step on
/// `w` to each, and compares window-edge frequencies. Sample `i` uses substream `2i`
/// for the forest and `2i + 1` for the step.
pub fn gibbs_invariance_check(
    g: &Graph,
    w: &Window<'_>,
    mode: BoundaryMode,
    kind: GibbsKind,
    samples: u64,
    stream: RandomStream,
) -> Result<GibbsCheck> {
    use rayon::prelude::*;
    let m = w.internal_edges().len();
    let pos = |e: usize| w.internal_edges().binary_search(&e).ok();
    let init = || (0u64, vec![0i64; m], vec![0i64; m], vec![0u64; m]);
    let (inside_preserved, pre, post, sq) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let f = sample_boundary_mode(g, mode, stream.substream(2 * i))?;
            let step = stream.substream(2 * i + 1);
            let h = match kind {
                GibbsKind::Weak => weak_gibbs_resample(g, w, &f, step)?,
                GibbsKind::Strong => strong_gibbs_resample(g, w, &f, step)?,
            };
            let before = f.window_pattern(w);
            let after = h.window_pattern(w);
            let same = inside_relation(w, &before)? == inside_relation(w, &after)?;
            let mut a = vec![0i64; m];
            let mut b = vec![0i64; m];
            for e in before {
                a[pos(e).unwrap()] = 1;
            }
            for e in after {
                b[pos(e).unwrap()] = 1;
            }
            let d2 = a
                .iter()
                .zip(&b)
                .map(|(x, y)| ((y - x) * (y - x)) as u64)
                .collect();
            Ok((same as u64, a, b, d2))
        })
        .try_fold(init, |acc, r: Result<_>| {
            let (s, a, b, d2) = r?;
            Ok(merge((acc.0, acc.1, acc.2, acc.3), (s, a, b, d2)))
        })
        .try_reduce(init, |x, y| Ok(merge(x, y)))?;
    let n = samples.max(1) as f64;
    let pre_marginals: Vec<f64> = pre.iter().map(|&c| c as f64 / n).collect();
    let post_marginals: Vec<f64> = post.iter().map(|&c| c as f64 / n).collect();
    let z_scores: Vec<f64> = (0..m)
        .map(|j| {
            let mean = (post[j] - pre[j]) as f64 / n;
            let var = (sq[j] as f64 / n - mean * mean).max(0.0);
            let se = (var / n).sqrt();
            if se == 0.0 {
                if mean == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                mean / se
            }
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    Ok(GibbsCheck {
        samples,
        window_edges: w.internal_edges().to_vec(),
        inside_preserved,
        pre_marginals,
        post_marginals,
        z_scores,
        max_abs_z,
    })
}

type Tally = (u64, Vec<i64>, Vec<i64>, Vec<u64>);

fn merge(mut x: Tally, y: Tally) -> Tally {
    x.0 += y.0;
    x.1.iter_mut().zip(&y.1).for_each(|(a, b)| *a += b);
    x.2.iter_mut().zip(&y.2).for_each(|(a, b)| *a += b);
    x.3.iter_mut().zip(&y.3).for_each(|(a, b)| *a += b);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{box_block, build_box, induced_window, lattice_vertex};

    #[test]
    fn partition_canonical_form() {
        let p = BoundaryPartition::from_blocks(vec![vec![5, 2], vec![], vec![1], vec![9, 3]]);
        assert_eq!(p.canonical_form(), &[vec![1], vec![2, 5], vec![3, 9]]);
        assert_eq!(
            p,
            BoundaryPartition::from_blocks(vec![vec![9, 3], vec![1], vec![5, 2]])
        );
    }

    #[test]
    fn outside_relation_examples() {
        let g = build_box(2, 4).unwrap();
        let block = box_block(&g, &[1, 1], &[2, 2]).unwrap();
        let w = induced_window(&g, &block).unwrap();
        assert!(outside_relation(&g, &w, &[]).unwrap().is_singletons());

        // edges (1,1)-(1,0)-(2,0)-(2,1) join (1,1) and (2,1) from outside
        let v = |x, y| lattice_vertex(&g, &[x, y]).unwrap();
        let find = |a: usize, b: usize| {
            g.edges()
                .iter()
                .position(|&(p, q)| (p, q) == (a.min(b), a.max(b)))
                .unwrap()
        };
        let path = [
            find(v(1, 1), v(1, 0)),
            find(v(1, 0), v(2, 0)),
            find(v(2, 0), v(2, 1)),
        ];
        let p = outside_relation(&g, &w, &path).unwrap();
        let mut expected = vec![vec![v(1, 1), v(2, 1)]];
        expected.extend([v(1, 2), v(2, 2)].iter().map(|&x| vec![x]));
        assert_eq!(p, BoundaryPartition::from_blocks(expected));

        // internal edge is rejected
        assert!(outside_relation(&g, &w, &[find(v(1, 1), v(2, 1))]).is_err());

        // spanning tree of the complement ring (rim cycle minus one edge, plus the 8 spokes)
        let mut ring: Vec<usize> = (0..g.edge_count())
            .filter(|&e| {
                let (a, b) = g.edge(e);
                g.is_boundary(a) && g.is_boundary(b) && e != find(v(0, 0), v(1, 0))
            })
            .collect();
        for &x in w.vertices() {
            let spoke = g
                .neighbors(x)
                .iter()
                .find(|&&(y, _)| !w.contains(y))
                .unwrap();
            ring.push(spoke.1);
        }
        let tree = Forest::new(&g, ring.clone()).unwrap();
        assert!(tree.is_spanning_tree());
        let p = outside_relation(&g, &w, &ring).unwrap();
        assert_eq!(p.block_count(), 1);
    }

    #[test]
    fn inside_relation_examples() {
        let g = build_box(2, 5).unwrap();
        let block = box_block(&g, &[1, 1], &[3, 3]).unwrap();
        let w = induced_window(&g, &block).unwrap();
        assert!(inside_relation(&w, &[]).unwrap().is_singletons());
        let v = |x, y| lattice_vertex(&g, &[x, y]).unwrap();
        let find = |a: usize, b: usize| {
            g.edges()
                .iter()
                .position(|&(p, q)| (p, q) == (a.min(b), a.max(b)))
                .unwrap()
        };
        let one = inside_relation(&w, &[find(v(1, 1), v(2, 1))]).unwrap();
        assert!(one.canonical_form().contains(&vec![v(1, 1), v(2, 1)]));
        // L-shape (1,1)-(2,1)-(3,1)-(3,2): four rim vertices of the 3x3 block in one class
        let l = [
            find(v(1, 1), v(2, 1)),
            find(v(2, 1), v(3, 1)),
            find(v(3, 1), v(3, 2)),
        ];
        let p = inside_relation(&w, &l).unwrap();
        assert!(p
            .canonical_form()
            .contains(&vec![v(1, 1), v(2, 1), v(3, 1), v(3, 2)]));
        // 2-edge L turning at the block corner (1,1)
        let l2 = [find(v(1, 2), v(1, 1)), find(v(1, 1), v(2, 1))];
        let p = inside_relation(&w, &l2).unwrap();
        assert!(p
            .canonical_form()
            .contains(&vec![v(1, 1), v(2, 1), v(1, 2)]));
        assert_eq!(p.block_count(), 6);
        // cycle rejected
        let sq = [
            find(v(1, 1), v(2, 1)),
            find(v(2, 1), v(2, 2)),
            find(v(2, 2), v(1, 2)),
            find(v(1, 2), v(1, 1)),
        ];
        assert!(matches!(inside_relation(&w, &sq), Err(Error::Cycle { .. })));
    }

    #[test]
    fn strong_resample_single_vertex_window_is_identity() {
        let g = build_box(2, 4).unwrap();
        let w = induced_window(&g, &[5]).unwrap();
        for i in 0..20 {
            let f = wilson_tree(&g, 0, RandomStream::new(1, i)).unwrap();
            let r = strong_gibbs_resample(&g, &w, &f, RandomStream::new(2, i)).unwrap();
            assert_eq!(r.edges(), f.edges());
        }
    }

    #[test]
    fn weak_resample_singleton_set_is_identity() {
        // a window of two adjacent rim vertices on a path: P joined means edge forced
        let g = build_box(1, 5).unwrap();
        let w = induced_window(&g, &[1, 2]).unwrap();
        let f = Forest::new(&g, vec![0, 1, 2, 3]).unwrap();
        let p = inside_relation(&w, &f.window_pattern(&w)).unwrap();
        assert_eq!(compatible_patterns(&w, &p).unwrap().len(), 1);
        let r = weak_gibbs_resample(&g, &w, &f, RandomStream::new(0, 0)).unwrap();
        assert_eq!(r.edges(), f.edges());
        let all: Vec<usize> = (0..5).collect();
        let whole = induced_window(&g, &all).unwrap();
        assert!(weak_gibbs_resample(&g, &whole, &f, RandomStream::new(0, 0)).is_err());
    }

    #[test]
    fn escape_closure_examples() {
        let g = build_box(1, 7).unwrap();
        let f = Forest::new(&g, (0..6).collect()).unwrap();
        let e = escape_closure(&g, &f, &[3]).unwrap();
        assert_eq!(e.c_f, vec![3]);
        assert_eq!(e.c_tilde, vec![3]);

        let g = build_box(2, 5).unwrap();
        let interior: Vec<usize> = (0..25).filter(|&v| !g.is_boundary(v)).collect();
        for i in 0..20 {
            let f = wilson_tree(&g, 0, RandomStream::new(3, i)).unwrap();
            let e = escape_closure(&g, &f, &interior).unwrap();
            assert!(interior.iter().all(|v| e.c_tilde.contains(v)));
            assert!(e.c_f.iter().all(|v| e.c_tilde.contains(v)));
        }
    }

    #[test]
    fn trunk_closure_examples() {
        let g = build_box(1, 7).unwrap();
        let f = Forest::new(&g, (0..6).collect()).unwrap();
        let trunk = WalkPath::new((0..7).collect());
        let t = trunk_closure(&g, &f, &trunk, &[2, 3, 4]).unwrap();
        assert_eq!((t.c1, t.c2), (2, 4));
        assert_eq!(t.region, vec![2, 3, 4]);
        let t = trunk_closure(&g, &f, &trunk, &[3]).unwrap();
        assert_eq!((t.c1, t.c2, t.region.clone()), (3, 3, vec![3]));
        assert!(trunk_closure(&g, &f, &WalkPath::new(vec![0, 1]), &[5]).is_err());
        assert!(trunk_closure(&g, &f, &WalkPath::new(vec![0, 2]), &[0]).is_err());
    }
}
