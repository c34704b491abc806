//! Wilson's algorithm: uniform spanning trees and rooted spanning forests built from
//! successive loop-erased random walks.
//!
//! Walks choose uniformly among incident non-loop edge slots, so a parallel edge
//! doubles the transition weight; self-loops only delay a walk and are skipped.
//! Unvisited start vertices are scanned in ascending id order unless a start order is
//! supplied, which makes every sample a pure function of the graph, roots and stream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::graph::{contract, Graph};
use crate::rng::RandomStream;

/// Steps allowed for one walk before giving up.
pub const WALK_STEP_LIMIT: u64 = 1_000_000_000;

/// A walk in a host graph, possibly self-intersecting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPath {
    pub vertices: Vec<usize>,
}

impl WalkPath {
    pub fn new(vertices: Vec<usize>) -> Self {
        WalkPath { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.vertices.last().copied()
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.vertices.len());
        self.vertices.iter().all(|v| seen.insert(*v))
    }

    /// Consecutive vertices are joined by an edge of `g`.
    pub fn is_walk_in(&self, g: &Graph) -> bool {
        self.vertices.iter().all(|&v| v < g.vertex_count())
            && self
                .vertices
                .windows(2)
                .all(|p| g.neighbors(p[0]).iter().any(|&(w, _)| w == p[1]))
    }
}

/// Chronological loop erasure: walk forward and, on revisiting a vertex, cut the
/// cycle back to its first occurrence.
pub fn loop_erase(path: &WalkPath) -> Result<WalkPath> {
    if path.is_empty() {
        return Err(Error::invalid("cannot loop-erase an empty path"));
    }
    let mut out: Vec<usize> = Vec::with_capacity(path.len());
    let mut position = std::collections::HashMap::new();
    for &v in &path.vertices {
        if let Some(&i) = position.get(&v) {
            for w in out.drain(i + 1..) {
                position.remove(&w);
            }
        } else {
            position.insert(v, out.len());
            out.push(v);
        }
    }
    Ok(WalkPath::new(out))
}

/// Core of Wilson's algorithm. `in_tree` marks the initial root set; walks start from
/// each vertex of `order` not yet in the tree and are stored through last-exit pointers,
/// which is equivalent to erasing loops chronologically. Returns the tree edge ids.
fn wilson_core(
    g: &Graph,
    in_tree: &mut [bool],
    order: impl IntoIterator<Item = usize>,
    stream: RandomStream,
) -> Result<Vec<usize>> {
    let mut rng = stream.rng();
    let mut next: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); g.vertex_count()];
    let mut edges = Vec::with_capacity(g.vertex_count().saturating_sub(1));
    for start in order {
        if in_tree[start] {
            continue;
        }
        let mut v = start;
        let mut steps: u64 = 0;
        while !in_tree[v] {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                return Err(Error::Disconnected {
                    components: g.component_count(),
                });
            }
            next[v] = nbrs[rng.below(nbrs.len())];
            v = next[v].0;
            steps += 1;
            if steps > WALK_STEP_LIMIT {
                return Err(Error::WalkLimit {
                    start,
                    limit: WALK_STEP_LIMIT,
                });
            }
        }
        let mut v = start;
        while !in_tree[v] {
            in_tree[v] = true;
            let (w, e) = next[v];
            edges.push(e);
            v = w;
        }
    }
    Ok(edges)
}

/// Uniform spanning tree of a connected graph.
pub fn wilson_tree<'g>(g: &'g Graph, root: usize, stream: RandomStream) -> Result<Forest<'g>> {
    g.check_vertex(root)?;
    g.require_connected()?;
    let mut in_tree = vec![false; g.vertex_count()];
    in_tree[root] = true;
    let edges = wilson_core(g, &mut in_tree, 0..g.vertex_count(), stream)?;
    Forest::new(g, edges)
}

/// Uniform spanning forest with exactly one root per component.
pub fn wilson_rooted_forest<'g>(
    g: &'g Graph,
    roots: &[usize],
    stream: RandomStream,
) -> Result<Forest<'g>> {
    wilson_rooted_forest_ordered(g, roots, &[], stream)
}

/// As [`wilson_rooted_forest`], but walks are started from `first` (in the given order)
/// before the remaining vertices in ascending order. The law is the same for every order.
pub fn wilson_rooted_forest_ordered<'g>(
    g: &'g Graph,
    roots: &[usize],
    first: &[usize],
    stream: RandomStream,
) -> Result<Forest<'g>> {
    if roots.is_empty() {
        return Err(Error::invalid("root set is empty"));
    }
    g.require_connected()?;
    let mut in_tree = vec![false; g.vertex_count()];
    for &r in roots {
        g.check_vertex(r)?;
        in_tree[r] = true;
    }
    for &v in first {
        g.check_vertex(v)?;
    }
    let order = first.iter().copied().chain(0..g.vertex_count());
    let edges = wilson_core(g, &mut in_tree, order, stream)?;
    Forest::rooted(g, edges, roots.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Wired,
    Free,
}

/// Free mode: uniform spanning tree rooted at vertex 0. Wired mode: uniform spanning
/// tree of the graph with its boundary identified to one vertex, pulled back to a forest
/// of `g` whose components each hold exactly one boundary vertex.
pub fn sample_boundary_mode<'g>(
    g: &'g Graph,
    mode: BoundaryMode,
    stream: RandomStream,
) -> Result<Forest<'g>> {
    match mode {
        BoundaryMode::Free => wilson_tree(g, 0, stream),
        BoundaryMode::Wired => {
            if g.boundary().is_empty() {
                return Err(Error::invalid("wired mode needs a nonempty boundary"));
            }
            g.require_connected()?;
            let q = contract(g, &[g.boundary().to_vec()])?;
            let root = q.vertex_map[g.boundary()[0]];
            let tree = wilson_tree(&q.graph, root, stream)?;
            Forest::rooted(g, q.pull_back(tree.edges()), g.boundary().to_vec())
        }
    }
}

/// Samples `count` forests with sample `i` drawn from `stream.substream(i)`; runs in
/// parallel and returns results in index order.
pub fn sample_batch<'g, F>(count: usize, stream: RandomStream, draw: F) -> Result<Vec<Forest<'g>>>
where
    F: Fn(RandomStream) -> Result<Forest<'g>> + Sync,
{
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|i| draw(stream.substream(i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_box;

    #[test]
    fn loop_erase_examples() {
        let le = |v: Vec<usize>| loop_erase(&WalkPath::new(v)).unwrap().vertices;
        assert_eq!(le(vec![5]), vec![5]);
        assert_eq!(le(vec![0, 1, 0, 2]), vec![0, 2]);
        assert_eq!(le(vec![0, 1, 2, 3, 1, 4]), vec![0, 1, 4]);
        assert_eq!(le(vec![0, 1, 2, 0, 3, 4, 3, 5]), vec![0, 3, 5]);
        assert!(loop_erase(&WalkPath::new(vec![])).is_err());
    }

    #[test]
    fn k2_and_edge_counts() {
        let k2 = Graph::new(2, vec![(0, 1)], vec![]).unwrap();
        let t = wilson_tree(&k2, 0, RandomStream::new(1, 0)).unwrap();
        assert_eq!(t.edges(), &[0]);

        let g = build_box(2, 5).unwrap();
        for i in 0..50 {
            let t = wilson_tree(&g, 3, RandomStream::new(9, i)).unwrap();
            assert_eq!(t.edge_count(), 24);
            assert!(t.is_spanning_tree());
        }
    }

    #[test]
    fn rooted_examples() {
        let p = build_box(1, 3).unwrap();
        let all: Vec<usize> = (0..3).collect();
        let f = wilson_rooted_forest(&p, &all, RandomStream::new(0, 0)).unwrap();
        assert!(f.edges().is_empty());

        let g = build_box(2, 3).unwrap();
        for i in 0..100 {
            let f = wilson_rooted_forest(&g, g.boundary(), RandomStream::new(2, i)).unwrap();
            assert_eq!(f.component_count(), 8);
        }
        assert!(wilson_rooted_forest(&g, &[], RandomStream::new(0, 0)).is_err());
    }

    #[test]
    fn boundary_modes() {
        let k2 = Graph::new(2, vec![(0, 1)], vec![0]).unwrap();
        let f = sample_boundary_mode(&k2, BoundaryMode::Free, RandomStream::new(0, 0)).unwrap();
        assert_eq!(f.edges(), &[0]);

        let g = build_box(2, 3).unwrap();
        // quotient has 9 - 8 + 1 = 2 vertices, so exactly one edge
        for i in 0..100 {
            let f = sample_boundary_mode(&g, BoundaryMode::Wired, RandomStream::new(4, i)).unwrap();
            assert_eq!(f.edge_count(), 1);
            assert_eq!(f.component_count(), 8);
        }
        let torus = crate::graph::build_torus(2, 3).unwrap();
        assert!(
            sample_boundary_mode(&torus, BoundaryMode::Wired, RandomStream::new(0, 0)).is_err()
        );
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)], vec![]).unwrap();
        assert!(matches!(
            wilson_tree(&g, 0, RandomStream::new(0, 0)),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn deterministic() {
        let g = build_box(2, 6).unwrap();
        let s = RandomStream::new(123, 77);
        assert_eq!(
            wilson_tree(&g, 0, s).unwrap().edges(),
            wilson_tree(&g, 0, s).unwrap().edges()
        );
        assert_ne!(
            wilson_tree(&g, 0, s).unwrap().edges(),
            wilson_tree(&g, 0, s.substream(1)).unwrap().edges()
        );
    }
}
