//! Spanning forests of a host graph, stored as an edge subset plus component labels.

use bitvec::vec::BitVec;

use crate::error::{Error, Result};
use crate::graph::{Graph, Window};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone)]
pub struct Forest<'g> {
    host: &'g Graph,
    mask: BitVec,
    edges: Vec<usize>,
    component: Vec<usize>,
    component_count: usize,
    roots: Option<Vec<usize>>,
}

impl PartialEq for Forest<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.host, other.host)
            && self.edges == other.edges
            && self.roots == other.roots
    }
}

impl Eq for Forest<'_> {}

impl<'g> Forest<'g> {
    /// Validates an edge subset: ids in range, no repeats, no cycle (self-loops count as cycles).
    pub fn new(host: &'g Graph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        let mut mask = BitVec::repeat(false, host.edge_count());
        let mut uf = UnionFind::new(host.vertex_count());
        for &e in &edges {
            if e >= host.edge_count() {
                return Err(Error::invalid(format!(
                    "edge id {e} outside 0..{}",
                    host.edge_count()
                )));
            }
            if mask[e] {
                return Err(Error::invalid(format!("edge id {e} listed twice")));
            }
            mask.set(e, true);
            let (u, v) = host.edge(e);
            if !uf.union(u, v) {
                return Err(Error::Cycle { edge: e });
            }
        }
        let component_count = uf.set_count();
        Ok(Forest {
            host,
            mask,
            edges,
            component: uf.labels(),
            component_count,
            roots: None,
        })
    }

    /// A forest in which every component must contain at least one of `roots`.
    pub fn rooted(host: &'g Graph, edges: Vec<usize>, mut roots: Vec<usize>) -> Result<Self> {
        let mut f = Self::new(host, edges)?;
        roots.sort_unstable();
        roots.dedup();
        let mut has_root = vec![false; f.component_count];
        for &r in &roots {
            host.check_vertex(r)?;
            has_root[f.component[r]] = true;
        }
        if let Some(c) = has_root.iter().position(|&h| !h) {
            let v = f.component.iter().position(|&x| x == c).unwrap();
            return Err(Error::invalid(format!(
                "component containing vertex {v} has no root"
            )));
        }
        f.roots = Some(roots);
        Ok(f)
    }

    pub fn host(&self) -> &'g Graph {
        self.host
    }

    /// Sorted edge ids.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.mask[e]
    }

    pub fn mask(&self) -> &BitVec {
        &self.mask
    }

    /// Component label of `v`; labels are dense and numbered by smallest vertex.
    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn component_labels(&self) -> &[usize] {
        &self.component
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn roots(&self) -> Option<&[usize]> {
        self.roots.as_deref()
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.component_count == 1
    }

    /// Forest adjacency: for each vertex the `(neighbor, edge id)` pairs of forest edges.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.host.vertex_count()];
        for &e in &self.edges {
            let (u, v) = self.host.edge(e);
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        adj
    }

    /// Splits the forest edges into those internal to the window and the rest
    /// (edges straddling the window rim go to the outside part).
    pub fn split_by_window(&self, w: &Window<'_>) -> (Vec<usize>, Vec<usize>) {
        self.edges.iter().partition(|&&e| w.is_internal_edge(e))
    }

    /// Edge ids restricted to a window: the pattern `F_H`.
    pub fn window_pattern(&self, w: &Window<'_>) -> Vec<usize> {
        self.split_by_window(w).0
    }

    /// Every component contains at least one host-boundary vertex.
    pub fn every_component_meets_boundary(&self) -> bool {
        let mut touch = vec![false; self.component_count];
        for &b in self.host.boundary() {
            touch[self.component[b]] = true;
        }
        touch.into_iter().all(|t| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_box;

    #[test]
    fn rejects_cycles_and_bad_ids() {
        let c4 = build_box(2, 2).unwrap();
        assert!(Forest::new(&c4, vec![0, 1, 2]).is_ok());
        assert_eq!(
            Forest::new(&c4, vec![0, 1, 2, 3]).unwrap_err(),
            Error::Cycle { edge: 3 }
        );
        assert!(Forest::new(&c4, vec![9]).is_err());
        assert!(Forest::new(&c4, vec![1, 1]).is_err());
        let looped = Graph::new(2, vec![(0, 0), (0, 1)], vec![]).unwrap();
        assert!(matches!(
            Forest::new(&looped, vec![0]),
            Err(Error::Cycle { edge: 0 })
        ));
    }

    #[test]
    fn components_and_roots() {
        let p = build_box(1, 4).unwrap();
        let f = Forest::new(&p, vec![2, 0]).unwrap();
        assert_eq!(f.edges(), &[0, 2]);
        assert_eq!(f.component_count(), 2);
        assert_eq!(f.component_labels(), &[0, 0, 1, 1]);
        assert!(f.every_component_meets_boundary());
        assert!(Forest::rooted(&p, vec![0, 2], vec![0]).is_err());
        let r = Forest::rooted(&p, vec![0, 2], vec![3, 0]).unwrap();
        assert_eq!(r.roots(), Some(&[0, 3][..]));
    }
}
