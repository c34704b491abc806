//! Finite multigraphs with a designated boundary, Z^d box and torus generators,
//! vertex-identification quotients and induced windows.
//!
//! Vertex ids are dense `0..n`, edge ids dense `0..m`. Parallel edges and self-loops
//! are allowed; self-loops never enter spanning forests but keep their ids so that
//! edge ids survive quotienting unchanged.

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Default cap on the number of vertices of any constructed graph.
pub const DEFAULT_VERTEX_LIMIT: usize = 1 << 24;

/// Integer coordinates of lattice vertices, stored flat (`dim` entries per vertex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coords {
    dim: usize,
    side: usize,
    flat: Vec<i64>,
}

impl Coords {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn of(&self, v: usize) -> &[i64] {
        &self.flat[v * self.dim..(v + 1) * self.dim]
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    coords: Option<Coords>,
    orbit: Option<Vec<u32>>,
    // CSR adjacency over non-loop edge slots: (neighbor, edge id).
    offsets: Vec<usize>,
    slots: Vec<(usize, usize)>,
    components: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges && self.boundary == other.boundary
    }
}

impl Graph {
    /// Builds a graph from an edge list and an explicit boundary set.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, boundary: Vec<usize>) -> Result<Self> {
        Self::with_limit(n, edges, boundary, DEFAULT_VERTEX_LIMIT)
    }

    pub fn with_limit(
        n: usize,
        edges: Vec<(usize, usize)>,
        mut boundary: Vec<usize>,
        limit: usize,
    ) -> Result<Self> {
        if n > limit {
            return Err(Error::Capacity {
                what: "vertex count",
                requested: n as u128,
                limit: limit as u128,
            });
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge {i} = ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
        }
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&b) = boundary.last() {
            if b >= n {
                return Err(Error::invalid(format!(
                    "boundary vertex {b} outside 0..{n}"
                )));
            }
        }
        let mut is_boundary = vec![false; n];
        for &b in &boundary {
            is_boundary[b] = true;
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            if u != v {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut slots = vec![(0, 0); *offsets.last().unwrap()];
        let mut uf = UnionFind::new(n);
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                continue;
            }
            slots[fill[u]] = (v, e);
            fill[u] += 1;
            slots[fill[v]] = (u, e);
            fill[v] += 1;
            uf.union(u, v);
        }

        Ok(Graph {
            n,
            edges,
            boundary,
            is_boundary,
            coords: None,
            orbit: None,
            offsets,
            slots,
            components: uf.set_count(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn is_self_loop(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        u == v
    }

    /// Sorted boundary vertex ids.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn coords(&self) -> Option<&Coords> {
        self.coords.as_ref()
    }

    /// Orbit class of `v`; 0 for every vertex unless labels were attached.
    pub fn orbit_label(&self, v: usize) -> u32 {
        self.orbit.as_ref().map_or(0, |o| o[v])
    }

    pub fn with_orbit_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid(format!(
                "expected {} orbit labels, got {}",
                self.n,
                labels.len()
            )));
        }
        self.orbit = Some(labels);
        Ok(self)
    }

    /// Incident non-loop edge slots of `v` as `(neighbor, edge id)`; parallel edges repeat.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.slots[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Degree counting parallel edges, ignoring self-loops.
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components <= 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected {
                components: self.components,
            })
        }
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::invalid(format!("vertex {v} outside 0..{}", self.n)))
        }
    }

    /// Breadth-first graph distances from a set of sources, stopping beyond `max_depth`.
    /// Unreached vertices get `usize::MAX`.
    pub fn bfs_distances(&self, sources: &[usize], max_depth: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            if d >= max_depth {
                continue;
            }
            for &(w, _) in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn lattice_volume(dim: usize, side: usize, limit: usize) -> Result<usize> {
    if dim == 0 || side == 0 {
        return Err(Error::invalid("dim and side must be at least 1"));
    }
    let mut vol: u128 = 1;
    for _ in 0..dim {
        vol = vol.saturating_mul(side as u128);
    }
    if vol > limit as u128 {
        return Err(Error::Capacity {
            what: "lattice vertex count",
            requested: vol,
            limit: limit as u128,
        });
    }
    Ok(vol as usize)
}

fn lattice_coords(dim: usize, side: usize, n: usize) -> Coords {
    let mut flat = Vec::with_capacity(n * dim);
    for v in 0..n {
        let mut r = v;
        for _ in 0..dim {
            flat.push((r % side) as i64);
            r /= side;
        }
    }
    Coords { dim, side, flat }
}

/// The box `{0..side-1}^dim` of Z^dim. Vertex `v` has coordinates given by its base-`side`
/// digits, least significant first. The boundary is every vertex with a coordinate
/// equal to 0 or `side - 1`.
pub fn build_box(dim: usize, side: usize) -> Result<Graph> {
    build_box_with_limit(dim, side, DEFAULT_VERTEX_LIMIT)
}

pub fn build_box_with_limit(dim: usize, side: usize, limit: usize) -> Result<Graph> {
    let n = lattice_volume(dim, side, limit)?;
    let coords = lattice_coords(dim, side, n);
    let mut edges = Vec::with_capacity(dim * n);
    let mut boundary = Vec::new();
    for v in 0..n {
        let c = coords.of(v);
        if c.iter().any(|&x| x == 0 || x == side as i64 - 1) {
            boundary.push(v);
        }
        let mut stride = 1;
        for &x in c {
            if (x as usize) + 1 < side {
                edges.push((v, v + stride));
            }
            stride *= side;
        }
    }
    let mut g = Graph::with_limit(n, edges, boundary, limit)?;
    g.coords = Some(coords);
    Ok(g)
}

/// Nearest-neighbour torus `(Z/side)^dim`; no boundary, regular of degree `2 dim`.
pub fn build_torus(dim: usize, side: usize) -> Result<Graph> {
    build_torus_with_limit(dim, side, DEFAULT_VERTEX_LIMIT)
}

pub fn build_torus_with_limit(dim: usize, side: usize, limit: usize) -> Result<Graph> {
    if side < 3 {
        return Err(Error::invalid(format!(
            "torus side must be at least 3, got {side}"
        )));
    }
    let n = lattice_volume(dim, side, limit)?;
    let coords = lattice_coords(dim, side, n);
    let mut edges = Vec::with_capacity(dim * n);
    for v in 0..n {
        let mut stride = 1;
        for &x in coords.of(v) {
            let w = if (x as usize) + 1 < side {
                v + stride
            } else {
                v + stride - side * stride
            };
            edges.push((v, w));
            stride *= side;
        }
    }
    let mut g = Graph::with_limit(n, edges, Vec::new(), limit)?;
    g.coords = Some(coords);
    Ok(g)
}

/// Result of identifying classes of vertices.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub graph: Graph,
    /// Original vertex -> quotient vertex.
    pub vertex_map: Vec<usize>,
    /// Quotient edge id -> original edge id.
    pub edge_origin: Vec<usize>,
    /// Quotient edges that became self-loops.
    pub self_loops: Vec<usize>,
}

impl Quotient {
    /// Maps a set of quotient edge ids back to original edge ids.
    pub fn pull_back(&self, edges: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = edges.iter().map(|&e| self.edge_origin[e]).collect();
        out.sort_unstable();
        out
    }
}

/// Identifies each class of `classes` to a single vertex. Edge ids and multiplicities are
/// preserved; edges inside a class become flagged self-loops. Quotient vertices are
/// numbered in order of the smallest original vertex they contain. The quotient boundary
/// is the image of the original boundary.
pub fn contract(g: &Graph, classes: &[Vec<usize>]) -> Result<Quotient> {
    let n = g.vertex_count();
    let mut class_of = vec![usize::MAX; n];
    for (ci, class) in classes.iter().enumerate() {
        for &v in class {
            g.check_vertex(v)?;
            if class_of[v] != usize::MAX {
                return Err(Error::invalid(format!(
                    "vertex {v} appears in more than one class (or twice)"
                )));
            }
            class_of[v] = ci;
        }
    }
    let mut vertex_map = vec![usize::MAX; n];
    let mut class_id = vec![usize::MAX; classes.len()];
    let mut next = 0;
    for v in 0..n {
        let c = class_of[v];
        if c == usize::MAX {
            vertex_map[v] = next;
            next += 1;
        } else {
            if class_id[c] == usize::MAX {
                class_id[c] = next;
                next += 1;
            }
            vertex_map[v] = class_id[c];
        }
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (vertex_map[u], vertex_map[v]))
        .collect();
    let self_loops = edges
        .iter()
        .enumerate()
        .filter(|(_, (u, v))| u == v)
        .map(|(e, _)| e)
        .collect();
    let boundary = g.boundary().iter().map(|&b| vertex_map[b]).collect();
    let graph = Graph::new(next, edges, boundary)?;
    Ok(Quotient {
        graph,
        vertex_map,
        edge_origin: (0..g.edge_count()).collect(),
        self_loops,
    })
}

/// A vertex subset of a host graph with its induced edges and its rim.
#[derive(Debug, Clone)]
pub struct Window<'g> {
    host: &'g Graph,
    vertices: Vec<usize>,
    member: Vec<bool>,
    boundary: Vec<usize>,
    internal_edges: Vec<usize>,
    straddling_edges: Vec<usize>,
}

impl<'g> Window<'g> {
    pub fn host(&self) -> &'g Graph {
        self.host
    }

    /// Sorted window vertices.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member[v]
    }

    /// Window vertices with a host neighbour outside the window (sorted).
    pub fn window_boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Host edges with both endpoints in the window (self-loops included).
    pub fn internal_edges(&self) -> &[usize] {
        &self.internal_edges
    }

    /// Host edges with exactly one endpoint in the window.
    pub fn straddling_edges(&self) -> &[usize] {
        &self.straddling_edges
    }

    pub fn is_internal_edge(&self, e: usize) -> bool {
        let (u, v) = self.host.edge(e);
        self.member[u] && self.member[v]
    }

    /// Position of each window vertex in `vertices()`; `usize::MAX` outside.
    pub fn local_index(&self) -> Vec<usize> {
        let mut idx = vec![usize::MAX; self.host.vertex_count()];
        for (i, &v) in self.vertices.iter().enumerate() {
            idx[v] = i;
        }
        idx
    }

    /// The window as a standalone graph on local ids `0..|vertices|`; its edge `i` is
    /// `internal_edges()[i]` and its boundary is the window boundary.
    pub fn local_graph(&self) -> Graph {
        let idx = self.local_index();
        let edges = self
            .internal_edges
            .iter()
            .map(|&e| {
                let (u, v) = self.host.edge(e);
                (idx[u], idx[v])
            })
            .collect();
        let boundary = self.boundary.iter().map(|&b| idx[b]).collect();
        Graph::new(self.vertices.len(), edges, boundary).expect("window ids are valid")
    }
}

pub fn induced_window<'g>(g: &'g Graph, vertices: &[usize]) -> Result<Window<'g>> {
    if vertices.is_empty() {
        return Err(Error::invalid("window vertex set is empty"));
    }
    let mut member = vec![false; g.vertex_count()];
    for &v in vertices {
        g.check_vertex(v)?;
        member[v] = true;
    }
    let vertices: Vec<usize> = (0..g.vertex_count()).filter(|&v| member[v]).collect();
    let boundary = vertices
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().any(|&(w, _)| !member[w]))
        .collect();
    let mut internal_edges = Vec::new();
    let mut straddling_edges = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        match (member[u], member[v]) {
            (true, true) => internal_edges.push(e),
            (true, false) | (false, true) => straddling_edges.push(e),
            _ => {}
        }
    }
    Ok(Window {
        host: g,
        vertices,
        member,
        boundary,
        internal_edges,
        straddling_edges,
    })
}

/// Vertices of a lattice box in the axis-aligned block `corner + [0, extent)`.
pub fn box_block(g: &Graph, corner: &[usize], extent: &[usize]) -> Result<Vec<usize>> {
    let coords = g
        .coords()
        .ok_or_else(|| Error::invalid("block selection needs lattice coordinates"))?;
    if corner.len() != coords.dim() || extent.len() != coords.dim() {
        return Err(Error::invalid(format!(
            "block corner/extent must have {} components",
            coords.dim()
        )));
    }
    for i in 0..coords.dim() {
        if extent[i] == 0 || corner[i] + extent[i] > coords.side() {
            return Err(Error::invalid(format!(
                "block axis {i}: corner {} + extent {} exceeds side {}",
                corner[i],
                extent[i],
                coords.side()
            )));
        }
    }
    Ok((0..g.vertex_count())
        .filter(|&v| {
            coords
                .of(v)
                .iter()
                .zip(corner.iter().zip(extent))
                .all(|(&x, (&c, &e))| x >= c as i64 && x < (c + e) as i64)
        })
        .collect())
}

/// Vertex of a lattice graph at the given coordinates.
pub fn lattice_vertex(g: &Graph, at: &[usize]) -> Result<usize> {
    let coords = g
        .coords()
        .ok_or_else(|| Error::invalid("graph has no lattice coordinates"))?;
    if at.len() != coords.dim() || at.iter().any(|&x| x >= coords.side()) {
        return Err(Error::invalid(format!(
            "coordinates {at:?} outside the lattice"
        )));
    }
    let mut v = 0;
    for &x in at.iter().rev() {
        v = v * coords.side() + x;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_small_cases() {
        let p = build_box(1, 3).unwrap();
        assert_eq!(p.vertex_count(), 3);
        assert_eq!(p.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(p.boundary(), &[0, 2]);

        let sq = build_box(2, 2).unwrap();
        assert_eq!(sq.vertex_count(), 4);
        assert_eq!(sq.edge_count(), 4);
        assert_eq!(sq.boundary().len(), 4);
        assert!((0..4).all(|v| sq.degree(v) == 2));
    }

    #[test]
    fn box_2_4_by_enumeration() {
        let g = build_box(2, 4).unwrap();
        // independent count: pairs of lattice points at unit distance inside the box
        let pts: Vec<(i32, i32)> = (0..4).flat_map(|x| (0..4).map(move |y| (x, y))).collect();
        let mut pairs = 0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                if (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1 {
                    pairs += 1;
                }
            }
        }
        let rim = pts
            .iter()
            .filter(|p| p.0 == 0 || p.0 == 3 || p.1 == 0 || p.1 == 3)
            .count();
        assert_eq!(g.vertex_count(), 16);
        assert_eq!(g.edge_count(), pairs);
        assert_eq!(pairs, 24);
        assert_eq!(g.boundary().len(), rim);
        assert_eq!(rim, 12);
        assert_eq!(g.boundary().len() as f64 / g.vertex_count() as f64, 0.75);
    }

    #[test]
    fn box_boundary_ratio_formula() {
        for dim in 1..=3u32 {
            for side in 2..=20usize {
                if side.pow(dim) > 10_000 {
                    continue;
                }
                let g = build_box(dim as usize, side).unwrap();
                let inner = (side - 2).pow(dim);
                assert_eq!(
                    g.boundary().len(),
                    side.pow(dim) - inner,
                    "d={dim} n={side}"
                );
                assert!(g.is_connected());
            }
        }
    }

    #[test]
    fn box_capacity_error() {
        let err = build_box_with_limit(2, 100, 1000).unwrap_err();
        assert!(err.is_capacity());
        assert!(build_box(40, 2).unwrap_err().is_capacity());
    }

    #[test]
    fn torus_cases() {
        let c5 = build_torus(1, 5).unwrap();
        assert_eq!(c5.edge_count(), 5);
        assert!((0..5).all(|v| c5.degree(v) == 2));
        assert!(c5.boundary().is_empty());

        let t3 = build_torus(2, 3).unwrap();
        assert_eq!((t3.vertex_count(), t3.edge_count()), (9, 18));
        assert!((0..9).all(|v| t3.degree(v) == 4));

        let t4 = build_torus(2, 4).unwrap();
        assert_eq!((t4.vertex_count(), t4.edge_count()), (16, 32));
        // no parallel edges
        let mut seen: Vec<(usize, usize)> = t4
            .edges()
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 32);
        assert!(build_torus(2, 2).is_err());
    }

    #[test]
    fn contract_examples() {
        let p = build_box(1, 3).unwrap();
        let q = contract(&p, &[vec![0, 2]]).unwrap();
        assert_eq!(q.graph.vertex_count(), 2);
        assert_eq!(q.graph.edges(), &[(0, 1), (1, 0)]);
        assert!(q.self_loops.is_empty());

        let c4 = build_box(2, 2).unwrap(); // 0-1, 0-2, 1-3, 2-3
        let q = contract(&c4, &[vec![0, 3]]).unwrap();
        assert_eq!(q.graph.vertex_count(), 3);
        assert_eq!(q.graph.edge_count(), 4);
        assert!(q.self_loops.is_empty());

        let q = contract(&c4, &[vec![0, 1]]).unwrap();
        assert_eq!(q.self_loops, vec![0]);
        assert!(q.graph.is_self_loop(0));

        assert!(contract(&c4, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(contract(&c4, &[vec![7]]).is_err());
    }

    #[test]
    fn window_examples() {
        let g = build_box(2, 5).unwrap();
        let all: Vec<usize> = (0..25).collect();
        let w = induced_window(&g, &all).unwrap();
        assert!(w.window_boundary().is_empty());
        assert_eq!(w.internal_edges().len(), g.edge_count());

        let center = lattice_vertex(&g, &[2, 2]).unwrap();
        let w = induced_window(&g, &[center]).unwrap();
        assert_eq!(w.window_boundary(), &[center]);
        assert_eq!(w.straddling_edges().len(), 4);

        let g4 = build_box(2, 4).unwrap();
        let block = box_block(&g4, &[1, 1], &[2, 2]).unwrap();
        let w = induced_window(&g4, &block).unwrap();
        assert_eq!(w.vertices().len(), 4);
        assert_eq!(w.internal_edges().len(), 4);
        assert_eq!(w.window_boundary().len(), 4);

        assert!(induced_window(&g4, &[]).is_err());
    }
}
