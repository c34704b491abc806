//! Forest statistics: components, trunks, near intersections, fresh near collision points,
//! Monte Carlo estimates of the disjoint-paths event, and exact hitting probabilities.
//!
//! Trunks are finite proxies for bi-infinite paths: forest paths joining two distinct
//! host-boundary vertices. Distances are graph distances in the host graph.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::gibbs::validate_forest_path;
use crate::graph::Graph;
use crate::kirchhoff::{enumerate_forests, ForestConstraint};
use crate::linalg::{EnvelopeCholesky, SymmetricMatrix};
use crate::rng::{RandomStream, StreamRng};
use crate::sampler::{wilson_rooted_forest_ordered, WalkPath};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub component_count: usize,
    /// component size -> number of components of that size
    pub size_histogram: BTreeMap<usize, usize>,
    /// components containing at least one host-boundary vertex
    pub boundary_touch_count: usize,
}

pub fn component_stats(f: &Forest<'_>) -> ComponentStats {
    let g = f.host();
    let mut sizes = vec![0usize; f.component_count()];
    let mut touches = vec![false; f.component_count()];
    for v in 0..g.vertex_count() {
        let c = f.component_of(v);
        sizes[c] += 1;
        touches[c] |= g.is_boundary(v);
    }
    let mut size_histogram = BTreeMap::new();
    for s in sizes {
        *size_histogram.entry(s).or_insert(0) += 1;
    }
    ComponentStats {
        component_count: f.component_count(),
        size_histogram,
        boundary_touch_count: touches.into_iter().filter(|&t| t).count(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrunkSet {
    /// One boundary-to-boundary forest path per tree touching the boundary twice or more.
    pub trunks: Vec<WalkPath>,
    /// `true` while a trunk runs from its smaller-id endpoint to its larger one.
    pub forward: Vec<bool>,
    /// Sorted first elements of the trunks.
    pub c_b: Vec<usize>,
    /// Sorted last elements of the trunks.
    pub c_f: Vec<usize>,
    /// `c_f` plus one boundary vertex (the smallest) from each tree holding no trunk.
    pub c_f_bar: Vec<usize>,
    extra_roots: Vec<usize>,
}

impl TrunkSet {
    fn refresh_ends(&mut self) {
        self.c_b = self.trunks.iter().filter_map(WalkPath::first).collect();
        self.c_f = self.trunks.iter().filter_map(WalkPath::last).collect();
        self.c_b.sort_unstable();
        self.c_f.sort_unstable();
        self.c_f_bar = self.c_f.iter().chain(&self.extra_roots).copied().collect();
        self.c_f_bar.sort_unstable();
    }

    /// Flips a fair coin per trunk to choose its direction.
    pub fn orient_randomly(&mut self, rng: &mut StreamRng) {
        for (t, fwd) in self.trunks.iter_mut().zip(self.forward.iter_mut()) {
            if rng.coin() {
                t.vertices.reverse();
                *fwd = !*fwd;
            }
        }
        self.refresh_ends();
    }

    pub fn len(&self) -> usize {
        self.trunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trunks.is_empty()
    }
}

/// Tree path between `from` and every vertex of its component, via BFS parents.
fn tree_bfs(adj: &[Vec<(usize, usize)>], from: usize, dist: &mut [usize], parent: &mut [usize]) {
    let mut queue = std::collections::VecDeque::from([from]);
    dist[from] = 0;
    parent[from] = usize::MAX;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
}

/// For each tree with two or more boundary vertices, the forest path between the pair of
/// boundary vertices at maximal tree distance (ties: lexicographically smallest pair).
pub fn detect_trunks(g: &Graph, f: &Forest<'_>) -> TrunkSet {
    let adj = f.adjacency();
    let mut contacts: Vec<Vec<usize>> = vec![Vec::new(); f.component_count()];
    for &b in g.boundary() {
        contacts[f.component_of(b)].push(b);
    }
    let n = g.vertex_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut trunks = Vec::new();
    let mut extra_roots = Vec::new();
    for list in &contacts {
        match list.len() {
            0 => {}
            1 => extra_roots.push(list[0]),
            _ => {
                let mut best: Option<(usize, usize, usize)> = None;
                for (i, &u) in list.iter().enumerate() {
                    tree_bfs(&adj, u, &mut dist, &mut parent);
                    for &v in &list[i + 1..] {
                        let better = match best {
                            None => true,
                            Some((d, _, _)) => dist[v] > d,
                        };
                        if better {
                            best = Some((dist[v], u, v));
                        }
                    }
                    reset_component(&adj, u, &mut dist);
                }
                let (_, u, v) = best.unwrap();
                tree_bfs(&adj, u, &mut dist, &mut parent);
                let mut path = vec![v];
                let mut x = v;
                while x != u {
                    x = parent[x];
                    path.push(x);
                }
                path.reverse();
                reset_component(&adj, u, &mut dist);
                trunks.push(WalkPath::new(path));
            }
        }
    }
    let forward = vec![true; trunks.len()];
    let mut set = TrunkSet {
        trunks,
        forward,
        c_b: Vec::new(),
        c_f: Vec::new(),
        c_f_bar: Vec::new(),
        extra_roots,
    };
    set.refresh_ends();
    set
}

fn reset_component(adj: &[Vec<(usize, usize)>], from: usize, dist: &mut [usize]) {
    let mut stack = vec![from];
    dist[from] = usize::MAX;
    while let Some(v) = stack.pop() {
        for &(w, _) in &adj[v] {
            if dist[w] != usize::MAX {
                dist[w] = usize::MAX;
                stack.push(w);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearIntersectionConfig {
    /// Distance radius.
    pub k: usize,
    /// Count only vertices with this orbit label.
    pub orbit_filter: Option<u32>,
    /// Count only vertices at graph distance at least `margin` from the host boundary.
    pub margin: usize,
}

impl NearIntersectionConfig {
    /// Radius `k` with the margin also set to `k`.
    pub fn new(k: usize) -> Self {
        NearIntersectionConfig {
            k,
            orbit_filter: None,
            margin: k,
        }
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_orbit(mut self, orbit: u32) -> Self {
        self.orbit_filter = Some(orbit);
        self
    }
}

/// Membership in the counting region: far enough from the boundary and in the orbit.
struct CountingRegion {
    ok: Vec<bool>,
}

impl CountingRegion {
    fn new(g: &Graph, cfg: &NearIntersectionConfig) -> Self {
        let to_boundary = if cfg.margin == 0 {
            vec![usize::MAX; g.vertex_count()]
        } else {
            g.bfs_distances(g.boundary(), cfg.margin)
        };
        let ok = (0..g.vertex_count())
            .map(|v| {
                to_boundary[v] >= cfg.margin
                    && cfg.orbit_filter.is_none_or(|o| g.orbit_label(v) == o)
            })
            .collect();
        CountingRegion { ok }
    }
}

/// Ordered pairs `(r, s)`, `r != s`, and vertices `v` of path `r` in the counting region
/// with graph distance at most `k` to path `s`.
pub fn near_intersections_among(
    g: &Graph,
    paths: &[WalkPath],
    cfg: &NearIntersectionConfig,
) -> u64 {
    let region = CountingRegion::new(g, cfg);
    near_intersections_with(g, paths, cfg, &region)
}

fn near_intersections_with(
    g: &Graph,
    paths: &[WalkPath],
    cfg: &NearIntersectionConfig,
    region: &CountingRegion,
) -> u64 {
    let mut total = 0u64;
    for (s, target) in paths.iter().enumerate() {
        let dist = g.bfs_distances(&target.vertices, cfg.k);
        for (r, source) in paths.iter().enumerate() {
            if r == s {
                continue;
            }
            total += source
                .vertices
                .iter()
                .filter(|&&v| region.ok[v] && dist[v] <= cfg.k)
                .count() as u64;
        }
    }
    total
}

pub fn count_near_intersections(g: &Graph, trunks: &TrunkSet, cfg: &NearIntersectionConfig) -> u64 {
    near_intersections_among(g, &trunks.trunks, cfg)
}

/// Fresh near collision points per path. For path `r`, scanning forward, a point counts if
/// it lies in the counting region, is within distance `k` of some earlier path, comes after
/// the previous counted point and is at distance at least `k` from it. Path 0 has none.
pub fn count_fncp(g: &Graph, paths: &[WalkPath], cfg: &NearIntersectionConfig) -> Vec<usize> {
    let region = CountingRegion::new(g, cfg);
    let mut out = Vec::with_capacity(paths.len());
    let mut earlier: Vec<usize> = Vec::new();
    for (r, path) in paths.iter().enumerate() {
        if r == 0 {
            out.push(0);
            earlier.extend(&path.vertices);
            continue;
        }
        let near = g.bfs_distances(&earlier, cfg.k);
        let mut count = 0;
        let mut last: Option<Vec<usize>> = None;
        for &p in &path.vertices {
            if !region.ok[p] || near[p] > cfg.k {
                continue;
            }
            let fresh = match &last {
                None => true,
                Some(from_last) => from_last[p] >= cfg.k,
            };
            if fresh {
                count += 1;
                // distances below k are all that matter for the freshness test
                last = Some(g.bfs_distances(&[p], cfg.k));
            }
        }
        out.push(count);
        earlier.extend(&path.vertices);
    }
    out
}

/// Wilson paths from `c_b` (in order) inside a forest rooted at `c_f_bar`: each path follows
/// the forest toward the roots and stops at a root or at a vertex of an earlier path.
pub fn wilson_paths(f: &Forest<'_>, c_b: &[usize], c_f_bar: &[usize]) -> Vec<WalkPath> {
    let g = f.host();
    let adj = f.adjacency();
    let mut parent = vec![usize::MAX; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue: std::collections::VecDeque<usize> = c_f_bar.iter().copied().collect();
    for &r in c_f_bar {
        seen[r] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut is_root = vec![false; g.vertex_count()];
    for &r in c_f_bar {
        is_root[r] = true;
    }
    let mut on_path = vec![false; g.vertex_count()];
    let mut paths = Vec::with_capacity(c_b.len());
    for &b in c_b {
        let mut path = vec![b];
        let mut v = b;
        while !is_root[v] && !on_path[v] && parent[v] != usize::MAX {
            v = parent[v];
            path.push(v);
        }
        for &x in &path {
            on_path[x] = true;
        }
        paths.push(WalkPath::new(path));
    }
    paths
}

/// Whether Wilson paths realize the event: pairwise disjoint, each ending at a root, with
/// at least `m` near intersections.
fn event_holds(
    g: &Graph,
    paths: &[WalkPath],
    is_root: &[bool],
    m: u64,
    cfg: &NearIntersectionConfig,
    region: &CountingRegion,
) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    for p in paths {
        match p.last() {
            Some(end) if is_root[end] => {}
            _ => return false,
        }
        for &v in &p.vertices {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
    }
    m == 0 || near_intersections_with(g, paths, cfg, region) >= m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    /// Wilson score 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

pub fn wilson_score_interval(hits: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if hits == samples {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

fn check_nu_sets(g: &Graph, c_b: &[usize], c_f_bar: &[usize]) -> Result<Vec<bool>> {
    let mut is_root = vec![false; g.vertex_count()];
    for &r in c_f_bar {
        g.check_vertex(r)?;
        is_root[r] = true;
    }
    for &b in c_b {
        g.check_vertex(b)?;
        if is_root[b] {
            return Err(Error::invalid(format!(
                "vertex {b} is in both the start set and the root set"
            )));
        }
    }
    Ok(is_root)
}

/// Monte Carlo estimate of the probability, under the uniform forest rooted at `c_f_bar`,
/// that the Wilson paths from `c_b` are disjoint, end at roots and have at least `m` near
/// intersections. Sample `i` uses `stream.substream(i)`.
pub fn estimate_nu_a(
    g: &Graph,
    c_b: &[usize],
    c_f_bar: &[usize],
    m: u64,
    cfg: &NearIntersectionConfig,
    stream: RandomStream,
    samples: u64,
) -> Result<ProbabilityEstimate> {
    if c_b.is_empty() || c_f_bar.is_empty() {
        return Ok(ProbabilityEstimate {
            hits: 0,
            samples,
            estimate: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
        });
    }
    let is_root = check_nu_sets(g, c_b, c_f_bar)?;
    let region = CountingRegion::new(g, cfg);
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| {
            let f = wilson_rooted_forest_ordered(g, c_f_bar, c_b, stream.substream(i))?;
            let paths = wilson_paths(&f, c_b, c_f_bar);
            Ok(event_holds(g, &paths, &is_root, m, cfg, &region) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let (ci_low, ci_high) = wilson_score_interval(hits, samples);
    Ok(ProbabilityEstimate {
        hits,
        samples,
        estimate: if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        },
        ci_low,
        ci_high,
    })
}

/// Least-squares slope of `ln p` against `x` with a normal 95% interval. The variance of
/// each `ln p_i` is taken from the delta method, `(1 - p) / (n p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn log_linear_slope(x: &[f64], estimates: &[ProbabilityEstimate]) -> Result<SlopeFit> {
    if x.len() != estimates.len() || x.len() < 2 {
        return Err(Error::invalid("slope needs at least two matched points"));
    }
    if let Some(e) = estimates.iter().find(|e| e.hits == 0) {
        return Err(Error::invalid(format!(
            "estimate with zero hits out of {} samples has no logarithm",
            e.samples
        )));
    }
    let xm = x.iter().sum::<f64>() / x.len() as f64;
    let y: Vec<f64> = estimates.iter().map(|e| e.estimate.ln()).collect();
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    let sxx: f64 = x.iter().map(|xi| (xi - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope needs at least two distinct x values"));
    }
    let slope = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (xi - xm) * (yi - ym))
        .sum::<f64>()
        / sxx;
    let var: f64 = x
        .iter()
        .zip(estimates)
        .map(|(xi, e)| (xi - xm).powi(2) * (1.0 - e.estimate) / (e.samples as f64 * e.estimate))
        .sum::<f64>()
        / (sxx * sxx);
    let std_error = var.sqrt();
    Ok(SlopeFit {
        slope,
        std_error,
        ci_low: slope - Z95 * std_error,
        ci_high: slope + Z95 * std_error,
    })
}

/// Exact value of the quantity [`estimate_nu_a`] estimates, by enumerating every rooted
/// forest. Only for tiny graphs.
pub fn nu_a_exact(
    g: &Graph,
    c_b: &[usize],
    c_f_bar: &[usize],
    m: u64,
    cfg: &NearIntersectionConfig,
) -> Result<f64> {
    if c_b.is_empty() || c_f_bar.is_empty() {
        return Ok(0.0);
    }
    let is_root = check_nu_sets(g, c_b, c_f_bar)?;
    let region = CountingRegion::new(g, cfg);
    let forests = enumerate_forests(g, &ForestConstraint::RootedExactlyOne(c_f_bar.to_vec()))?;
    let hits = forests
        .iter()
        .filter(|f| event_holds(g, &wilson_paths(f, c_b, c_f_bar), &is_root, m, cfg, &region))
        .count();
    Ok(hits as f64 / forests.len() as f64)
}

/// Solution of the Dirichlet problem for simple random walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingField {
    /// Probability of reaching `target` before `absorbing`, per vertex.
    pub values: Vec<f64>,
    /// Max-norm residual of the harmonic equations at free vertices.
    pub residual: f64,
}

/// Probability that simple random walk from each vertex hits `target` before `absorbing`:
/// 1 on target, 0 on absorbing, harmonic elsewhere. Solved directly with a sparse
/// Cholesky factorization plus one refinement step.
pub fn hitting_probability_exact(
    g: &Graph,
    target: &[usize],
    absorbing: &[usize],
) -> Result<HittingField> {
    if target.is_empty() && absorbing.is_empty() {
        return Err(Error::invalid("target and absorbing sets are both empty"));
    }
    g.require_connected()?;
    let n = g.vertex_count();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &t in target {
        g.check_vertex(t)?;
        fixed[t] = Some(1.0);
    }
    for &a in absorbing {
        g.check_vertex(a)?;
        if fixed[a].is_some() {
            return Err(Error::invalid(format!(
                "vertex {a} is in both target and absorbing sets"
            )));
        }
        fixed[a] = Some(0.0);
    }
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        index[v] = i;
    }
    let mut a = SymmetricMatrix::new(free.len());
    let mut rhs = vec![0.0; free.len()];
    for (i, &v) in free.iter().enumerate() {
        a.add_diagonal(i, g.degree(v) as f64);
        for &(w, _) in g.neighbors(v) {
            match fixed[w] {
                Some(val) => rhs[i] += val,
                None if index[w] > i => a.add_off_diagonal(i, index[w], -1.0),
                None => {}
            }
        }
    }
    let mut values: Vec<f64> = fixed.iter().map(|x| x.unwrap_or(0.0)).collect();
    let mut residual = 0.0;
    if !free.is_empty() {
        let chol = EnvelopeCholesky::factor(a.clone())?;
        let mut x = chol.solve(&rhs);
        let r: Vec<f64> = a
            .mul_vec(&x)
            .iter()
            .zip(&rhs)
            .map(|(ax, b)| b - ax)
            .collect();
        let dx = chol.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        residual = a
            .mul_vec(&x)
            .iter()
            .zip(&rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max);
        for (i, &v) in free.iter().enumerate() {
            values[v] = x[i];
        }
    }
    Ok(HittingField { values, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    /// max |value(v) - mean of neighbours| over vertices in neither set
    pub max_defect: f64,
    pub worst_vertex: Option<usize>,
    /// min (mean of neighbours - value(v)) over target vertices
    pub min_subharmonic_margin: f64,
    pub worst_target: Option<usize>,
}

/// Neighbour means count parallel edges with multiplicity and ignore self-loops.
pub fn check_harmonicity(
    g: &Graph,
    values: &[f64],
    target: &[usize],
    absorbing: &[usize],
) -> Result<HarmonicityReport> {
    if values.len() != g.vertex_count() {
        return Err(Error::invalid(format!(
            "expected {} values, got {}",
            g.vertex_count(),
            values.len()
        )));
    }
    let mut role = vec![0u8; g.vertex_count()];
    for &t in target {
        g.check_vertex(t)?;
        role[t] = 1;
    }
    for &a in absorbing {
        g.check_vertex(a)?;
        role[a] = 2;
    }
    let mean = |v: usize| {
        let nb = g.neighbors(v);
        if nb.is_empty() {
            values[v]
        } else {
            nb.iter().map(|&(w, _)| values[w]).sum::<f64>() / nb.len() as f64
        }
    };
    let mut report = HarmonicityReport {
        max_defect: 0.0,
        worst_vertex: None,
        min_subharmonic_margin: f64::INFINITY,
        worst_target: None,
    };
    for v in 0..g.vertex_count() {
        match role[v] {
            0 => {
                let d = (values[v] - mean(v)).abs();
                if report.worst_vertex.is_none() || d > report.max_defect {
                    report.max_defect = d;
                    report.worst_vertex = Some(v);
                }
            }
            1 => {
                let margin = mean(v) - values[v];
                if margin < report.min_subharmonic_margin {
                    report.min_subharmonic_margin = margin;
                    report.worst_target = Some(v);
                }
            }
            _ => {}
        }
    }
    Ok(report)
}

/// Checks the trunk set against its forest (used by tests and the CLI).
pub fn validate_trunks(f: &Forest<'_>, trunks: &TrunkSet) -> Result<()> {
    let g = f.host();
    let mut seen = vec![false; g.vertex_count()];
    for t in &trunks.trunks {
        validate_forest_path(f, t)?;
        let (a, b) = (t.first().unwrap(), t.last().unwrap());
        if a == b || !g.is_boundary(a) || !g.is_boundary(b) {
            return Err(Error::invalid(
                "trunk endpoints must be distinct boundary vertices",
            ));
        }
        for &v in &t.vertices {
            if seen[v] {
                return Err(Error::invalid("trunks overlap"));
            }
            seen[v] = true;
        }
    }
    Ok(())
}
