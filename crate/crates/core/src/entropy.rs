//! Entropy per site: exact log-counts on finite boxes, a quadrature oracle for the
//! thermodynamic limit, and plug-in estimates from samples on a window.
//!
//! All logarithms are natural. Per-site values divide by the vertex count of the graph.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::graph::{box_block, build_box, contract, induced_window, Graph, Window};
use crate::kirchhoff::{
    count_forests, count_rooted_forests, pattern_probabilities, ForestConstraint,
};
use crate::rng::RandomStream;
use crate::sampler::{sample_boundary_mode, BoundaryMode};

/// Smallest quadrature grid accepted by [`torus_entropy_oracle`].
pub const MIN_QUADRATURE_POINTS: usize = 64;
/// Largest window pattern space for [`plugin_entropy`] (2^24).
pub const PLUGIN_EDGE_LIMIT: usize = 24;
/// Fewest samples accepted by [`plugin_entropy`].
pub const PLUGIN_MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMethod {
    WiredExact,
    #[serde(rename = "mu_Gn-enumerated")]
    MuGnEnumerated,
    TorusIntegral,
    PluginEmpirical,
}

impl EntropyMethod {
    pub fn tag(self) -> &'static str {
        match self {
            EntropyMethod::WiredExact => "wired-exact",
            EntropyMethod::MuGnEnumerated => "mu_Gn-enumerated",
            EntropyMethod::TorusIntegral => "torus-integral",
            EntropyMethod::PluginEmpirical => "plugin-empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub graph: String,
    pub vertex_count: usize,
    pub log_count: f64,
    pub per_site: f64,
    pub method: EntropyMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub records: Vec<EntropyRecord>,
    pub limit_estimate: Option<f64>,
}

/// Log of the support size of the finite-volume law on `g`: rooted forests with the
/// boundary as roots (wired) or forests whose every component meets the boundary.
pub fn log_support_size(g: &Graph, method: EntropyMethod) -> Result<f64> {
    match method {
        EntropyMethod::WiredExact => Ok(count_rooted_forests(g, g.boundary())?.value),
        EntropyMethod::MuGnEnumerated => {
            let n = count_forests(g, &ForestConstraint::BoundaryAtLeastOne)?;
            Ok((n as f64).ln())
        }
        other => Err(Error::invalid(format!(
            "method {} does not count a support",
            other.tag()
        ))),
    }
}

/// Per-site log-count `ln N / |V|` on boxes of the given sides.
pub fn per_site_entropy_sequence(
    dim: usize,
    sides: &[usize],
    method: EntropyMethod,
) -> Result<EntropyReport> {
    if !matches!(
        method,
        EntropyMethod::WiredExact | EntropyMethod::MuGnEnumerated
    ) {
        return Err(Error::invalid(format!(
            "method {} has no per-site sequence",
            method.tag()
        )));
    }
    let records = sides
        .iter()
        .map(|&side| {
            let g = build_box(dim, side)?;
            let log_count = log_support_size(&g, method)?;
            Ok(EntropyRecord {
                graph: format!("box(dim={dim},side={side})"),
                vertex_count: g.vertex_count(),
                log_count,
                per_site: log_count / g.vertex_count() as f64,
                method,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        records,
        limit_estimate: None,
    })
}

/// Limit of the per-site spanning-tree log-count on tori: zero in dimension 1 and
/// `(2π)^-2 ∬ ln(4 - 2cos x - 2cos y)` in dimension 2. The periodic trapezoid rule is
/// used on the half-step offset grid, which avoids the logarithmic singularity at the
/// origin.
pub fn torus_entropy_oracle(dim: usize, points: usize) -> Result<f64> {
    if points < MIN_QUADRATURE_POINTS {
        return Err(Error::invalid(format!(
            "quadrature_points must be at least {MIN_QUADRATURE_POINTS}, got {points}"
        )));
    }
    match dim {
        1 => Ok(0.0),
        2 => {
            let h = 2.0 * PI / points as f64;
            let c: Vec<f64> = (0..points)
                .map(|i| 2.0 * ((i as f64 + 0.5) * h).cos())
                .collect();
            let sum: f64 = c
                .par_iter()
                .map(|&cx| c.iter().map(|&cy| (4.0 - cx - cy).ln()).sum::<f64>())
                .sum();
            Ok(sum / (points * points) as f64)
        }
        _ => Err(Error::invalid(format!("dim must be 1 or 2, got {dim}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// jackknife standard error
    pub std_error: f64,
    pub samples: usize,
    pub distinct_patterns: usize,
}

/// Plug-in entropy of the window pattern law divided by the number of window vertices.
pub fn plugin_entropy(samples: &[Forest<'_>], w: &Window<'_>) -> Result<EntropyEstimate> {
    let patterns: Vec<Vec<usize>> = samples.iter().map(|f| f.window_pattern(w)).collect();
    plugin_entropy_of_patterns(&patterns, w)
}

/// As [`plugin_entropy`], from precomputed window patterns.
pub fn plugin_entropy_of_patterns(
    patterns: &[Vec<usize>],
    w: &Window<'_>,
) -> Result<EntropyEstimate> {
    if w.vertices().is_empty() || w.internal_edges().is_empty() {
        return Err(Error::invalid(
            "window has no vertices or no internal edges",
        ));
    }
    if w.internal_edges().len() > PLUGIN_EDGE_LIMIT {
        return Err(Error::Capacity {
            what: "window internal edges",
            requested: w.internal_edges().len() as u128,
            limit: PLUGIN_EDGE_LIMIT as u128,
        });
    }
    if patterns.len() < PLUGIN_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "plug-in entropy needs at least {PLUGIN_MIN_SAMPLES} samples, got {}",
            patterns.len()
        )));
    }
    let mut counts: HashMap<&[usize], usize> = HashMap::new();
    for p in patterns {
        *counts.entry(p.as_slice()).or_insert(0) += 1;
    }
    let mut counts: Vec<usize> = counts.into_values().collect();
    // fixed summation order keeps results bit-identical across runs
    counts.sort_unstable();
    let (value, std_error) = jackknife_entropy(&counts);
    let k = w.vertices().len() as f64;
    Ok(EntropyEstimate {
        value: value / k,
        std_error: std_error / k,
        samples: patterns.len(),
        distinct_patterns: counts.len(),
    })
}

fn plugin(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    // subtracting from zero keeps a single-pattern result at +0.0
    0.0 - counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Plug-in entropy of a count vector with its jackknife standard error. Leave-one-out
/// values depend only on which pattern is dropped, so they are grouped by pattern.
pub fn jackknife_entropy(counts: &[usize]) -> (f64, f64) {
    let n: usize = counts.iter().sum();
    let full = plugin(counts.iter().copied(), n);
    if n < 2 {
        return (full, 0.0);
    }
    let leave_out: Vec<(f64, usize)> = (0..counts.len())
        .map(|j| {
            let it = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| if i == j { c - 1 } else { c });
            (plugin(it, n - 1), counts[j])
        })
        .collect();
    let mean = leave_out.iter().map(|&(h, c)| h * c as f64).sum::<f64>() / n as f64;
    let ss: f64 = leave_out
        .iter()
        .map(|&(h, c)| c as f64 * (h - mean).powi(2))
        .sum();
    let var = (n - 1) as f64 / n as f64 * ss;
    (full, var.max(0.0).sqrt())
}

/// Exact window entropy per window vertex under the wired law on the host box.
pub fn exact_wired_window_entropy(g: &Graph, w: &Window<'_>) -> Result<f64> {
    let q = contract(g, &[g.boundary().to_vec()])?;
    let edges: Vec<usize> = w.internal_edges().to_vec();
    let probs = pattern_probabilities(&q.graph, &edges)?;
    let h: f64 = -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>();
    Ok(h / w.vertices().len() as f64)
}

/// The measure tested against the wired law.
pub enum Competitor<'a> {
    /// Every horizontal edge and nothing else.
    AllHorizontal,
    /// The wired sampler itself.
    Wired,
    /// Any sampler; returns the edge ids of a spanning subgraph.
    Custom(&'a (dyn Fn(&Graph, RandomStream) -> Result<Vec<usize>> + Sync)),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub side: usize,
    pub window: Vec<usize>,
    /// plug-in window entropy of the competitor, per window vertex
    pub competitor: EntropyEstimate,
    /// exact window entropy of the wired law, per window vertex
    pub wired_window: f64,
    /// wired per-site log-count of the whole box
    pub wired_per_site: f64,
    pub torus_oracle: f64,
    pub gap: f64,
    pub gap_declared: bool,
}

/// Compares a competitor's window entropy with the wired law on the central 2×2 window of
/// a 2D box. A gap is declared when the competitor estimate plus three standard errors
/// stays below the exact wired window entropy.
pub fn entropy_gap_experiment(
    side: usize,
    competitor: &Competitor<'_>,
    samples: usize,
    stream: RandomStream,
) -> Result<GapReport> {
    if side < 4 {
        return Err(Error::invalid(format!(
            "side must be at least 4, got {side}"
        )));
    }
    let g = build_box(2, side)?;
    let corner = (side - 2) / 2;
    let window = box_block(&g, &[corner, corner], &[2, 2])?;
    let w = induced_window(&g, &window)?;
    let patterns: Vec<Vec<usize>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = stream.substream(i);
            let edges = match competitor {
                Competitor::AllHorizontal => horizontal_edges(&g),
                Competitor::Wired => sample_boundary_mode(&g, BoundaryMode::Wired, s)?
                    .edges()
                    .to_vec(),
                Competitor::Custom(draw) => draw(&g, s)?,
            };
            let mut p: Vec<usize> = edges
                .into_iter()
                .filter(|&e| w.is_internal_edge(e))
                .collect();
            p.sort_unstable();
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let competitor = plugin_entropy_of_patterns(&patterns, &w)?;
    let wired_window = exact_wired_window_entropy(&g, &w)?;
    let wired_per_site = log_support_size(&g, EntropyMethod::WiredExact)? / g.vertex_count() as f64;
    let torus_oracle = torus_entropy_oracle(2, 512)?;
    let gap = wired_window - competitor.value;
    Ok(GapReport {
        side,
        window,
        competitor,
        wired_window,
        wired_per_site,
        torus_oracle,
        gap,
        gap_declared: competitor.value + 3.0 * competitor.std_error < wired_window,
    })
}

/// Edges of a box joining vertices that differ in the first coordinate.
pub fn horizontal_edges(g: &Graph) -> Vec<usize> {
    (0..g.edge_count())
        .filter(|&e| {
            let (u, v) = g.edge(e);
            u.abs_diff(v) == 1
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kirchhoff::count_spanning_trees;

    #[test]
    fn dim1_sequences() {
        for n in 3..=8 {
            let enumerated =
                per_site_entropy_sequence(1, &[n], EntropyMethod::MuGnEnumerated).unwrap();
            assert!((enumerated.records[0].per_site - (n as f64).ln() / n as f64).abs() < 1e-12);
            let wired = per_site_entropy_sequence(1, &[n], EntropyMethod::WiredExact).unwrap();
            assert!((wired.records[0].per_site - ((n - 1) as f64).ln() / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_values() {
        assert_eq!(torus_entropy_oracle(1, 64).unwrap(), 0.0);
        assert!(torus_entropy_oracle(2, 63).is_err());
        let v = torus_entropy_oracle(2, 512).unwrap();
        // 4G/π, G = Catalan's constant
        let exact = 4.0 * 0.915_965_594_177_219 / PI;
        assert!((v - exact).abs() < 1e-4);
        let a = torus_entropy_oracle(2, 1024).unwrap();
        let b = torus_entropy_oracle(2, 2048).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn small_torus_against_oracle_direction() {
        let t = crate::graph::build_torus(2, 8).unwrap();
        let per_site = count_spanning_trees(&t).unwrap().value / 64.0;
        let oracle = torus_entropy_oracle(2, 512).unwrap();
        assert!((per_site - oracle).abs() < 0.1);
    }

    #[test]
    fn jackknife_examples() {
        let (h, se) = jackknife_entropy(&[500]);
        assert_eq!((h, se), (0.0, 0.0));
        let (h, se) = jackknife_entropy(&[500, 500]);
        assert!((h - 2f64.ln()).abs() < 1e-12);
        assert!(se < 1e-3);
        let (_, se) = jackknife_entropy(&[300, 700]);
        // delta-method value sqrt(p(1-p)/n) * |ln(p/(1-p))|
        let delta = (0.21f64 / 1000.0).sqrt() * (7.0f64 / 3.0).ln();
        assert!((se - delta).abs() / delta < 0.05);
    }

    #[test]
    fn plugin_two_vertex_window() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)], vec![2]).unwrap();
        let w = induced_window(&g, &[0, 1]).unwrap();
        let with = Forest::new(&g, vec![0]).unwrap();
        let without = Forest::new(&g, vec![]).unwrap();
        let samples: Vec<Forest<'_>> = (0..200)
            .map(|i| {
                if i % 2 == 0 {
                    with.clone()
                } else {
                    without.clone()
                }
            })
            .collect();
        let e = plugin_entropy(&samples, &w).unwrap();
        assert!((e.value - 2f64.ln() / 2.0).abs() < 1e-12);
        let same: Vec<Forest<'_>> = vec![with.clone(); 100];
        assert_eq!(plugin_entropy(&same, &w).unwrap().value, 0.0);
        assert!(plugin_entropy(&same[..99], &w).is_err());
    }

    #[test]
    fn gap_all_horizontal_is_zero() {
        let r = entropy_gap_experiment(6, &Competitor::AllHorizontal, 200, RandomStream::new(0, 0))
            .unwrap();
        assert_eq!(r.competitor.value, 0.0);
        assert!(r.gap_declared);
        assert!(entropy_gap_experiment(
            3,
            &Competitor::AllHorizontal,
            200,
            RandomStream::new(0, 0)
        )
        .is_err());
    }
}
