//! Uniform spanning trees and forests on finite graphs and lattice boxes.
//!
//! * [`graph`]: graphs with boundary, lattice boxes and tori, quotients, windows.
//! * [`sampler`]: Wilson's algorithm for trees, rooted forests and wired/free boxes.
//! * [`kirchhoff`]: matrix-tree counts, edge marginals, enumeration oracles.
//! * [`gibbs`]: boundary partitions, strong and weak Gibbs resampling, closures.
//! * [`stats`]: trunks, near intersections, disjoint-path events, hitting fields.
//! * [`entropy`]: per-site log-counts, torus oracle, plug-in estimates.
//! * [`io`]: graph and forest text formats.
//! * [`corpus`]: small graphs for exhaustive oracle checks.

pub mod corpus;
pub mod entropy;
pub mod error;
pub mod forest;
pub mod gibbs;
pub mod graph;
pub mod io;
pub mod kirchhoff;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
pub use forest::Forest;
pub use graph::{build_box, build_torus, contract, induced_window, Graph, Quotient, Window};
pub use rng::RandomStream;
pub use sampler::{
    sample_boundary_mode, wilson_rooted_forest, wilson_tree, BoundaryMode, WalkPath,
};

/// Library version reported by the command line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
