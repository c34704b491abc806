//! `usf`: experiment runner for uniform spanning trees and forests.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when a capacity limit is exceeded,
//! 1 on any other failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "usf",
    version,
    about = "Uniform spanning tree and forest experiments"
)]
#[command(after_help = "Environment: USF_THREADS caps the number of worker threads.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw forests with Wilson's algorithm and write them as forest files
    Sample(SampleArgs),
    /// Count spanning trees, or rooted spanning forests with --roots/--wired
    Count(CountArgs),
    /// Exact single-edge inclusion probabilities
    Marginals(MarginalsArgs),
    /// Per-site entropy: exact log-counts, torus oracle, or plug-in estimates
    Entropy(EntropyArgs),
    /// Compare window-edge frequencies before and after one Gibbs resampling step
    GibbsTest(GibbsArgs),
    /// Trunks, near intersections and fresh near collision points of sampled forests
    TrunkStats(TrunkArgs),
    /// Monte Carlo estimates of the disjoint-paths event and its decay in m
    NuA(NuAArgs),
    /// Run the experiment described by a JSON configuration file
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GraphArgs {
    /// Graph file: `n m b`, m lines `u v`, one line of boundary ids
    #[arg(long, value_name = "FILE", group = "source")]
    pub graph: Option<PathBuf>,
    /// Lattice box with the given dimension and side
    #[arg(
        long = "box",
        value_name = "DIM,SIDE",
        value_delimiter = ',',
        group = "source"
    )]
    #[serde(rename = "box")]
    pub box_: Option<Vec<usize>>,
    /// Discrete torus with the given dimension and side
    #[arg(long, value_name = "DIM,SIDE", value_delimiter = ',', group = "source")]
    pub torus: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Boundary identified to one vertex
    Wired,
    /// Uniform spanning tree of the graph
    Free,
}

impl From<Mode> for usf_core::BoundaryMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Wired => usf_core::BoundaryMode::Wired,
            Mode::Free => usf_core::BoundaryMode::Free,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Number of forests
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Free)]
    pub mode: Mode,
    /// Forest file, or a directory when more than one sample is drawn (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CountArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Count forests rooted at these vertices
    #[arg(long, value_delimiter = ',', conflicts_with = "wired")]
    pub roots: Option<Vec<usize>>,
    /// Count forests rooted at the boundary
    #[arg(long)]
    pub wired: bool,
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// `text` prints the bare count
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MarginalsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// `wired` computes marginals with the boundary identified
    #[arg(long, value_enum, default_value_t = Mode::Free)]
    pub mode: Mode,
    /// Also compute each marginal by deletion-contraction
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMethodArg {
    /// Rooted forests with the boundary as roots (matrix-tree)
    Wired,
    /// Forests whose components all meet the boundary (enumeration)
    Enum,
    /// Torus quadrature limit
    Oracle,
    /// Plug-in estimate on a window from wired samples
    Plugin,
    /// Spanning trees of tori (matrix-tree)
    Torus,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EntropyArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Box sides
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub sides: Vec<usize>,
    #[arg(long, value_enum, default_value_t = EntropyMethodArg::Wired)]
    pub method: EntropyMethodArg,
    /// Quadrature points per axis for the oracle
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Samples per side for the plug-in method
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Window for the plug-in method, `CORNER:EXTENT` (default: central 2x2)
    #[arg(long, value_name = "X,Y:W,H")]
    pub window: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Weak,
    Strong,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GibbsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Window, `CORNER:EXTENT` in lattice coordinates, or a vertex list `v1,v2,...`
    #[arg(long, value_name = "SPEC")]
    pub window: String,
    #[arg(long, value_enum, default_value_t = KindArg::Weak)]
    pub kind: KindArg,
    /// Law of the initial forest (default: wired for weak, free for strong)
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrunkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = Mode::Free)]
    pub mode: Mode,
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Near-intersection radius
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Minimum distance from the boundary for counted vertices (default: k)
    #[arg(long)]
    pub margin: Option<usize>,
    /// Orient each trunk by a fair coin instead of from its smaller endpoint
    #[arg(long)]
    pub random_orientation: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NuAArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Walk start vertices (default on 2D boxes: left column, rows side/3 and 2*side/3)
    #[arg(long, value_delimiter = ',')]
    pub starts: Option<Vec<usize>>,
    /// Root vertices (default on 2D boxes: interior of the right column)
    #[arg(long, value_delimiter = ',')]
    pub roots: Option<Vec<usize>>,
    /// Near-intersection thresholds
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    pub m: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Minimum distance from the boundary for counted vertices (default: k)
    #[arg(long)]
    pub margin: Option<usize>,
    /// Samples per threshold
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    /// JSON experiment configuration
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Capacity(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Capacity(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Capacity(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<usf_core::Error> for Failure {
    fn from(e: usf_core::Error) -> Self {
        use usf_core::Error as E;
        match e {
            E::Capacity { .. } => Failure::Capacity(e.to_string()),
            E::Invalid(_) | E::Disconnected { .. } | E::Cycle { .. } => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("USF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Validation(format!(
            "USF_THREADS: expected a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

pub fn execute(command: Command) -> Result<(), Failure> {
    let start = Instant::now();
    match command {
        Command::Run(args) => {
            let cmd = config::load(&args.config)?;
            execute(cmd)
        }
        other => commands::dispatch(other, start),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| execute(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
