//! JSON experiment configurations. A configuration names a subcommand and supplies its
//! flags as fields; it is translated to the equivalent command line so both paths share
//! parsing, defaults and validation. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;

use crate::{Cli, Command, Failure, Format};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum GraphSource {
    File(PathBuf),
    Box { dim: usize, side: usize },
    Torus { dim: usize, side: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub corner: Vec<usize>,
    pub extent: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub graph: Option<GraphSource>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub window: Option<WindowConfig>,
    pub k: Option<usize>,
    pub m: Option<Vec<u64>>,
    pub margin: Option<usize>,
    pub mode: Option<String>,
    pub kind: Option<String>,
    pub method: Option<String>,
    pub dim: Option<usize>,
    pub sides: Option<Vec<usize>>,
    pub points: Option<usize>,
    pub roots: Option<Vec<usize>>,
    pub starts: Option<Vec<usize>>,
    pub wired: Option<bool>,
    pub check: Option<bool>,
    pub output: Option<OutputConfig>,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Equivalent argument vector; relative graph paths resolve against `base`.
    pub fn to_args(&self, base: &Path) -> Vec<String> {
        let mut a = vec!["usf".to_string(), self.subcommand.clone()];
        let mut flag = |name: &str, value: String| {
            a.push(format!("--{name}"));
            a.push(value);
        };
        match &self.graph {
            Some(GraphSource::File(p)) => flag("graph", base.join(p).display().to_string()),
            Some(GraphSource::Box { dim, side }) => flag("box", format!("{dim},{side}")),
            Some(GraphSource::Torus { dim, side }) => flag("torus", format!("{dim},{side}")),
            None => {}
        }
        if let Some(v) = self.seed {
            flag("seed", v.to_string());
        }
        if let Some(v) = self.samples {
            flag("samples", v.to_string());
        }
        if let Some(w) = &self.window {
            flag("window", format!("{}:{}", join(&w.corner), join(&w.extent)));
        }
        if let Some(v) = self.k {
            flag("k", v.to_string());
        }
        if let Some(v) = &self.m {
            flag("m", join(v));
        }
        if let Some(v) = self.margin {
            flag("margin", v.to_string());
        }
        for (name, v) in [
            ("mode", &self.mode),
            ("kind", &self.kind),
            ("method", &self.method),
        ] {
            if let Some(v) = v {
                flag(name, v.clone());
            }
        }
        if let Some(v) = self.dim {
            flag("dim", v.to_string());
        }
        if let Some(v) = &self.sides {
            flag("sides", join(v));
        }
        if let Some(v) = self.points {
            flag("points", v.to_string());
        }
        if let Some(v) = &self.roots {
            flag("roots", join(v));
        }
        if let Some(v) = &self.starts {
            flag("starts", join(v));
        }
        if let Some(out) = &self.output {
            if let Some(p) = &out.path {
                flag("out", base.join(p).display().to_string());
            }
            if let Some(f) = out.format {
                let name = match f {
                    Format::Json => "json",
                    Format::Csv => "csv",
                    Format::Text => "text",
                };
                flag("format", name.to_string());
            }
        }
        for (name, on) in [("wired", self.wired), ("check", self.check)] {
            if on == Some(true) {
                a.push(format!("--{name}"));
            }
        }
        a
    }
}

pub fn load(path: &Path) -> Result<Command, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::Validation(format!("--config: cannot read {}: {e}", path.display()))
    })?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("--config: {e}")))?;
    if cfg.subcommand == "run" {
        return Err(Failure::Validation(
            "subcommand: `run` cannot be nested".into(),
        ));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let cli = Cli::try_parse_from(cfg.to_args(base))
        .map_err(|e| Failure::Validation(format!("--config: {}", e.to_string().trim())))?;
    Ok(cli.command)
}
