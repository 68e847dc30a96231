use std::path::PathBuf;

use clap::Args;
use nlplap::graph::{sample_inhomogeneous, NodeMode, RandomGraphConfig};
use nlplap::graphon::{Graphon, KernelSpec};
use serde::{Deserialize, Serialize};

use crate::config::{parse_kernel, resolve};
use crate::error::{CliError, CliResult};
use crate::files::OutDir;
use crate::manifest::{finish, now, Run, RunManifest};

pub const GRAPH_FILE: &str = "graph.json";
pub const EDGES_FILE: &str = "edges.csv";

#[derive(Debug, Args)]
pub struct GraphGenArgs {
    /// Kernel, e.g. `band:delta=0.1`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Number of nodes (default 100).
    #[arg(long)]
    pub n: Option<usize>,
    /// Sparsity: edge probability q_n·K, weight 1/q_n (default 1).
    #[arg(long = "q_n")]
    pub q_n: Option<f64>,
    /// Edge and node seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `equispaced` or `uniform-order-statistics`.
    #[arg(long = "node-mode")]
    pub node_mode: Option<String>,
    /// Output directory (default `graph-out`).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file; its keys override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphGenConfig {
    pub kernel: Option<KernelSpec>,
    pub n: usize,
    pub q_n: f64,
    pub seed: u64,
    pub node_mode: NodeMode,
    pub out_dir: PathBuf,
}

impl GraphGenArgs {
    pub fn resolve(&self) -> CliResult<GraphGenConfig> {
        let node_mode = match self.node_mode.as_deref() {
            None | Some("equispaced") => NodeMode::Equispaced,
            Some("uniform-order-statistics") | Some("uniform") => NodeMode::UniformOrderStatistics,
            Some(other) => {
                return Err(CliError::input(format!(
                    "--node-mode: unknown mode `{other}` (expected equispaced or uniform-order-statistics)"
                )))
            }
        };
        let base = GraphGenConfig {
            kernel: self.kernel.as_deref().map(parse_kernel).transpose()?,
            n: self.n.unwrap_or(100),
            q_n: self.q_n.unwrap_or(1.0),
            seed: self.seed.unwrap_or(0),
            node_mode,
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("graph-out")),
        };
        resolve(&base, self.config.as_deref())
    }
}

pub fn execute(cfg: &GraphGenConfig) -> CliResult<RunManifest> {
    let started = now();
    if !(cfg.q_n.is_finite() && cfg.q_n > 0.0) {
        return Err(CliError::input(format!("--q_n: {} must be finite and > 0", cfg.q_n)));
    }
    if cfg.n < 2 {
        return Err(CliError::input(format!("--n: {} must be >= 2", cfg.n)));
    }
    let spec = cfg.kernel.ok_or_else(|| CliError::input("--kernel is required"))?;
    let kernel = Graphon::from_spec(&spec).map_err(|e| CliError::lib("--kernel", e))?;
    let graph = sample_inhomogeneous(
        &kernel,
        &RandomGraphConfig {
            n: cfg.n,
            q_n: cfg.q_n,
            seed: cfg.seed,
            node_mode: cfg.node_mode,
        },
    )
    .map_err(|e| CliError::lib("graph-gen", e))?;

    let mut out = OutDir::create(&cfg.out_dir)?;
    let mut edges = Vec::new();
    graph
        .write_edges_csv(&mut edges)
        .map_err(|e| CliError::Output(format!("edges: {e}")))?;
    out.write(EDGES_FILE, &edges)?;
    out.write_json(GRAPH_FILE, &graph.header(EDGES_FILE))?;
    let run = Run {
        config: serde_json::to_value(cfg).expect("config serializes"),
        seed: Some(cfg.seed),
        inputs: Vec::new(),
    };
    finish("graph-gen", started, run, &mut out)
}
