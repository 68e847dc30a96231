use std::path::{Path, PathBuf};

use clap::Args;
use nlplap::graph::{
    coordinate_graph, deterministic_weighted, sample_inhomogeneous, GraphHeader, NodeMode, RandomGraphConfig,
    WeightedGraph,
};
use nlplap::graphon::{Graphon, KernelSpec};
use nlplap::operators::{energy_total, EnergyBreakdown};
use nlplap::solver::{solve, SolverConfig, StepSize};
use serde::{Deserialize, Serialize};

use crate::config::{parse_kernel, resolve};
use crate::error::{CliError, CliResult};
use crate::files::{csv_bytes, digest, OutDir, Table};
use crate::manifest::{finish, now, Run, RunManifest};

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Signal CSV: a `value` column plus optional coordinate columns, or
    /// only coordinate columns (point cloud, every column is denoised).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Graph JSON written by `graph-gen`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Kernel on the unit interval, e.g. `band:delta=0.1`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Radius of the coordinate graph.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Length scale of the coordinate weights `exp(-d/scale)`; defaults to delta.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Sparsity of a random graph drawn from `--kernel`.
    #[arg(long = "q_n")]
    pub q_n: Option<f64>,
    /// Regularizer exponent (default 1).
    #[arg(long)]
    pub p: Option<f64>,
    /// Regularization strength (default 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relative change stopping tolerance (default 1e-9).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap (default 5000).
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Fixed dual step; automatic when omitted.
    #[arg(long)]
    pub step: Option<f64>,
    /// Seed for random graphs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default `denoise-out`).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file; its keys override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseConfig {
    pub input: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub kernel: Option<KernelSpec>,
    pub delta: Option<f64>,
    pub scale: Option<f64>,
    pub q_n: Option<f64>,
    pub p: f64,
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub step: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl DenoiseArgs {
    pub fn resolve(&self) -> CliResult<DenoiseConfig> {
        let solver = SolverConfig::default();
        let base = DenoiseConfig {
            input: self.input.clone(),
            graph: self.graph.clone(),
            kernel: self.kernel.as_deref().map(parse_kernel).transpose()?,
            delta: self.delta,
            scale: self.scale,
            q_n: self.q_n,
            p: self.p.unwrap_or(solver.p),
            lambda: self.lambda.unwrap_or(solver.lambda),
            tol: self.tol.unwrap_or(solver.tol),
            max_iter: self.max_iter.unwrap_or(solver.max_iter),
            step: self.step,
            seed: self.seed.unwrap_or(0),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("denoise-out")),
        };
        let mut cfg = resolve(&base, self.config.as_deref())?;
        cfg.input = cfg.input.map(|p| absolute(&p));
        cfg.graph = cfg.graph.map(|p| absolute(&p));
        Ok(cfg)
    }
}

pub fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelReport {
    pub name: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub gamma: f64,
    pub energy: EnergyBreakdown,
    /// Energy of the noisy input, for comparison.
    pub energy_input: EnergyBreakdown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub schema_version: u32,
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub lambda_n: f64,
    pub graph_edges: usize,
    pub channels: Vec<ChannelReport>,
}

/// Which columns are denoised and which give positions.
fn split_columns(table: &Table) -> (Vec<usize>, Vec<usize>) {
    match table.header.iter().position(|h| h == "value") {
        Some(v) => (vec![v], (0..table.header.len()).filter(|&c| c != v).collect()),
        None => {
            let all: Vec<usize> = (0..table.header.len()).collect();
            (all.clone(), all)
        }
    }
}

/// The graph, plus the edge list file when read from disk.
fn build_graph(cfg: &DenoiseConfig, table: &Table, coords: &[usize]) -> CliResult<(WeightedGraph, Option<PathBuf>)> {
    let n = table.rows();
    if let Some(path) = &cfg.graph {
        let header: GraphHeader = serde_json::from_str(
            &std::fs::read_to_string(path).map_err(|e| CliError::input(format!("--graph {}: {e}", path.display())))?,
        )
        .map_err(|e| CliError::input(format!("--graph {}: {e}", path.display())))?;
        let edges = path.parent().unwrap_or(Path::new(".")).join(&header.edges_file);
        let file = std::fs::File::open(&edges).map_err(|e| CliError::input(format!("--graph {}: {e}", edges.display())))?;
        let g = WeightedGraph::from_edges_csv(&header, file).map_err(|e| CliError::lib("--graph", e))?;
        if g.n() != n {
            return Err(CliError::input(format!(
                "--graph has {} nodes but --input has {n} rows",
                g.n()
            )));
        }
        return Ok((g, Some(edges)));
    }
    if let Some(delta) = cfg.delta {
        let points: Vec<Vec<f64>> = if coords.is_empty() {
            (0..n).map(|i| vec![(i as f64 + 0.5) / n as f64]).collect()
        } else {
            (0..n).map(|i| coords.iter().map(|&c| table.columns[c][i]).collect()).collect()
        };
        return coordinate_graph(&points, delta, cfg.scale.unwrap_or(delta))
            .map(|g| (g, None))
            .map_err(|e| CliError::lib("--delta", e));
    }
    if let Some(spec) = &cfg.kernel {
        let kernel = Graphon::from_spec(spec).map_err(|e| CliError::lib("--kernel", e))?;
        let g = match cfg.q_n {
            Some(q_n) => sample_inhomogeneous(
                &kernel,
                &RandomGraphConfig {
                    n,
                    q_n,
                    seed: cfg.seed,
                    node_mode: NodeMode::Equispaced,
                },
            )
            .map_err(|e| CliError::lib("--q_n", e)),
            None => deterministic_weighted(&kernel, n).map_err(|e| CliError::lib("--kernel", e)),
        };
        return g.map(|g| (g, None));
    }
    Err(CliError::input("denoise needs one of --graph, --delta or --kernel"))
}

pub fn execute(cfg: &DenoiseConfig) -> CliResult<RunManifest> {
    let started = now();
    let input = cfg.input.as_ref().ok_or_else(|| CliError::input("--input is required"))?;
    let table = Table::read(input, "--input")?;
    let (channels, coords) = split_columns(&table);
    let (graph, edges_file) = build_graph(cfg, &table, &coords)?;
    let solver = SolverConfig {
        p: cfg.p,
        lambda: cfg.lambda,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        step: cfg.step.map_or(StepSize::Auto, StepSize::Fixed),
        ..SolverConfig::default()
    };
    solver.validate().map_err(|e| CliError::lib("solver flags (--p, --lambda, --tol, --max-iter, --step)", e))?;

    let mut out_columns = table.columns.clone();
    let mut reports = Vec::new();
    for &c in &channels {
        let g = &table.columns[c];
        let res = solve(&graph, g, &solver).map_err(|e| CliError::lib(&format!("channel `{}`", table.header[c]), e))?;
        let energy_input =
            energy_total(&graph, g, g, cfg.lambda, cfg.p).map_err(|e| CliError::lib("energy", e))?;
        reports.push(ChannelReport {
            name: table.header[c].clone(),
            iterations: res.iterations,
            converged: res.converged,
            final_residual: res.final_residual,
            gamma: res.gamma,
            energy: res.energy,
            energy_input,
        });
        out_columns[c] = res.u_star;
    }

    let mut out = OutDir::create(&cfg.out_dir)?;
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    let rows = (0..table.rows()).map(|i| out_columns.iter().map(|col| col[i].to_string()).collect());
    out.write("denoised.csv", &csv_bytes(&header, rows)?)?;
    out.write_json(
        "report.json",
        &DenoiseReport {
            schema_version: 1,
            n: graph.n(),
            p: cfg.p,
            lambda: cfg.lambda,
            lambda_n: solver.lambda_n(graph.n()),
            graph_edges: graph.edges().len(),
            channels: reports,
        },
    )?;
    let mut inputs = vec![digest(input)?];
    for extra in cfg.graph.iter().chain(&edges_file) {
        inputs.push(digest(extra)?);
    }
    let run = Run {
        config: serde_json::to_value(cfg).expect("config serializes"),
        seed: Some(cfg.seed),
        inputs,
    };
    finish("denoise", started, run, &mut out)
}
