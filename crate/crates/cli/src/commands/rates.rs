use std::path::PathBuf;

use clap::Args;
use nlplap::consistency::{run_experiment, ExperimentConfig, GraphMode};
use nlplap::graphon::KernelSpec;
use serde::{Deserialize, Serialize};

use crate::config::{parse_kernel, resolve};
use crate::error::{CliError, CliResult};
use crate::files::{csv_bytes, OutDir};
use crate::manifest::{finish, now, Run, RunManifest};

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Reference grid size.
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    /// Subsample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Replications per subsample size.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Regularizer exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Regularization strength.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Kernel, e.g. `band:delta=0.1`, `constant:c=1`, `exp:rate=3,cutoff=0.5`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Band kernel width; shorthand for `--kernel band:delta=…`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Switches to Bernoulli random graphs with this sparsity.
    #[arg(long = "q_n")]
    pub q_n: Option<f64>,
    /// `deterministic-weighted`, `simple` or `random`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Standard deviation of the Gaussian noise on the reference data.
    #[arg(long = "noise-sigma")]
    pub noise_sigma: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Solver tolerance for subsample solves.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap for subsample solves.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Output directory (default `rates-out`).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file; its keys override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatesConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
}

impl RatesArgs {
    pub fn resolve(&self) -> CliResult<RatesConfig> {
        let mut e = ExperimentConfig::default();
        if let Some(v) = self.big_n {
            e.big_n = v;
        }
        if !self.n.is_empty() {
            e.n_grid = self.n.clone();
        }
        if let Some(v) = self.reps {
            e.replications = v;
        }
        if let Some(v) = self.p {
            e.p = v;
        }
        if let Some(v) = self.lambda {
            e.lambda = v;
        }
        if let Some(k) = &self.kernel {
            e.kernel = parse_kernel(k)?;
        }
        if let Some(delta) = self.delta {
            if self.kernel.is_some() {
                return Err(CliError::input("--delta conflicts with --kernel"));
            }
            e.kernel = KernelSpec::Band { delta };
        }
        let q_n = self.q_n.unwrap_or(1.0);
        e.graph_mode = match (self.mode.as_deref(), self.q_n) {
            (None, None) | (Some("deterministic-weighted"), None) => GraphMode::DeterministicWeighted,
            (Some("simple"), None) => GraphMode::Simple,
            (None, Some(_)) | (Some("random"), _) => GraphMode::Random { q_n },
            (Some(m), Some(_)) if m != "random" => {
                return Err(CliError::input(format!("--q_n only applies to --mode random, not `{m}`")))
            }
            (Some(m), _) => {
                return Err(CliError::input(format!(
                    "--mode: unknown mode `{m}` (expected deterministic-weighted, simple or random)"
                )))
            }
        };
        if let Some(v) = self.noise_sigma {
            e.noise_sigma = v;
        }
        if let Some(v) = self.seed {
            e.seed = v;
        }
        if let Some(v) = self.tol {
            e.tol = v;
        }
        if let Some(v) = self.max_iter {
            e.max_iter = v;
        }
        let base = RatesConfig {
            experiment: e,
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("rates-out")),
        };
        let cfg: RatesConfig = resolve(&base, self.config.as_deref())?;
        cfg.experiment
            .validate()
            .map_err(|e| CliError::lib("rates configuration (--N, --n, --reps, --lambda, --p, --q_n)", e))?;
        Ok(cfg)
    }
}

pub fn execute(cfg: &RatesConfig) -> CliResult<RunManifest> {
    let started = now();
    let report = run_experiment(&cfg.experiment).map_err(|e| CliError::lib("rates", e))?;
    let mut out = OutDir::create(&cfg.out_dir)?;
    let rows = (0..report.ns.len()).map(|i| {
        vec![
            report.ns[i].to_string(),
            report.mean_sq_error[i].to_string(),
            report.std[i].to_string(),
            report.std_of_mean[i].to_string(),
        ]
    });
    out.write("rates.csv", &csv_bytes(&["n", "mean_sq_err", "std", "std_of_mean"], rows)?)?;
    out.write_json("report.json", &report)?;
    let mut plot = Vec::new();
    for (i, &n) in report.ns.iter().enumerate() {
        let ln = (n as f64).ln();
        let fitted = report.intercept + report.slope * ln;
        for (r, e) in report.errors[i].iter().enumerate() {
            plot.push(vec![
                n.to_string(),
                r.to_string(),
                e.to_string(),
                ln.to_string(),
                report.mean_sq_error[i].ln().to_string(),
                fitted.to_string(),
            ]);
        }
    }
    out.write(
        "plotdata.csv",
        &csv_bytes(
            &["n", "replication", "sq_err", "log_n", "log_mean_sq_err", "fitted_log_mean_sq_err"],
            plot,
        )?,
    )?;
    let run = Run {
        config: serde_json::to_value(cfg).expect("config serializes"),
        seed: Some(cfg.experiment.seed),
        inputs: Vec::new(),
    };
    finish("rates", started, run, &mut out)
}
