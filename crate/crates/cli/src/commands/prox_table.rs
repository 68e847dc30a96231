use std::path::PathBuf;

use clap::Args;
use nlplap::prox::{conjugate_exponent, prox_scalar, ProxParams};
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::files::{csv_bytes, OutDir};
use crate::manifest::{finish, now, Run, RunManifest};

#[derive(Debug, Args)]
pub struct ProxTableArgs {
    /// Dual exponents, comma separated; `inf` allowed.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<String>,
    /// Primal exponents, converted to their conjugates.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<String>,
    /// Step size (default 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Scaled regularization λ_n (default 1).
    #[arg(long = "lambda_n", alias = "lambda-n")]
    pub lambda_n: Option<f64>,
    /// Smallest input (default -3).
    #[arg(long = "t-min", allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    /// Largest input (default 3).
    #[arg(long = "t-max", allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Grid points per exponent (default 61).
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory (default `prox-out`).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file; its keys override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxTableConfig {
    /// Kept as text so that `inf` survives JSON.
    pub q: Vec<String>,
    pub gamma: f64,
    pub lambda_n: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub out_dir: PathBuf,
}

fn parse_exp(s: &str, flag: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("{flag}: `{s}` is not a number")))?;
    if v.is_nan() {
        return Err(CliError::input(format!("{flag}: `{s}` is not a number")));
    }
    Ok(v)
}

fn fmt_exp(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        q.to_string()
    }
}

impl ProxTableArgs {
    pub fn resolve(&self) -> CliResult<ProxTableConfig> {
        let mut q = self.q.clone();
        for p in &self.p {
            let c = conjugate_exponent(parse_exp(p, "--p")?).map_err(|e| CliError::lib("--p", e))?;
            q.push(fmt_exp(c));
        }
        if q.is_empty() {
            q = vec!["1".into(), "1.5".into(), "2".into(), "3".into(), "inf".into()];
        }
        let base = ProxTableConfig {
            q,
            gamma: self.gamma.unwrap_or(1.0),
            lambda_n: self.lambda_n.unwrap_or(1.0),
            t_min: self.t_min.unwrap_or(-3.0),
            t_max: self.t_max.unwrap_or(3.0),
            points: self.points.unwrap_or(61),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("prox-out")),
        };
        resolve(&base, self.config.as_deref())
    }
}

pub fn execute(cfg: &ProxTableConfig) -> CliResult<RunManifest> {
    let started = now();
    if cfg.points < 2 {
        return Err(CliError::input("--points must be >= 2"));
    }
    if !(cfg.t_min.is_finite() && cfg.t_max.is_finite() && cfg.t_min < cfg.t_max) {
        return Err(CliError::input("--t-min must be smaller than --t-max"));
    }
    let mut rows = Vec::new();
    for qs in &cfg.q {
        let q = parse_exp(qs, "--q")?;
        let params = ProxParams::new(q, cfg.gamma, cfg.lambda_n).map_err(|e| CliError::lib("--q/--gamma/--lambda_n", e))?;
        for k in 0..cfg.points {
            let t = cfg.t_min + (cfg.t_max - cfg.t_min) * k as f64 / (cfg.points - 1) as f64;
            rows.push(vec![
                t.to_string(),
                fmt_exp(q),
                cfg.gamma.to_string(),
                cfg.lambda_n.to_string(),
                prox_scalar(t, &params).to_string(),
            ]);
        }
    }
    let mut out = OutDir::create(&cfg.out_dir)?;
    out.write("prox.csv", &csv_bytes(&["t", "q", "gamma", "lambda_n", "prox"], rows)?)?;
    let run = Run {
        config: serde_json::to_value(cfg).expect("config serializes"),
        seed: None,
        inputs: Vec::new(),
    };
    finish("prox-table", started, run, &mut out)
}
