//! `nlplap`: denoising, graph generation, prox tables and consistency-rate
//! experiments from the command line.
//!
//! Exit codes: 0 success, 1 output or reproduction failure, 2 malformed
//! input, 3 solver divergence. `NLPLAP_THREADS` caps the worker threads.

mod commands;
mod config;
mod error;
mod files;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{denoise, graph_gen, prox_table, rates, rerun};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "nlplap", version, about = "Nonlocal p-Laplacian regularization on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoise a signal or point cloud on a graph.
    Denoise(denoise::DenoiseArgs),
    /// Sample a random inhomogeneous graph from a kernel.
    GraphGen(graph_gen::GraphGenArgs),
    /// Tabulate the dual proximal map.
    ProxTable(prox_table::ProxTableArgs),
    /// Measure discrete-to-continuum error rates.
    Rates(rates::RatesArgs),
    /// Re-execute a run manifest and compare outputs.
    Rerun(rerun::RerunArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("NLPLAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("NLPLAP_THREADS: `{raw}` is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("NLPLAP_THREADS: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let manifest = match cli.command {
        Command::Denoise(a) => denoise::execute(&a.resolve()?)?,
        Command::GraphGen(a) => graph_gen::execute(&a.resolve()?)?,
        Command::ProxTable(a) => prox_table::execute(&a.resolve()?)?,
        Command::Rates(a) => rates::execute(&a.resolve()?)?,
        Command::Rerun(a) => rerun::execute(&a)?,
    };
    for o in &manifest.outputs {
        eprintln!("wrote {}", o.path);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
