use std::path::PathBuf;

use clap::Args;
use serde_json::Value;

use super::{denoise, graph_gen, prox_table, rates};
use crate::config::from_value;
use crate::error::{CliError, CliResult};
use crate::files::sha256_file;
use crate::manifest::{RunManifest, MANIFEST_FILE};

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// `manifest.json` of an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Defaults to `rerun/` next to the manifest.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

/// Re-execute a manifest's command with its resolved configuration and
/// compare the data outputs byte for byte.
pub fn execute(args: &RerunArgs) -> CliResult<RunManifest> {
    let old = RunManifest::read(&args.manifest)?;
    for input in &old.inputs {
        let now = sha256_file(std::path::Path::new(&input.path))?;
        if now != input.sha256 {
            return Err(CliError::input(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| {
        args.manifest
            .parent()
            .unwrap_or(std::path::Path::new("."))
            .join("rerun")
    });
    let mut config = old.config.clone();
    if let Value::Object(m) = &mut config {
        m.insert("out_dir".into(), Value::String(out_dir.display().to_string()));
    }
    let what = "--manifest config";
    let new = match old.command.as_str() {
        "denoise" => denoise::execute(&from_value(config, what)?)?,
        "graph-gen" => graph_gen::execute(&from_value(config, what)?)?,
        "prox-table" => prox_table::execute(&from_value(config, what)?)?,
        "rates" => rates::execute(&from_value(config, what)?)?,
        other => return Err(CliError::input(format!("--manifest: unknown command `{other}`"))),
    };
    let mut mismatched = Vec::new();
    for o in &old.outputs {
        match new.outputs.iter().find(|n| n.path == o.path) {
            Some(n) if n.sha256 == o.sha256 => println!("identical  {}", o.path),
            _ => {
                println!("differs    {}", o.path);
                mismatched.push(o.path.clone());
            }
        }
    }
    if !mismatched.is_empty() || new.outputs.len() != old.outputs.len() {
        return Err(CliError::NotReproduced(format!(
            "rerun of {} did not reproduce: {}",
            args.manifest.display(),
            mismatched.join(", ")
        )));
    }
    println!("reproduced {} outputs into {}", new.outputs.len(), out_dir.join(MANIFEST_FILE).display());
    Ok(new)
}
