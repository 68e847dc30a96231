//! Resolution of command configuration: defaults, then flags, then the
//! `--config` file, whose keys win.

use std::fs;
use std::path::Path;

use nlplap::graphon::KernelSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub fn load_file(path: &Path) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("--config {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("--config {}: {e}", path.display())))?
    } else {
        let t: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::input(format!("--config {}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::input(format!("--config {}: {e}", path.display())))?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::input(format!("--config {}: expected a table of keys", path.display()))),
    }
}

/// Kernels may be written as `"band:delta=0.1"` in config files.
fn normalize(map: &mut Map<String, Value>) -> CliResult<()> {
    if let Some(Value::String(s)) = map.get("kernel") {
        let spec: KernelSpec = s.parse().map_err(|e| CliError::input(format!("config key `kernel`: {e}")))?;
        map.insert("kernel".into(), serde_json::to_value(spec).expect("kernel spec serializes"));
    }
    Ok(())
}

/// Overlay `file` on the flag-derived `base` and deserialize. Keys unknown
/// to the command are rejected.
pub fn resolve<T: Serialize + DeserializeOwned>(base: &T, file: Option<&Path>) -> CliResult<T> {
    let Value::Object(mut merged) = serde_json::to_value(base).expect("config serializes") else {
        unreachable!("command configs are structs")
    };
    if let Some(path) = file {
        let mut overlay = load_file(path)?;
        normalize(&mut overlay)?;
        for (k, v) in overlay {
            if !merged.contains_key(&k) {
                return Err(CliError::input(format!("--config {}: unknown key `{k}`", path.display())));
            }
            merged.insert(k, v);
        }
    }
    from_value(Value::Object(merged), "configuration")
}

pub fn from_value<T: DeserializeOwned>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::input(format!("{what}: {e}")))
}

pub fn parse_kernel(s: &str) -> CliResult<KernelSpec> {
    s.parse().map_err(|e| CliError::input(format!("--kernel: {e}")))
}
