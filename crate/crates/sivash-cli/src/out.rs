//! Output directory management: manifest, schema file, snapshot naming.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use sivash::io::{field_to_snapshot, state_fields, DIAG_CSV_COLUMNS, DIAG_CSV_DESCRIPTIONS};
use sivash::models::State;

use crate::config::RunConfig;

/// Resolve the output directory: $SIVASH_OUT_ROOT (when set) / configured
/// directory, created on demand.
pub fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let base = match std::env::var_os("SIVASH_OUT_ROOT") {
        Some(root) => PathBuf::from(root).join(&cfg.output.directory),
        None => cfg.output.directory.clone(),
    };
    fs::create_dir_all(&base)
        .with_context(|| format!("cannot create output directory {}", base.display()))?;
    Ok(base)
}

/// Every run writes a manifest echoing the exact resolved config and the
/// code version. No timestamps: outputs must be a pure function of
/// (config, seed, platform).
pub fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.resolved_toml()?,
    });
    write_json(dir.join("manifest.json"), &manifest)
}

/// Documented column schema for every CSV this command writes.
pub fn write_schema(dir: &Path, extra: &[(&str, &[(&str, &str)])]) -> Result<()> {
    let mut files = serde_json::Map::new();
    let diag: Vec<_> = DIAG_CSV_COLUMNS
        .iter()
        .zip(DIAG_CSV_DESCRIPTIONS.iter())
        .map(|(c, d)| json!({"column": c, "description": d}))
        .collect();
    files.insert("trajectory.csv".into(), json!(diag));
    for (name, cols) in extra {
        let v: Vec<_> = cols
            .iter()
            .map(|(c, d)| json!({"column": c, "description": d}))
            .collect();
        files.insert((*name).into(), json!(v));
    }
    write_json(dir.join("schema.json"), &serde_json::Value::Object(files))
}

pub fn write_json(path: PathBuf, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Write one state snapshot (one file per field component).
pub fn write_snapshot(dir: &Path, index: usize, t: f64, state: &State, form: &str) -> Result<()> {
    let snapdir = dir.join("snapshots");
    fs::create_dir_all(&snapdir)?;
    for (suffix, field) in state_fields(state) {
        let doc = field_to_snapshot(&field, t, form);
        write_json(snapdir.join(format!("snap_{index:06}_{suffix}.json")), &doc)?;
    }
    Ok(())
}
