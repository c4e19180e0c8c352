//! Artifact directory: CSV tables, binary snapshots and the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::params::Params;

pub struct Artifacts {
    pub dir: PathBuf,
    outputs: Vec<String>,
    started: Instant,
}

/// Hex SHA-256 of the command and its resolved parameters.
pub fn config_hash(command: &str, params: &Params) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for (k, v) in params.values() {
        if k == "out" || k == "threads" {
            continue;
        }
        h.update(b"\n");
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// One table row of numbers and labels.
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // `Display` for f64 prints the shortest string that round-trips.
            Cell::F(v) => format!("{v}"),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::F)
    }
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        let probe = dir.join(".write-test");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new(), started: Instant::now() })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn record(&mut self, name: String) {
        self.outputs.push(name);
    }

    pub fn manifest(
        &self,
        command: &str,
        params: &Params,
        config_path: Option<&Path>,
        fitted: Value,
        results: Value,
    ) -> Result<PathBuf, CliError> {
        let config: Map<String, Value> =
            params.values().iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let manifest = json!({
            "command": command,
            "versions": {
                "randvort": env!("CARGO_PKG_VERSION"),
                "manifest_format": 1,
            },
            "config": config,
            "config_file": config_path.map(|p| p.display().to_string()),
            "config_file_text": params.config_text,
            "config_hash": config_hash(command, params),
            "fitted_constants": fitted,
            "results": results,
            "outputs": self.outputs,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
