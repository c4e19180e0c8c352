//! Flat binary vorticity dumps with a JSON sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::state::TorusState;

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub l: f64,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub config_hash: String,
    pub layout: String,
}

/// Write the grid vorticity of `state` as `<stem>.bin` (row-major, `x1`
/// fastest, little-endian f64) and `<stem>.json`. Returns the two paths.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    state: &TorusState,
    seed: u64,
    config_hash: &str,
) -> std::io::Result<(PathBuf, PathBuf)> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let w = state.omega_grid();
    let mut bytes = Vec::with_capacity(w.len() * 8);
    for v in &w {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes)?;
    let meta = SnapshotMeta {
        l: state.l,
        n: state.n,
        t: state.t,
        seed,
        config_hash: config_hash.to_string(),
        layout: "row-major f64 little-endian, index j2*N + j1 at (j1*L/N, j2*L/N)".into(),
    };
    let mut f = fs::File::create(&json)?;
    f.write_all(serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok((bin, json))
}

/// Read back the vorticity values of a `.bin` dump.
pub fn read_snapshot_values(path: &Path) -> std::io::Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "truncated snapshot"));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
