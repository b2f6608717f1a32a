//! Deterministic CSV/JSON artifacts. Every file carries the artifact
//! version and the config hash: JSON in an envelope, CSV in a leading
//! `#` comment line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::hex;
use crate::solver::{Boundary, Field, Grid, SnapshotSeries};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "degen-front";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: snapshot hash {found} does not match run metadata {expected}")]
    HashMismatch { path: String, expected: String, found: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub kind: String,
    pub data: T,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// `{:e}` is the shortest representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn to_json<T: Serialize>(kind: &str, config_hash: &str, data: &T) -> String {
    let env = Envelope {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_hash: config_hash.into(),
        kind: kind.into(),
        data,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("report types serialise");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, config_hash: &str, data: &T) -> Result<String, IoError> {
    let text = to_json(kind, config_hash, data);
    fs::write(path, &text).map_err(fs_err(path))?;
    Ok(sha256_hex(text.as_bytes()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, kind: &str) -> Result<Envelope<T>, IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))?;
    if env.kind != kind {
        return Err(format_err(path, format!("expected a '{kind}' file, found '{}'", env.kind)));
    }
    Ok(env)
}

/// Header comment, column names, rows. Returns the text.
pub fn csv_text(config_hash: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = format!("# {TOOL} {VERSION} config_hash={config_hash}\n");
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, config_hash: &str, header: &[String], rows: &[Vec<String>]) -> Result<String, IoError> {
    let text = csv_text(config_hash, header, rows);
    fs::write(path, &text).map_err(fs_err(path))?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Snapshot table: header `t,<coords>`, one row per snapshot.
pub fn snapshots_csv(series: &SnapshotSeries, config_hash: &str) -> String {
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(series.grid.coords.iter().map(|&x| fmt_f64(x)))
        .collect();
    let rows: Vec<Vec<String>> = series
        .snapshots
        .iter()
        .map(|s| std::iter::once(s.t).chain(s.values.iter().copied()).map(fmt_f64).collect())
        .collect();
    csv_text(config_hash, &header, &rows)
}

/// Parses a snapshot table back into `(coords, snapshots)`.
pub fn parse_snapshots_csv(path: &Path, text: &str) -> Result<(Vec<f64>, Vec<Field>), IoError> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| format_err(path, "empty snapshot file"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        return Err(format_err(path, "first column must be t"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| format_err(path, format!("'{s}' is not a number")));
    let coords: Vec<f64> = cols.map(num).collect::<Result<_, _>>()?;
    let mut snaps = Vec::new();
    for (n, line) in lines.enumerate() {
        let vals: Vec<f64> = line.split(',').map(num).collect::<Result<_, _>>()?;
        if vals.len() != coords.len() + 1 {
            return Err(format_err(path, format!("row {} has {} columns, expected {}", n + 1, vals.len(), coords.len() + 1)));
        }
        snaps.push(Field {
            t: vals[0],
            values: vals[1..].to_vec(),
        });
    }
    if snaps.is_empty() {
        return Err(format_err(path, "no snapshots"));
    }
    Ok((coords, snaps))
}

/// Run metadata stored next to the snapshot table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub config: String,
    pub law: String,
    pub grid: Grid,
    pub boundary: Boundary,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub boundary_activation: Option<f64>,
    pub completed: bool,
    pub snapshot_file: String,
    pub snapshot_hash: String,
    pub min_trace: Vec<f64>,
    pub max_trace: Vec<f64>,
}

pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const RUN_FILE: &str = "run.json";

/// Writes `snapshots.csv` and `run.json` into `dir`; returns the snapshot hash.
pub fn save_series(
    dir: &Path,
    series: &SnapshotSeries,
    config_text: &str,
    config_hash: &str,
    completed: bool,
) -> Result<String, IoError> {
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    let csv = snapshots_csv(series, config_hash);
    let csv_path = dir.join(SNAPSHOT_FILE);
    fs::write(&csv_path, &csv).map_err(fs_err(&csv_path))?;
    let snapshot_hash = sha256_hex(csv.as_bytes());
    let meta = RunMeta {
        config: config_text.into(),
        law: series.law_spec.clone(),
        grid: series.grid.clone(),
        boundary: series.boundary,
        steps: series.steps,
        dt_min: series.dt_min,
        dt_max: series.dt_max,
        boundary_activation: series.boundary_activation,
        completed,
        snapshot_file: SNAPSHOT_FILE.into(),
        snapshot_hash: snapshot_hash.clone(),
        min_trace: series.min_trace.clone(),
        max_trace: series.max_trace.clone(),
    };
    write_json(&dir.join(RUN_FILE), "run", config_hash, &meta)?;
    Ok(snapshot_hash)
}

/// Reads a series saved by [`save_series`], checking the snapshot hash
/// against the run metadata. Returns the series, its hash and the run's
/// config hash.
pub fn load_series(dir: &Path) -> Result<(SnapshotSeries, String, String), IoError> {
    let meta_path = dir.join(RUN_FILE);
    let env: Envelope<RunMeta> = read_json(&meta_path, "run")?;
    let meta = env.data;
    let csv_path = dir.join(&meta.snapshot_file);
    let text = fs::read_to_string(&csv_path).map_err(fs_err(&csv_path))?;
    let found = sha256_hex(text.as_bytes());
    if found != meta.snapshot_hash {
        return Err(IoError::HashMismatch {
            path: csv_path.display().to_string(),
            expected: meta.snapshot_hash,
            found,
        });
    }
    let (coords, snapshots) = parse_snapshots_csv(&csv_path, &text)?;
    if coords.len() != meta.grid.points || coords.iter().zip(&meta.grid.coords).any(|(a, b)| a != b) {
        return Err(format_err(&csv_path, "snapshot coordinates disagree with the run grid"));
    }
    let series = SnapshotSeries {
        grid: meta.grid,
        law_spec: meta.law,
        boundary: meta.boundary,
        snapshots,
        steps: meta.steps,
        dt_min: meta.dt_min,
        dt_max: meta.dt_max,
        min_trace: meta.min_trace,
        max_trace: meta.max_trace,
        boundary_activation: meta.boundary_activation,
    };
    Ok((series, found, env.config_hash))
}
