//! Run artifacts: the diagnostics CSV, raw field snapshots with JSON
//! headers, the manifest, and structured error records.
//!
//! Numbers destined for the CSV are printed with a fixed 17-digit format, so
//! repeated runs of the same config and seed produce byte-identical files.

use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use qhdlab::conserved::{DiagnosticsRecord, CSV_HEADER};
use qhdlab::field::{ComplexField, RealField};
use qhdlab::grid::SpectralGrid;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))
}

fn io_crash(path: &Path, e: std::io::Error) -> CliError {
    CliError::Crash(format!("cannot write {}: {e}", path.display()))
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Crash(format!("cannot serialize {name}: {e}")))?;
    std::fs::write(&path, text).map_err(|e| io_crash(&path, e))?;
    Ok(path)
}

pub fn write_error_record(dir: &Path, err: &CliError) {
    // best effort: the exit code already carries the outcome
    let _ = write_json(dir, "error.json", &err.to_record());
}

pub fn write_diagnostics_csv(dir: &Path, records: &[DiagnosticsRecord<f64>]) -> CliResult<PathBuf> {
    let path = dir.join("diagnostics.csv");
    let mut text = String::with_capacity(records.len() * 400 + 200);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in records {
        text.push_str(&r.to_csv_row());
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| io_crash(&path, e))?;
    Ok(path)
}

/// CSV for scalar time series that do not fit the diagnostics schema
/// (e.g. the integrable-limit run). Column names come first, one row per
/// record, fixed float format.
pub fn write_series_csv(
    dir: &Path,
    name: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut text = String::new();
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| io_crash(&path, e))?;
    Ok(path)
}

/// One field inside a snapshot.
pub enum FieldData<'a> {
    Real(&'a RealField<f64>),
    Complex(&'a ComplexField<f64>),
}

impl FieldData<'_> {
    fn dtype(&self) -> &'static str {
        match self {
            FieldData::Real(_) => "float64",
            FieldData::Complex(_) => "complex128",
        }
    }

    fn bytes(&self) -> Vec<u8> {
        match self {
            FieldData::Real(f) => {
                let mut out = Vec::with_capacity(f.values().len() * 8);
                for &x in f.values() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
                out
            }
            FieldData::Complex(f) => {
                let mut out = Vec::with_capacity(f.values().len() * 16);
                for z in f.values() {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
                out
            }
        }
    }
}

/// Writes numbered snapshots: a raw little-endian binary per field plus one
/// JSON header per snapshot describing shape, element type, grid, and time.
pub struct SnapshotWriter {
    dir: PathBuf,
    shape: Vec<usize>,
    grid: serde_json::Value,
    pub count: usize,
}

impl SnapshotWriter {
    pub fn new(run_dir: &Path, grid: &SpectralGrid<f64>) -> CliResult<Self> {
        let dir = run_dir.join("snapshots");
        ensure_dir(&dir)?;
        let shape = match grid.dim() {
            1 => vec![grid.n()],
            _ => vec![grid.n(), grid.n()],
        };
        let grid_json = json!({
            "dim": grid.dim(),
            "n": grid.n(),
            "length": grid.length(),
        });
        Ok(Self { dir, shape, grid: grid_json, count: 0 })
    }

    pub fn write(&mut self, time: f64, fields: &[(&str, FieldData<'_>)]) -> CliResult<()> {
        let index = self.count;
        let mut field_meta = serde_json::Map::new();
        for (name, data) in fields {
            let file = format!("snap_{index:06}_{name}.bin");
            let path = self.dir.join(&file);
            std::fs::write(&path, data.bytes()).map_err(|e| io_crash(&path, e))?;
            field_meta.insert(
                name.to_string(),
                json!({
                    "file": file,
                    "shape": self.shape,
                    "dtype": data.dtype(),
                    "byte_order": "little",
                }),
            );
        }
        let header = json!({
            "time": time,
            "grid": self.grid,
            "fields": field_meta,
        });
        let path = self.dir.join(format!("snap_{index:06}.json"));
        let text = serde_json::to_string_pretty(&header)
            .map_err(|e| CliError::Crash(format!("cannot serialize snapshot header: {e}")))?;
        std::fs::write(&path, text).map_err(|e| io_crash(&path, e))?;
        self.count += 1;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: String,
    seed: u64,
    versions: ManifestVersions,
    wall_time_s: f64,
    outcome: &'a str,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct ManifestVersions {
    qhdlab: &'static str,
    cli: &'static str,
}

pub fn write_manifest(
    dir: &Path,
    config: &RunConfig,
    kind_name: &str,
    seed: u64,
    wall_time_s: f64,
    outcome: &str,
) -> CliResult<()> {
    let manifest = Manifest {
        experiment: kind_name.to_string(),
        seed,
        versions: ManifestVersions {
            qhdlab: qhdlab::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        wall_time_s,
        outcome,
        config,
    };
    write_json(dir, "manifest.json", &manifest)?;
    Ok(())
}

/// Appends one line to stdout immediately (used for progress lines that
/// scripted callers may parse).
pub fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}
