//! File formats: parameter JSON, dataset CSV, label files, curve CSV.
//!
//! All numeric output uses `{}` formatting, which round-trips f64 exactly and
//! never depends on locale.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::model::GmmParams;
use crate::numkit::Matrix;

use super::{BenchError, CurveTable};

fn io_err(path: &Path, source: std::io::Error) -> BenchError {
    BenchError::Io { path: path.to_path_buf(), source }
}

pub fn write_params_json(params: &GmmParams, path: &Path) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(params)
        .map_err(|source| BenchError::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_params_json(path: &Path) -> Result<GmmParams, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let params: GmmParams = serde_json::from_str(&text)
        .map_err(|source| BenchError::Json { path: path.to_path_buf(), source })?;
    crate::model::validate(&params)
        .map_err(|e| BenchError::InvalidConfig(format!("{}: {e}", path.display())))?;
    Ok(params)
}

/// Observations as CSV with header `x0,...,x{d-1}`.
pub fn write_dataset_csv(y: &Matrix, path: &Path) -> Result<(), BenchError> {
    let mut out = String::new();
    let header: Vec<String> = (0..y.cols()).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for j in 0..y.rows() {
        let row: Vec<String> = y.row(j).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_dataset_csv(path: &Path) -> Result<Matrix, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue, // header
            Err(e) => {
                return Err(BenchError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    detail: e.to_string(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(BenchError::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: "no data rows".into(),
        });
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(BenchError::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: "rows have unequal lengths".into(),
        });
    }
    Ok(Matrix::from_rows(&rows))
}

/// Labels as one 0-based integer per line.
pub fn write_labels(labels: &[usize], path: &Path) -> Result<(), BenchError> {
    let mut out = String::new();
    for z in labels {
        out.push_str(&z.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(line.parse().map_err(|e: std::num::ParseIntError| BenchError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            detail: e.to_string(),
        })?);
    }
    Ok(labels)
}

/// Mean-error curves as CSV; one row per (method, iteration).
pub fn write_curves(table: &CurveTable, path: &Path) -> Result<(), BenchError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "method,iteration,mean_h,mean_ln_h,n_zero_reps")?;
        for curve in &table.curves {
            for it in 0..curve.mean_h.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    curve.method, it, curve.mean_h[it], curve.mean_ln_h[it], curve.n_zero_reps[it]
                )?;
            }
        }
        if table.truncated {
            writeln!(
                w,
                "# truncated: wall-clock budget reached after {} of {} replications",
                table.completed_replications, table.config.replications
            )?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Side-car metadata (config echo, per-replication seeds and separation
/// values, wall time) as JSON.
pub fn write_metadata(table: &CurveTable, path: &Path) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(table)
        .map_err(|source| BenchError::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Derive the metadata path of an output CSV: `curves.csv` -> `curves.meta.json`.
pub fn metadata_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.meta.json"))
}
