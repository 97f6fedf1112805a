//! CSV and JSON file handling.
//!
//! Matrices are plain comma-separated rows without a header. Values are
//! written in Rust's shortest round-trip scientific notation, so a
//! write-then-read cycle reproduces every bit. Parsing never consults the
//! locale.

use std::fs;
use std::path::Path;

use corrmv::SolverTrace;
use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

fn reader(path: &Path, flexible: bool) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(flexible)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            CliError::parse(path, line, format!("expected {expected_len} fields, found {len}"))
        }
        other => CliError::parse(path, line, format!("{other:?}")),
    }
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader(path, false)?.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::parse(path, line, format!("column {}: `{cell}` is not a number", col + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let Some(first) = rows.first() else {
        return Err(CliError::parse(path, 1, "file holds no rows"));
    };
    let cols = first.len();
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|x| format!("{x:e}")))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Class ids, one per field, in file order regardless of line breaks.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for record in reader(path, true)?.into_records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for cell in record.iter() {
            out.push(cell.parse::<usize>().map_err(|_| {
                CliError::parse(path, line, format!("`{cell}` is not a class id"))
            })?);
        }
    }
    if out.is_empty() {
        return Err(CliError::parse(path, 1, "file holds no labels"));
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

/// `iteration,objective` with 1-based iterations.
pub fn write_trace(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut body = String::from("iteration,objective\n");
    for (i, v) in trace.objective.iter().enumerate() {
        body.push_str(&format!("{},{v:e}\n", i + 1));
    }
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
