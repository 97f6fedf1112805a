//! Turning files into validated solver inputs.

use std::fs;
use std::path::{Path, PathBuf};

use corrmv::embedding::{Correction, DissimilarityViews};
use corrmv::features::MultiViewFeatureSet;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io;

/// Feature sets of the UCI multiple-features collection with their
/// dimensions. Files are named `mfeat-<name>`.
pub const MFEAT_VIEWS: [(&str, usize); 6] = [
    ("fou", 76),
    ("fac", 216),
    ("kar", 64),
    ("pix", 240),
    ("zer", 47),
    ("mor", 6),
];

pub const MFEAT_CLASSES: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct FeatureIngest {
    pub n_instances: usize,
    pub view_dims: Vec<usize>,
    pub normalized: bool,
    pub duplicated: bool,
}

/// Reads one CSV per view (rows are feature dimensions, columns instances).
///
/// A single view is duplicated when `duplicate` is set, which turns the
/// multi-view solvers into a single-view dimension reduction.
pub fn ingest_features(
    paths: &[PathBuf],
    duplicate: bool,
    normalize: bool,
) -> Result<(MultiViewFeatureSet, FeatureIngest)> {
    if paths.is_empty() {
        return Err(CliError::invalid("no feature views given"));
    }
    if duplicate && paths.len() != 1 {
        return Err(CliError::invalid("duplication needs exactly one view"));
    }
    let mut views = Vec::with_capacity(paths.len());
    for p in paths {
        views.push(io::read_matrix(p)?);
    }
    check_instances(paths, &views, |m| m.ncols())?;
    if duplicate {
        views.push(views[0].clone());
    }
    finish(views, normalize, duplicate)
}

fn check_instances(paths: &[PathBuf], views: &[DMatrix<f64>], count: impl Fn(&DMatrix<f64>) -> usize) -> Result<()> {
    let n0 = count(&views[0]);
    for (p, v) in paths.iter().zip(views).skip(1) {
        if count(v) != n0 {
            return Err(CliError::invalid(format!(
                "{} has {} instances but {} has {}",
                paths[0].display(),
                n0,
                p.display(),
                count(v)
            )));
        }
    }
    Ok(())
}

fn finish(views: Vec<DMatrix<f64>>, normalize: bool, duplicated: bool) -> Result<(MultiViewFeatureSet, FeatureIngest)> {
    let mut fs = MultiViewFeatureSet::new(views)?;
    if normalize {
        fs = fs.normalized()?;
    }
    let report = FeatureIngest {
        n_instances: fs.n_instances(),
        view_dims: fs.view_dims(),
        normalized: normalize,
        duplicated,
    };
    Ok((fs, report))
}

/// Reads whitespace-separated `mfeat-<name>` files, one instance per line.
/// Instances are grouped by class in equal blocks, so the labels follow
/// from the row index.
pub fn ingest_mfeat(
    dir: &Path,
    names: &[String],
    normalize: bool,
) -> Result<(MultiViewFeatureSet, Vec<usize>, FeatureIngest)> {
    if names.is_empty() {
        return Err(CliError::invalid("no mfeat views requested"));
    }
    let mut paths = Vec::new();
    let mut views = Vec::new();
    for name in names {
        let Some(&(_, dim)) = MFEAT_VIEWS.iter().find(|(n, _)| n == name) else {
            return Err(CliError::invalid(format!(
                "unknown mfeat view `{name}`; expected one of fou, fac, kar, pix, zer, mor"
            )));
        };
        let path = dir.join(format!("mfeat-{name}"));
        views.push(read_whitespace_rows(&path, dim)?);
        paths.push(path);
    }
    check_instances(&paths, &views, |m| m.nrows())?;
    let n = views[0].nrows();
    if n == 0 || n % MFEAT_CLASSES != 0 {
        return Err(CliError::invalid(format!(
            "{} instances cannot form {MFEAT_CLASSES} equal classes",
            n
        )));
    }
    let labels = (0..n).map(|i| i / (n / MFEAT_CLASSES)).collect();
    let views = views.into_iter().map(|m| m.transpose()).collect();
    let (fs, report) = finish(views, normalize, false)?;
    Ok((fs, labels, report))
}

fn read_whitespace_rows(path: &Path, dim: usize) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut data = Vec::new();
    let mut rows = 0;
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for cell in line.split_whitespace() {
            data.push(cell.parse::<f64>().map_err(|_| {
                CliError::parse(path, k as u64 + 1, format!("`{cell}` is not a number"))
            })?);
        }
        if data.len() - before != dim {
            return Err(CliError::parse(
                path,
                k as u64 + 1,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, dim, &data))
}

/// Reads square CSV matrices and repairs them into valid views, returning
/// one correction report per file. With `square` every entry is squared
/// first, for inputs holding plain distances.
pub fn ingest_dissimilarities(
    paths: &[PathBuf],
    square: bool,
) -> Result<(DissimilarityViews, Vec<Correction>)> {
    if paths.is_empty() {
        return Err(CliError::invalid("no dissimilarity views given"));
    }
    let mut raw = Vec::with_capacity(paths.len());
    for p in paths {
        let m = io::read_matrix(p)?;
        if m.nrows() != m.ncols() {
            return Err(CliError::invalid(format!(
                "{} is {}x{}, dissimilarities must be square",
                p.display(),
                m.nrows(),
                m.ncols()
            )));
        }
        raw.push(if square { m.map(|x| x * x) } else { m });
    }
    check_instances(paths, &raw, |m| m.nrows())?;
    let mut deltas = Vec::with_capacity(raw.len());
    let mut reports = Vec::with_capacity(raw.len());
    for m in raw {
        let (clean, report) = DissimilarityViews::sanitize(vec![m])?;
        deltas.extend(clean.deltas().iter().cloned());
        reports.push(report);
    }
    Ok((DissimilarityViews::new(deltas, None)?, reports))
}
