//! Dataset ingestion from delimited text and invertible standardization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::LassoProblem;
use crate::numerics::{IndexSet, Matrix};

/// Cell contents treated as missing.
pub const MISSING_TOKENS: [&str; 3] = ["", "NA", "?"];

/// Which column holds the response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Target {
    type Err = std::convert::Infallible;

    /// A bare integer is a column index, anything else a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Target::Index(i),
            Err(_) => Target::Name(s.to_string()),
        })
    }
}

/// A parsed dataset: the problem plus what was learned while reading it.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub problem: LassoProblem,
    /// Header names of the design columns, in order.
    pub columns: Vec<String>,
    pub target: String,
    /// Records removed because a cell was missing.
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_TOKENS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Reads a delimited file with a header row.
///
/// Every column other than the target must be numeric. A column whose
/// non-missing cells all fail to parse is reported as non-numeric; a stray bad
/// cell in an otherwise numeric column is a parse error at that record.
/// Records with a missing cell are dropped and counted.
pub fn load_csv(path: &Path, target: &Target, delimiter: u8) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new().delimiter(delimiter).has_headers(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let t = match target {
        Target::Index(i) if *i < header.len() => *i,
        Target::Index(i) => return Err(Error::MissingTarget(format!("#{i} (file has {} columns)", header.len()))),
        Target::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingTarget(name.clone()))?,
    };
    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;

    // Column c is numeric unless every non-missing cell fails to parse.
    let width = header.len();
    let mut parsed_any = vec![false; width];
    let mut failed_any = vec![false; width];
    for rec in &records {
        for (c, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                continue;
            }
            match cell.trim().parse::<f64>() {
                Ok(_) => parsed_any[c] = true,
                Err(_) => failed_any[c] = true,
            }
        }
    }
    let non_numeric: Vec<String> =
        (0..width).filter(|&c| failed_any[c] && !parsed_any[c]).map(|c| header[c].clone()).collect();
    if !non_numeric.is_empty() {
        return Err(Error::NonNumericColumns(non_numeric));
    }

    let features: Vec<usize> = (0..width).filter(|&c| c != t).collect();
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut dropped = 0;
    'records: for (r, rec) in records.iter().enumerate() {
        let mut row = Vec::with_capacity(width);
        for (c, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                dropped += 1;
                continue 'records;
            }
            let v: f64 = cell.trim().parse().map_err(|e: std::num::ParseFloatError| Error::Parse {
                path: path.to_path_buf(),
                record: r + 1,
                column: header[c].clone(),
                message: format!("{cell:?}: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    record: r + 1,
                    column: header[c].clone(),
                    message: format!("{cell:?} is not finite"),
                });
            }
            row.push(v);
        }
        y.push(row[t]);
        data.extend(features.iter().map(|&c| row[c]));
    }
    if y.is_empty() {
        return Err(Error::AllRowsDropped(dropped));
    }
    if features.is_empty() {
        return Err(Error::DimensionMismatch("no feature columns besides the target".into()));
    }
    let n = y.len();
    let problem = LassoProblem::new(Matrix::new(n, features.len(), data)?, y)?;
    Ok(LoadedData {
        problem,
        columns: features.iter().map(|&c| header[c].clone()).collect(),
        target: header[t].clone(),
        dropped_rows: dropped,
    })
}

/// Affine maps applied by [`standardize`], kept for prediction on raw data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    /// Raw column indices retained, in order.
    pub kept: IndexSet,
    /// Raw column indices dropped as constant.
    pub dropped: IndexSet,
    /// Mean and scale of each kept column.
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub response_mean: f64,
    /// 1 unless the response was scaled.
    pub response_scale: f64,
}

impl Standardization {
    /// Fitted raw-scale response for a raw-scale row, given weights on the
    /// standardized columns.
    pub fn predict_raw(&self, weights: &[f64], raw_row: &[f64]) -> f64 {
        let z: f64 = self
            .kept
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .zip(weights)
            .map(|((j, (m, s)), w)| w * (raw_row[j] - m) / s)
            .sum();
        self.response_mean + self.response_scale * z
    }

    /// Intercept and raw-column coefficients equivalent to `weights`.
    pub fn raw_coefficients(&self, weights: &[f64], raw_p: usize) -> (f64, Vec<f64>) {
        let mut beta = vec![0.0; raw_p];
        let mut intercept = self.response_mean;
        for ((j, (m, s)), w) in self.kept.iter().zip(self.means.iter().zip(&self.scales)).zip(weights) {
            let b = self.response_scale * w / s;
            beta[j] = b;
            intercept -= b * m;
        }
        (intercept, beta)
    }
}

/// Centers every column and the response, scales columns to unit mean square
/// (`‖x_j‖²/n = 1`) and drops constant columns.
pub fn standardize(problem: &LassoProblem) -> Result<(LassoProblem, Standardization)> {
    standardize_with(problem, false)
}

/// [`standardize`], optionally scaling the response to unit mean square too.
pub fn standardize_with(problem: &LassoProblem, scale_response: bool) -> Result<(LassoProblem, Standardization)> {
    let n = problem.n();
    if n < 2 {
        return Err(Error::InvalidArgument("standardization needs at least two rows".into()));
    }
    let x = problem.design();
    let (mut kept, mut dropped, mut means, mut scales) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for j in 0..problem.p() {
        let col = x.column(j);
        let (m, s) = mean_and_scale(&col);
        if s <= 1e-12 * m.abs().max(1.0) {
            dropped.push(j);
        } else {
            kept.push(j);
            means.push(m);
            scales.push(s);
        }
    }
    if kept.is_empty() {
        return Err(Error::DimensionMismatch("every column is constant".into()));
    }
    let kept = IndexSet::from_unsorted(kept);
    let design = Matrix::from_fn(n, kept.len(), |i, k| (x[(i, kept.as_slice()[k])] - means[k]) / scales[k])?;
    let (response_mean, s_y) = mean_and_scale(problem.response());
    let response_scale = if scale_response && s_y > 0.0 { s_y } else { 1.0 };
    let y: Vec<f64> = problem.response().iter().map(|v| (v - response_mean) / response_scale).collect();
    let out = LassoProblem::with_flags(design, y, true, true)?;
    Ok((
        out,
        Standardization {
            kept,
            dropped: IndexSet::from_unsorted(dropped),
            means,
            scales,
            response_mean,
            response_scale,
        },
    ))
}

/// Mean and root mean square deviation (denominator `n`).
fn mean_and_scale(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ms = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, ms.sqrt())
}
