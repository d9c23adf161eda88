//! Repeated k-fold cross-validation of regularized estimators.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bagged_lasso_from_paths, ridge, ridge_scale, AdaptivePath};
use crate::bolasso::{aggregate, bootstrap_paths, log_grid, Resampling};
use crate::error::{Error, Result, ResultExt};
use crate::lasso::{lars_lasso_path, LassoProblem};
use crate::numerics::dot;
use crate::rng::{child_rng, derive_seed};

/// Length of every parameter grid scanned by [`Estimator`].
pub const CV_GRID_POINTS: usize = 32;
const L1_MIN_RATIO: f64 = 1e-3;
const RIDGE_TOP: f64 = 10.0;
const RIDGE_MIN_RATIO: f64 = 1e-5;

/// An estimator with one free parameter, fit for a whole grid at once.
pub trait CvMethod: Sync {
    fn name(&self) -> String;

    /// Parameter values to scan, decreasing, derived from the full dataset.
    fn parameter_grid(&self, full: &LassoProblem) -> Result<Vec<f64>>;

    /// One weight vector per grid value, fit on `train`. `seed` drives any
    /// resampling.
    fn fit_grid(&self, train: &LassoProblem, grid: &[f64], seed: u64) -> Result<Vec<Vec<f64>>>;
}

/// The estimators compared under cross-validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Estimator {
    Lasso,
    /// Least-squares refit on the intersection of bootstrap supports.
    Bolasso { replicates: usize },
    /// Least-squares refit on variables selected by at least `soft_fraction` of
    /// the bootstrap replicates.
    BolassoSoft { replicates: usize, soft_fraction: f64 },
    /// Average of bootstrap Lasso solutions.
    Bagging { replicates: usize },
    Ridge,
    AdaptiveLasso { gamma: f64 },
}

impl CvMethod for Estimator {
    fn name(&self) -> String {
        match self {
            Estimator::Lasso => "lasso",
            Estimator::Bolasso { .. } => "bolasso",
            Estimator::BolassoSoft { .. } => "bolasso-s",
            Estimator::Bagging { .. } => "bagging",
            Estimator::Ridge => "ridge",
            Estimator::AdaptiveLasso { .. } => "adaptive-lasso",
        }
        .to_string()
    }

    /// ℓ1 methods scan `μ_max` down to `10⁻³·μ_max`; ridge scans `10·s` down
    /// to `10⁻⁴·s` with `s = tr(XᵀX/n)/p`. All grids have 32 log-spaced points.
    fn parameter_grid(&self, full: &LassoProblem) -> Result<Vec<f64>> {
        match self {
            Estimator::Ridge => log_grid(RIDGE_TOP * ridge_scale(full), CV_GRID_POINTS, RIDGE_MIN_RATIO),
            Estimator::AdaptiveLasso { gamma } => {
                log_grid(AdaptivePath::new(full, *gamma)?.mu_max(), CV_GRID_POINTS, L1_MIN_RATIO)
            }
            _ => log_grid(full.mu_max(), CV_GRID_POINTS, L1_MIN_RATIO),
        }
    }

    fn fit_grid(&self, train: &LassoProblem, grid: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
        match *self {
            Estimator::Lasso => {
                let path = lars_lasso_path(train, usize::MAX)?;
                Ok(grid.iter().map(|&mu| path.at(mu)).collect())
            }
            Estimator::Bolasso { replicates } => {
                let paths = bootstrap_paths(train, replicates, seed, Resampling::Bootstrap)?;
                let result = aggregate(train, &paths, grid, 1.0, 0.0)?;
                Ok(result.per_mu.into_iter().map(|s| s.refit_weights).collect())
            }
            Estimator::BolassoSoft { replicates, soft_fraction } => {
                let paths = bootstrap_paths(train, replicates, seed, Resampling::Bootstrap)?;
                let result = aggregate(train, &paths, grid, soft_fraction, 0.0)?;
                Ok(result.per_mu.into_iter().map(|s| s.soft_refit_weights).collect())
            }
            Estimator::Bagging { replicates } => {
                let paths = bootstrap_paths(train, replicates, seed, Resampling::Bootstrap)?;
                Ok(grid.iter().map(|&mu| bagged_lasso_from_paths(&paths, mu, train.p())).collect())
            }
            Estimator::Ridge => grid.iter().map(|&lambda| ridge(train, lambda)).collect(),
            Estimator::AdaptiveLasso { gamma } => {
                let path = AdaptivePath::new(train, gamma)?;
                Ok(grid.iter().map(|&mu| path.at(mu)).collect())
            }
        }
    }
}

/// Cross-validation summary of one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodCv {
    pub name: String,
    pub grid: Vec<f64>,
    /// Mean held-out squared error ×100 at each grid value.
    pub mean_curve_x100: Vec<f64>,
    pub best_index: usize,
    pub parameter: f64,
    pub mean_mse_x100: f64,
    /// Standard deviation across cells (denominator `cells − 1`), ×100.
    pub std_mse_x100: f64,
    /// Held-out squared error ×100 of every cell at the chosen parameter,
    /// ordered by replication then fold.
    pub cell_mse_x100: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub n: usize,
    pub folds: usize,
    pub replications: usize,
    pub methods: Vec<MethodCv>,
}

impl CvReport {
    pub fn method(&self, name: &str) -> Option<&MethodCv> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// Sizes of `folds` near-equal parts of `n` rows; the first `n mod folds`
/// parts get the extra row.
pub fn fold_sizes(n: usize, folds: usize) -> Vec<usize> {
    (0..folds).map(|f| n / folds + usize::from(f < n % folds)).collect()
}

/// Shuffles `0..n` with `rng` and cuts it into parts of [`fold_sizes`].
pub fn partition(n: usize, folds: usize, rng: &mut impl rand::Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut rest = order.as_slice();
    fold_sizes(n, folds)
        .into_iter()
        .map(|size| {
            let (head, tail) = rest.split_at(size);
            rest = tail;
            head.to_vec()
        })
        .collect()
}

fn held_out_mse(test: &LassoProblem, w: &[f64]) -> f64 {
    let r = test.residual(w);
    dot(&r, &r) / test.n() as f64
}

/// Repeated k-fold cross-validation with a pooled choice of parameter.
///
/// Replication `r` shuffles rows with `child_rng(seed, r)`; every method sees
/// the same partitions. Cell `(r, f)` seeds resampling with
/// `derive_seed(derive_seed(seed, r), f + 1)`. For each method the grid value
/// with the smallest mean held-out error over all `replications × folds`
/// cells is chosen (ties to the earlier grid value), and the mean and standard
/// deviation of the cell errors at that value are reported, ×100.
pub fn kfold_cv<M: CvMethod>(
    problem: &LassoProblem,
    methods: &[M],
    folds: usize,
    replications: usize,
    seed: u64,
) -> Result<CvReport> {
    let n = problem.n();
    if folds < 2 || n < folds || replications == 0 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs 2 <= folds <= n and replications >= 1 (got folds = {folds}, n = {n}, replications = {replications})"
        )));
    }
    let grids = methods
        .iter()
        .map(|m| m.parameter_grid(problem).context(|| format!("{} parameter grid", m.name())))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize, Vec<usize>)> = (0..replications)
        .flat_map(|r| {
            let parts = partition(n, folds, &mut child_rng(seed, r as u64));
            parts.into_iter().enumerate().map(move |(f, rows)| (r, f, rows))
        })
        .collect();
    // errors[cell][method][grid]
    let errors = cells
        .par_iter()
        .map(|(r, f, test_rows)| {
            let mut in_test = vec![false; n];
            test_rows.iter().for_each(|&i| in_test[i] = true);
            let train_rows: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let train = problem.take_rows(&train_rows)?;
            let test = problem.take_rows(test_rows)?;
            let cell_seed = derive_seed(derive_seed(seed, *r as u64), *f as u64 + 1);
            methods
                .iter()
                .zip(&grids)
                .map(|(m, grid)| {
                    let fits = m
                        .fit_grid(&train, grid, cell_seed)
                        .context(|| format!("{} on replication {r}, fold {f}", m.name()))?;
                    Ok(fits.iter().map(|w| held_out_mse(&test, w)).collect::<Vec<f64>>())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let ncells = cells.len() as f64;
    let summaries = methods
        .iter()
        .zip(grids)
        .enumerate()
        .map(|(k, (m, grid))| {
            let curve: Vec<f64> =
                (0..grid.len()).map(|g| 100.0 * errors.iter().map(|e| e[k][g]).sum::<f64>() / ncells).collect();
            let best = (0..grid.len()).fold(0, |b, g| if curve[g] < curve[b] { g } else { b });
            let cell: Vec<f64> = errors.iter().map(|e| 100.0 * e[k][best]).collect();
            let mean = cell.iter().sum::<f64>() / ncells;
            let var = if cell.len() > 1 {
                cell.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (ncells - 1.0)
            } else {
                0.0
            };
            MethodCv {
                name: m.name(),
                parameter: grid[best],
                grid,
                mean_curve_x100: curve,
                best_index: best,
                mean_mse_x100: mean,
                std_mse_x100: var.sqrt(),
                cell_mse_x100: cell,
            }
        })
        .collect();
    Ok(CvReport { n, folds, replications, methods: summaries })
}

/// Parses the method names accepted on the command line.
pub fn estimators_from_names(names: &[String], replicates: usize, soft_fraction: f64) -> Result<Vec<Estimator>> {
    names
        .iter()
        .map(|name| {
            Ok(match name.as_str() {
                "lasso" => Estimator::Lasso,
                "bolasso" => Estimator::Bolasso { replicates },
                "bolasso-s" => Estimator::BolassoSoft { replicates, soft_fraction },
                "bagging" => Estimator::Bagging { replicates },
                "ridge" => Estimator::Ridge,
                "adaptive-lasso" => Estimator::AdaptiveLasso { gamma: 1.0 },
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown method {other:?} (expected lasso, bolasso, bolasso-s, bagging, ridge, adaptive-lasso)"
                    )))
                }
            })
        })
        .collect()
}
