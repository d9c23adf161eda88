//! Bootstrap-intersected Lasso model selection.
//!
//! For each of `m` bootstrap resamples the full Lasso path is computed, its
//! support is read off on a shared grid of `μ` values, and the supports are
//! intersected across replicates (the hard support) or thresholded by selection
//! frequency (the soft support). The selected variables are then refit by
//! unregularized least squares on the original data.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::lasso::{lars_lasso_path, LassoPath, LassoProblem};
use crate::numerics::{min_norm_lstsq, IndexSet};
use crate::rng::{child_rng, derive_seed};

pub const DEFAULT_REPLICATES: usize = 128;
pub const DEFAULT_SOFT_FRACTION: f64 = 0.9;
pub const DEFAULT_GRID_POINTS: usize = 64;
pub const DEFAULT_GRID_MIN_RATIO: f64 = 1e-3;
/// Attempts beyond the first when a bootstrap design is degenerate.
const MAX_RETRIES: u64 = 3;

/// How the regularization grid is chosen for a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuGrid {
    /// Fixed decreasing values.
    Explicit(Vec<f64>),
    /// `points` log-spaced values from `μ_max` down to `μ_max·min_ratio`,
    /// where `μ_max` is taken from the dataset being analysed.
    LogRelative { points: usize, min_ratio: f64 },
    /// `μ = μ₀/√n` for each listed `μ₀` (sorted decreasing).
    RootN(Vec<f64>),
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid::LogRelative { points: DEFAULT_GRID_POINTS, min_ratio: DEFAULT_GRID_MIN_RATIO }
    }
}

impl MuGrid {
    /// Grid for a dataset, relative to its own `μ_max`.
    pub fn resolve(&self, problem: &LassoProblem) -> Result<Vec<f64>> {
        self.resolve_for(problem.mu_max(), problem.n())
    }

    /// Grid for an explicit reference `μ_max` and sample size.
    pub fn resolve_for(&self, mu_max: f64, n: usize) -> Result<Vec<f64>> {
        let grid = match self {
            MuGrid::Explicit(v) => v.clone(),
            MuGrid::LogRelative { points, min_ratio } => log_grid(mu_max, *points, *min_ratio)?,
            MuGrid::RootN(mu0) => {
                let s = (n as f64).sqrt();
                let mut v: Vec<f64> = mu0.iter().map(|m| m / s).collect();
                v.sort_by(|a, b| b.total_cmp(a));
                v
            }
        };
        validate_grid(&grid)?;
        Ok(grid)
    }
}

/// `points` log-spaced values from `top` down to `top·min_ratio`.
pub fn log_grid(top: f64, points: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if points == 0 || !(top > 0.0) || !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "log grid needs points >= 1, top > 0 and min_ratio in (0, 1) (got {points}, {top}, {min_ratio})"
        )));
    }
    if points == 1 {
        return Ok(vec![top]);
    }
    let step = min_ratio.ln() / (points - 1) as f64;
    Ok((0..points).map(|k| top * (step * k as f64).exp()).collect())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::InvalidArgument("mu grid must be nonempty, finite and positive".into()));
    }
    if grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument("mu grid must be strictly decreasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolassoConfig {
    pub replicates: usize,
    pub mu_grid: MuGrid,
    /// Minimum selection frequency for the soft support, in (0, 1].
    pub soft_fraction: f64,
    pub seed: u64,
    /// Entries with `|w_j| <= support_tol` count as unselected. Path knots carry
    /// exact zeros, so the default is 0.
    pub support_tol: f64,
}

impl Default for BolassoConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            mu_grid: MuGrid::default(),
            soft_fraction: DEFAULT_SOFT_FRACTION,
            seed: 0,
            support_tol: 0.0,
        }
    }
}

impl BolassoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
        }
        if !(self.soft_fraction > 0.0 && self.soft_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "soft fraction {} not in (0, 1]",
                self.soft_fraction
            )));
        }
        if !(self.support_tol >= 0.0) {
            return Err(Error::InvalidArgument("support tolerance must be nonnegative".into()));
        }
        if let MuGrid::Explicit(g) | MuGrid::RootN(g) = &self.mu_grid {
            if g.is_empty() {
                return Err(Error::InvalidArgument("mu grid is empty".into()));
            }
        }
        Ok(())
    }
}

/// Selection outcome at one grid value of `μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSelection {
    pub mu: f64,
    /// Indexed by replicate.
    pub per_replicate_supports: Vec<IndexSet>,
    pub frequencies: Vec<f64>,
    pub hard_support: IndexSet,
    pub soft_support: IndexSet,
    /// Least-squares refit on the hard support.
    pub refit_weights: Vec<f64>,
    /// Least-squares refit on the soft support.
    pub soft_refit_weights: Vec<f64>,
}

impl MuSelection {
    /// Intersection of the supports of the first `m` replicates.
    pub fn hard_support_prefix(&self, m: usize) -> IndexSet {
        let m = m.clamp(1, self.per_replicate_supports.len());
        let supports = &self.per_replicate_supports[..m];
        supports[1..].iter().fold(supports[0].clone(), |acc, s| acc.intersection(s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolassoResult {
    pub p: usize,
    pub replicates: usize,
    pub per_mu: Vec<MuSelection>,
}

impl BolassoResult {
    pub fn mu_grid(&self) -> Vec<f64> {
        self.per_mu.iter().map(|s| s.mu).collect()
    }
}

/// How rows are resampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Resampling {
    /// `n` draws with replacement.
    #[default]
    Bootstrap,
    /// The original rows in order; degenerates bagging to a single fit.
    Identity,
}

impl Resampling {
    pub fn indices(self, n: usize, rng: &mut impl Rng) -> Vec<usize> {
        match self {
            Resampling::Bootstrap => (0..n).map(|_| rng.gen_range(0..n)).collect(),
            Resampling::Identity => (0..n).collect(),
        }
    }
}

/// `n` rows drawn uniformly with replacement, responses paired with rows.
pub fn bootstrap_sample(problem: &LassoProblem, rng: &mut impl Rng) -> Result<LassoProblem> {
    let rows = Resampling::Bootstrap.indices(problem.n(), rng);
    problem.take_rows(&rows)
}

/// Lasso paths on `m` resamples of `problem`.
///
/// Replicate `k` draws its rows from a generator seeded by
/// `derive_seed(seed, k)`; a degenerate resample is redrawn with a further
/// derived seed up to three times.
pub fn bootstrap_paths(problem: &LassoProblem, m: usize, seed: u64, resampling: Resampling) -> Result<Vec<LassoPath>> {
    (0..m as u64)
        .into_par_iter()
        .map(|k| replicate_path(problem, derive_seed(seed, k), resampling).context(|| format!("bootstrap replicate {k}")))
        .collect()
}

fn replicate_path(problem: &LassoProblem, seed: u64, resampling: Resampling) -> Result<LassoPath> {
    let mut attempt = 0;
    loop {
        let mut rng = child_rng(seed, attempt);
        let rows = resampling.indices(problem.n(), &mut rng);
        match lars_lasso_path(&problem.take_rows(&rows)?, usize::MAX) {
            Err(Error::DegenerateDesign { .. }) if attempt < MAX_RETRIES && resampling == Resampling::Bootstrap => {
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Variables selected by at least `fraction` of the supports.
pub fn soft_intersect(supports: &[IndexSet], fraction: f64, p: usize) -> IndexSet {
    let counts = selection_counts(supports, p);
    let m = supports.len() as f64;
    (0..p).filter(|&j| counts[j] as f64 >= fraction * m).collect()
}

pub(crate) fn selection_counts(supports: &[IndexSet], p: usize) -> Vec<usize> {
    let mut counts = vec![0usize; p];
    for s in supports {
        for j in s.iter() {
            counts[j] += 1;
        }
    }
    counts
}

/// Unregularized least-squares fit restricted to `support`, as a `p`-vector.
pub fn ols_refit(problem: &LassoProblem, support: &IndexSet) -> Result<Vec<f64>> {
    let mut w = vec![0.0; problem.p()];
    if support.is_empty() {
        return Ok(w);
    }
    let sub = problem.design().select_columns(support)?;
    let coef = min_norm_lstsq(&sub, problem.response())?;
    for (j, c) in support.iter().zip(coef) {
        w[j] = c;
    }
    Ok(w)
}

/// Runs the bootstrap-intersection procedure on `problem`.
pub fn run_bolasso(problem: &LassoProblem, config: &BolassoConfig) -> Result<BolassoResult> {
    config.validate()?;
    let grid = config.mu_grid.resolve(problem)?;
    let paths = bootstrap_paths(problem, config.replicates, config.seed, Resampling::Bootstrap)?;
    aggregate(problem, &paths, &grid, config.soft_fraction, config.support_tol)
}

/// Builds a [`BolassoResult`] from precomputed replicate paths.
pub fn aggregate(
    problem: &LassoProblem,
    paths: &[LassoPath],
    grid: &[f64],
    soft_fraction: f64,
    support_tol: f64,
) -> Result<BolassoResult> {
    let p = problem.p();
    let m = paths.len();
    let mut refits: HashMap<IndexSet, Vec<f64>> = HashMap::new();
    let mut refit = |s: &IndexSet| -> Result<Vec<f64>> {
        if let Some(w) = refits.get(s) {
            return Ok(w.clone());
        }
        let w = ols_refit(problem, s)?;
        refits.insert(s.clone(), w.clone());
        Ok(w)
    };
    let mut per_mu = Vec::with_capacity(grid.len());
    for &mu in grid {
        let supports: Vec<IndexSet> = paths
            .iter()
            .map(|path| crate::lasso::support_of(&path.at(mu), support_tol))
            .collect();
        let counts = selection_counts(&supports, p);
        let frequencies = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let hard_support: IndexSet = (0..p).filter(|&j| counts[j] == m).collect();
        let soft_support = soft_intersect(&supports, soft_fraction, p);
        let refit_weights = refit(&hard_support)?;
        let soft_refit_weights = refit(&soft_support)?;
        per_mu.push(MuSelection {
            mu,
            per_replicate_supports: supports,
            frequencies,
            hard_support,
            soft_support,
            refit_weights,
            soft_refit_weights,
        });
    }
    Ok(BolassoResult { p, replicates: m, per_mu })
}

/// The hard support of size `r` that holds over the most grid points; ties go
/// to the pattern reached at the larger `μ`.
pub fn most_stable_pattern(result: &BolassoResult, r: usize) -> Result<IndexSet> {
    most_stable_of(result.per_mu.iter().map(|s| &s.hard_support), r)
}

/// [`most_stable_pattern`] for any sequence of supports ordered by decreasing `μ`.
pub fn most_stable_of<'a>(supports: impl IntoIterator<Item = &'a IndexSet>, r: usize) -> Result<IndexSet> {
    // (count, first position) per pattern
    let mut tally: Vec<(&IndexSet, usize, usize)> = Vec::new();
    for (pos, s) in supports.into_iter().enumerate() {
        if s.len() != r {
            continue;
        }
        match tally.iter_mut().find(|t| t.0 == s) {
            Some(t) => t.1 += 1,
            None => tally.push((s, 1, pos)),
        }
    }
    tally
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|t| t.0.clone())
        .ok_or(Error::NoPatternOfSizeR(r))
}
