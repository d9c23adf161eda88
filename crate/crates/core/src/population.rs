//! Synthetic population models, the consistency index `κ`, and Monte-Carlo
//! estimates of how often a selection method recovers each variable.
//!
//! A [`PopulationModel`] fixes the covariance `Q` of the covariates, the true
//! loading vector and the noise level. Datasets are drawn from it with
//! [`sample_dataset`]; the experiments below repeat that draw many times and
//! tabulate the selected supports along a grid of regularization values.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bolasso::{bootstrap_paths, log_grid, selection_counts, soft_intersect, Resampling};
use crate::error::{Error, Result, ResultExt};
use crate::lasso::{lars_lasso_path, LassoPath, LassoProblem, SignPattern};
use crate::numerics::{dot, norm_inf, solve_spd, submatrix, Cholesky, IndexSet, Matrix};
use crate::rng::{child_rng, derive_seed};

/// How the relevant loadings of a generated model are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// Each relevant loading is `±U[1/3, 1]`, its sign taken from a normal draw.
    #[default]
    PerCoordinate,
    /// A normal draw on the relevant block, scaled to unit ℓ2 norm, times a
    /// single `U[1/3, 1]` factor.
    SharedScale,
}

/// Covariate covariance, true loadings and noise level of a linear model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct PopulationModel {
    q: Matrix,
    w_true: Vec<f64>,
    sigma: f64,
    j_true: IndexSet,
    s_true: SignPattern,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    q: Matrix,
    w_true: Vec<f64>,
    sigma: f64,
}

impl TryFrom<ModelFile> for PopulationModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        Self::new(f.q, f.w_true, f.sigma)
    }
}

impl From<PopulationModel> for ModelFile {
    fn from(m: PopulationModel) -> Self {
        Self { q: m.q, w_true: m.w_true, sigma: m.sigma }
    }
}

impl PopulationModel {
    /// Checks that `q` is symmetric positive definite with unit diagonal (within
    /// `1e-10`) and that `sigma >= 0`.
    pub fn new(q: Matrix, w_true: Vec<f64>, sigma: f64) -> Result<Self> {
        let p = w_true.len();
        if q.rows() != p || q.cols() != p {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{} but the loading vector has {p} entries",
                q.rows(),
                q.cols()
            )));
        }
        if let Some(j) = w_true.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("w_true[{j}]")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level {sigma} must be finite and nonnegative")));
        }
        if let Some(j) = (0..p).find(|&j| (q[(j, j)] - 1.0).abs() > 1e-10) {
            return Err(Error::InvalidArgument(format!("covariance diagonal entry {j} is {}, not 1", q[(j, j)])));
        }
        let asym = q.asymmetry();
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        Cholesky::new(&q)?;
        let s_true = crate::lasso::sign_pattern_of(&w_true, 0.0);
        let j_true = s_true.support();
        Ok(Self { q, w_true, sigma, j_true, s_true })
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn w_true(&self) -> &[f64] {
        &self.w_true
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn j_true(&self) -> &IndexSet {
        &self.j_true
    }

    pub fn s_true(&self) -> &SignPattern {
        &self.s_true
    }

    pub fn p(&self) -> usize {
        self.w_true.len()
    }

    /// Population counterpart of `μ_max`: `‖Q w‖∞`.
    pub fn mu_max(&self) -> f64 {
        norm_inf(&self.q.matvec(&self.w_true))
    }

    /// `points` log-spaced values from [`Self::mu_max`] down to `mu_max·min_ratio`.
    pub fn mu_grid(&self, points: usize, min_ratio: f64) -> Result<Vec<f64>> {
        log_grid(self.mu_max(), points, min_ratio)
    }
}

/// Random model with `p` variables of which the first `r` are relevant.
///
/// `Q` is `GGᵀ` rescaled to unit diagonal for a standard normal `p×p` matrix
/// `G`, and `σ = 0.1·(wᵀQw)^{1/2}`.
pub fn generate_population(p: usize, r: usize, rng: &mut impl Rng) -> Result<PopulationModel> {
    generate_population_with(p, r, WeightScheme::default(), rng)
}

pub fn generate_population_with(
    p: usize,
    r: usize,
    scheme: WeightScheme,
    rng: &mut impl Rng,
) -> Result<PopulationModel> {
    if r == 0 || r > p {
        return Err(Error::InvalidArgument(format!("need 1 <= r <= p (got r = {r}, p = {p})")));
    }
    let q = match draw_covariance(p, rng) {
        Err(Error::SingularGram) => draw_covariance(p, rng)?,
        other => other?,
    };
    let mut w = vec![0.0; p];
    match scheme {
        WeightScheme::PerCoordinate => {
            for wj in &mut w[..r] {
                let z: f64 = rng.sample(StandardNormal);
                let magnitude = rng.gen_range(1.0 / 3.0..=1.0);
                *wj = if z < 0.0 { -magnitude } else { magnitude };
            }
        }
        WeightScheme::SharedScale => {
            let z: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
            let scale = rng.gen_range(1.0 / 3.0..=1.0) / crate::numerics::norm2(&z);
            for (wj, zj) in w.iter_mut().zip(z) {
                *wj = scale * zj;
            }
        }
    }
    let sigma = 0.1 * dot(&w, &q.matvec(&w)).sqrt();
    PopulationModel::new(q, w, sigma)
}

fn draw_covariance(p: usize, rng: &mut impl Rng) -> Result<Matrix> {
    let g = Matrix::from_fn(p, p, |_, _| rng.sample(StandardNormal))?;
    let ggt = g.transpose().scaled_gram(1.0);
    Cholesky::new(&ggt).map_err(|_| Error::SingularGram)?;
    let d: Vec<f64> = (0..p).map(|i| ggt[(i, i)].sqrt()).collect();
    let q = Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { ggt[(i, j)] / (d[i] * d[j]) })?;
    Cholesky::new(&q).map_err(|_| Error::SingularGram)?;
    Ok(q)
}

/// `n` rows `x ~ N(0, Q)` with responses `y = xᵀw + ε`, `ε ~ N(0, σ²)`.
pub fn sample_dataset(model: &PopulationModel, n: usize, rng: &mut impl Rng) -> Result<LassoProblem> {
    sample_dataset_with_sigma(model, n, model.sigma, rng)
}

/// [`sample_dataset`] with an overriding noise level; `sigma = 0` gives
/// `y = X w` exactly.
pub fn sample_dataset_with_sigma(
    model: &PopulationModel,
    n: usize,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<LassoProblem> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let p = model.p();
    let factor = Cholesky::new(&model.q)?;
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        for zj in &mut z {
            *zj = rng.sample(StandardNormal);
        }
        let x = factor.lower_mul(&z);
        let eps: f64 = rng.sample(StandardNormal);
        y.push(dot(&x, &model.w_true) + sigma * eps);
        data.extend(x);
    }
    LassoProblem::new(Matrix::new(n, p, data)?, y)
}

/// `κ = ‖Q_{JᶜJ} Q_{JJ}⁻¹ s_J‖∞` for the model's support and signs. The Lasso
/// can only be sign-consistent when `κ <= 1`.
pub fn consistency_kappa(model: &PopulationModel) -> Result<f64> {
    let signs: Vec<f64> = model.j_true.iter().map(|j| model.s_true.as_slice()[j] as f64).collect();
    consistency_index(&model.q, &model.j_true, &signs)
}

/// `‖Q_{JᶜJ} Q_{JJ}⁻¹ s‖∞` for an arbitrary support `j` and sign vector `s`.
pub fn consistency_index(q: &Matrix, j: &IndexSet, s: &[f64]) -> Result<f64> {
    let p = q.rows();
    if j.is_empty() {
        return Err(Error::EmptySupport);
    }
    if j.len() >= p {
        return Err(Error::EmptyComplement);
    }
    let v = solve_spd(&submatrix(q, j, j)?, s)?;
    let jc = j.complement(p);
    Ok(norm_inf(&submatrix(q, &jc, j)?.matvec(&v)))
}

/// Generates models until one lands on the requested side of `κ <= 1`.
pub fn find_model_with_kappa(
    p: usize,
    r: usize,
    want_consistent: bool,
    rng: &mut impl Rng,
    max_draws: usize,
) -> Result<PopulationModel> {
    find_model_with(want_consistent, max_draws, || generate_population(p, r, rng))
}

/// [`find_model_with_kappa`] over an arbitrary model source.
pub fn find_model_with(
    want_consistent: bool,
    max_draws: usize,
    mut draw: impl FnMut() -> Result<PopulationModel>,
) -> Result<PopulationModel> {
    if max_draws == 0 {
        return Err(Error::InvalidArgument("max_draws must be at least 1".into()));
    }
    for _ in 0..max_draws {
        let model = draw()?;
        if (consistency_kappa(&model)? <= 1.0) == want_consistent {
            return Ok(model);
        }
    }
    Err(Error::NotFound(max_draws))
}

/// Selection rule applied to each simulated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum SelectionMethod {
    /// Support of the Lasso solution.
    Lasso,
    /// Variables selected in at least `soft_fraction` of `replicates` bootstrap
    /// Lasso fits; `soft_fraction = 1` is the plain intersection.
    Bolasso { replicates: usize, soft_fraction: f64 },
}

impl SelectionMethod {
    fn validate(&self) -> Result<()> {
        match *self {
            SelectionMethod::Lasso => Ok(()),
            SelectionMethod::Bolasso { replicates, soft_fraction } => {
                if replicates == 0 || !(soft_fraction > 0.0 && soft_fraction <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "bolasso needs replicates >= 1 and soft fraction in (0, 1] (got {replicates}, {soft_fraction})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Selected supports of one dataset along `grid`.
    pub fn supports(&self, problem: &LassoProblem, grid: &[f64], seed: u64) -> Result<Vec<IndexSet>> {
        match *self {
            SelectionMethod::Lasso => {
                let path = lars_lasso_path(problem, usize::MAX)?;
                Ok(grid.iter().map(|&mu| path.support_at(mu)).collect())
            }
            SelectionMethod::Bolasso { replicates, soft_fraction } => {
                let paths = bootstrap_paths(problem, replicates, seed, Resampling::Bootstrap)?;
                Ok(grid
                    .iter()
                    .map(|&mu| soft_intersect(&supports_at(&paths, mu), soft_fraction, problem.p()))
                    .collect())
            }
        }
    }
}

fn supports_at(paths: &[LassoPath], mu: f64) -> Vec<IndexSet> {
    paths.iter().map(|path| path.support_at(mu)).collect()
}

/// Selected supports from repeated simulation, indexed `[replication][grid]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRun {
    pub mu_grid: Vec<f64>,
    pub p: usize,
    pub supports: Vec<Vec<IndexSet>>,
}

impl SelectionRun {
    pub fn reps(&self) -> usize {
        self.supports.len()
    }

    pub fn frequency_table(&self) -> FrequencyTable {
        let counts = (0..self.mu_grid.len())
            .map(|k| {
                let at_mu: Vec<IndexSet> = self.supports.iter().map(|rep| rep[k].clone()).collect();
                selection_counts(&at_mu, self.p)
            })
            .collect();
        FrequencyTable { mu_grid: self.mu_grid.clone(), p: self.p, reps: self.reps(), counts }
    }

    /// Fraction of replications whose support equals `truth`, per grid value.
    pub fn pattern_probability(&self, truth: &IndexSet) -> Vec<f64> {
        let reps = self.reps() as f64;
        (0..self.mu_grid.len())
            .map(|k| self.supports.iter().filter(|rep| &rep[k] == truth).count() as f64 / reps)
            .collect()
    }
}

/// Per-`(μ, variable)` selection counts over `reps` replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub mu_grid: Vec<f64>,
    pub p: usize,
    pub reps: usize,
    /// Indexed `[grid][variable]`.
    pub counts: Vec<Vec<usize>>,
}

impl FrequencyTable {
    pub fn frequency(&self, grid_index: usize, variable: usize) -> f64 {
        self.counts[grid_index][variable] as f64 / self.reps as f64
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / self.reps as f64).collect())
            .collect()
    }
}

/// Replication `k` draws its dataset from `child_rng(derive_seed(seed, k), 0)`
/// and seeds any resampling with `derive_seed(derive_seed(seed, k), 1)`.
fn replication_streams(seed: u64, k: usize) -> (crate::rng::Rng, u64) {
    let rep_seed = derive_seed(seed, k as u64);
    (child_rng(rep_seed, 0), derive_seed(rep_seed, 1))
}

/// Draws `reps` datasets of size `n` and records the supports selected by
/// `method` at every value of `mu_grid`.
pub fn run_selection(
    model: &PopulationModel,
    n: usize,
    mu_grid: &[f64],
    reps: usize,
    seed: u64,
    method: &SelectionMethod,
) -> Result<SelectionRun> {
    if reps == 0 {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    method.validate()?;
    let supports = (0..reps)
        .into_par_iter()
        .map(|k| {
            let (mut rng, sub_seed) = replication_streams(seed, k);
            let problem = sample_dataset(model, n, &mut rng)?;
            method.supports(&problem, mu_grid, sub_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionRun { mu_grid: mu_grid.to_vec(), p: model.p(), supports })
}

/// Per-variable selection frequencies of `method` over `reps` fresh datasets.
pub fn sign_frequency_experiment(
    model: &PopulationModel,
    n: usize,
    mu_grid: &[f64],
    reps: usize,
    seed: u64,
    method: &SelectionMethod,
) -> Result<FrequencyTable> {
    Ok(run_selection(model, n, mu_grid, reps, seed, method)?.frequency_table())
}

/// Probability, per grid value, that the selected support equals the true one.
pub fn correct_pattern_probability(run: &SelectionRun, model: &PopulationModel) -> Vec<f64> {
    run.pattern_probability(model.j_true())
}

/// Correct-pattern probabilities of the Lasso and of the bootstrap
/// intersection for several replicate counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternCurves {
    pub mu_grid: Vec<f64>,
    pub reps: usize,
    pub lasso: Vec<f64>,
    /// `(m, probability per grid value)` in the order requested.
    pub bolasso: Vec<(usize, Vec<f64>)>,
}

impl PatternCurves {
    pub fn best_lasso(&self) -> f64 {
        self.lasso.iter().copied().fold(0.0, f64::max)
    }

    /// Highest probability over the grid for each `m`.
    pub fn best_bolasso(&self) -> Vec<(usize, f64)> {
        self.bolasso.iter().map(|(m, c)| (*m, c.iter().copied().fold(0.0, f64::max))).collect()
    }
}

/// Estimates [`PatternCurves`] over `reps` datasets of size `n`.
///
/// Each replication computes `max(ms)` bootstrap paths once; the intersection
/// for a smaller `m` uses the first `m` of them.
pub fn pattern_probability_experiment(
    model: &PopulationModel,
    n: usize,
    mu_grid: &[f64],
    reps: usize,
    seed: u64,
    ms: &[usize],
) -> Result<PatternCurves> {
    if reps == 0 || ms.is_empty() || ms.contains(&0) {
        return Err(Error::InvalidArgument("need reps >= 1 and a nonempty list of positive m".into()));
    }
    let m_max = *ms.iter().max().expect("nonempty");
    let truth = model.j_true();
    let hits = (0..reps)
        .into_par_iter()
        .map(|k| -> Result<(Vec<bool>, Vec<Vec<bool>>)> {
            let (mut rng, sub_seed) = replication_streams(seed, k);
            let problem = sample_dataset(model, n, &mut rng)?;
            let path = lars_lasso_path(&problem, usize::MAX)?;
            let lasso = mu_grid.iter().map(|&mu| &path.support_at(mu) == truth).collect();
            let paths = bootstrap_paths(&problem, m_max, sub_seed, Resampling::Bootstrap)?;
            let mut by_m = vec![vec![false; mu_grid.len()]; ms.len()];
            for (g, &mu) in mu_grid.iter().enumerate() {
                let mut acc = IndexSet::full(problem.p());
                for (i, path) in paths.iter().enumerate() {
                    acc = acc.intersection(&path.support_at(mu));
                    for (slot, _) in ms.iter().enumerate().filter(|(_, &m)| m == i + 1) {
                        by_m[slot][g] = &acc == truth;
                    }
                }
            }
            Ok((lasso, by_m))
        })
        .collect::<Result<Vec<_>>>()
        .context(|| "pattern probability experiment".to_string())?;
    let frac = |count: usize| count as f64 / reps as f64;
    let lasso = (0..mu_grid.len()).map(|g| frac(hits.iter().filter(|h| h.0[g]).count())).collect();
    let bolasso = ms
        .iter()
        .enumerate()
        .map(|(slot, &m)| {
            let curve = (0..mu_grid.len()).map(|g| frac(hits.iter().filter(|h| h.1[slot][g]).count())).collect();
            (m, curve)
        })
        .collect();
    Ok(PatternCurves { mu_grid: mu_grid.to_vec(), reps, lasso, bolasso })
}

/// `log(f/(1 − f))` with `f` clipped to `[1/(2·reps), 1 − 1/(2·reps)]`.
pub fn log_odds(frequency: f64, reps: usize) -> f64 {
    let eps = 1.0 / (2.0 * reps as f64);
    let f = frequency.clamp(eps, 1.0 - eps);
    (f / (1.0 - f)).ln()
}
