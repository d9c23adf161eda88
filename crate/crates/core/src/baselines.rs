//! Reference estimators and selectors to compare against the bootstrap
//! intersection: ridge regression, forward greedy selection, thresholded and
//! bagged least squares, the adaptive Lasso and bagging of Lasso estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bolasso::{bootstrap_paths, most_stable_of, ols_refit, Resampling};
use crate::error::{Error, Result};
use crate::lasso::{path_from_moments, support_of, LassoPath, LassoProblem};
use crate::numerics::{dot, min_norm_lstsq, solve_spd, submatrix, IndexSet, Matrix};
use crate::rng::{child_rng, derive_seed};

/// Weights below this magnitude are treated as zero in a [`SelectorOutput`].
pub const ZERO_WEIGHT: f64 = 1e-10;

/// A selected support and weights that vanish off it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorOutput {
    pub support: IndexSet,
    pub weights: Vec<f64>,
}

impl SelectorOutput {
    /// Zeroes entries with `|w_j| <= 1e-10` and takes the rest as the support.
    pub fn from_weights(mut weights: Vec<f64>) -> Self {
        for w in &mut weights {
            if w.abs() <= ZERO_WEIGHT {
                *w = 0.0;
            }
        }
        let support = support_of(&weights, 0.0);
        Self { support, weights }
    }

    fn refit(problem: &LassoProblem, support: &IndexSet) -> Result<Self> {
        Ok(Self::from_weights(ols_refit(problem, support)?))
    }
}

/// Solves `(XᵀX/n + λI) w = Xᵀy/n`.
///
/// At `λ = 0` with a singular Gram matrix the minimum-norm least-squares
/// solution is returned.
pub fn ridge(problem: &LassoProblem, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge penalty {lambda} must be finite and nonnegative")));
    }
    let m = problem.moments();
    ridge_from_moments(&m.gram, &m.corr, lambda)
        .or_else(|e| match e {
            Error::NotPositiveDefinite { .. } if lambda == 0.0 => min_norm_lstsq(problem.design(), problem.response()),
            e => Err(e),
        })
}

fn ridge_from_moments(gram: &Matrix, corr: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let p = corr.len();
    let a = Matrix::from_fn(p, p, |i, j| if i == j { gram[(i, j)] + lambda } else { gram[(i, j)] })?;
    solve_spd(&a, corr)
}

/// Greedy forward selection of `k` variables by residual sum of squares.
///
/// Each step adds the variable whose inclusion gives the smallest residual sum
/// of squares after a least-squares refit; exact ties go to the lower index.
pub fn forward_greedy(problem: &LassoProblem, k: usize) -> Result<SelectorOutput> {
    Ok(forward_greedy_trace(problem, k)?.pop().expect("trace starts with the empty selection").0)
}

/// Every intermediate selection of [`forward_greedy`] with its mean squared
/// residual, from the empty set up to `k` variables.
pub fn forward_greedy_trace(problem: &LassoProblem, k: usize) -> Result<Vec<(SelectorOutput, f64)>> {
    let p = problem.p();
    if k > p {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {p} variables")));
    }
    let m = problem.moments();
    let yy = dot(problem.response(), problem.response()) / problem.n() as f64;
    let mut selected: Vec<usize> = Vec::new();
    let mut trace = vec![(SelectorOutput::from_weights(vec![0.0; p]), yy)];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|j| !selected.contains(j)) {
            let mut cand = selected.clone();
            cand.push(j);
            let rss = mean_rss(&m.gram, &m.corr, yy, &IndexSet::from_unsorted(cand))?;
            if best.is_none_or(|(_, b)| rss < b) {
                best = Some((j, rss));
            }
        }
        let (j, rss) = best.expect("k <= p leaves a candidate");
        selected.push(j);
        let support = IndexSet::from_unsorted(selected.clone());
        trace.push((SelectorOutput::refit(problem, &support)?, rss));
    }
    Ok(trace)
}

/// `‖y − X_S w_S‖²/n` at the least-squares fit on `s`, from moments.
fn mean_rss(gram: &Matrix, corr: &[f64], yy: f64, s: &IndexSet) -> Result<f64> {
    let g = submatrix(gram, s, s)?;
    let c: Vec<f64> = s.iter().map(|j| corr[j]).collect();
    let w = match solve_spd(&g, &c) {
        Ok(w) => w,
        Err(Error::NotPositiveDefinite { .. }) => min_norm_lstsq(&g, &c)?,
        Err(e) => return Err(e),
    };
    Ok((yy - 2.0 * dot(&w, &c) + dot(&w, &g.matvec(&w))).max(0.0))
}

/// Indices of the `k` largest `|v_j|`, ties to the lower index.
fn top_k(v: &[f64], k: usize) -> IndexSet {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    IndexSet::from_unsorted(order.into_iter().take(k).collect())
}

/// Keeps the `k` largest (minimum-norm) least-squares coefficients and refits.
pub fn threshold_ls(problem: &LassoProblem, k: usize) -> Result<SelectorOutput> {
    if k > problem.p() {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {} variables", problem.p())));
    }
    let ols = min_norm_lstsq(problem.design(), problem.response())?;
    SelectorOutput::refit(problem, &top_k(&ols, k))
}

/// Regularization path of the adaptive Lasso, whose penalty on `w_j` is
/// `μ/|ŵ_j|^γ` with `ŵ` the least-squares estimate.
///
/// Column `j` is rescaled by `|ŵ_j|^γ`, the plain Lasso path is computed on the
/// rescaled problem and the weights are mapped back. Variables with
/// `|ŵ_j| <= 1e-12` carry an infinite penalty and are left out.
#[derive(Clone, Debug)]
pub struct AdaptivePath {
    p: usize,
    kept: IndexSet,
    scales: Vec<f64>,
    path: LassoPath,
}

impl AdaptivePath {
    pub fn new(problem: &LassoProblem, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("adaptive exponent {gamma} must be positive")));
        }
        let ols = min_norm_lstsq(problem.design(), problem.response())?;
        let kept: IndexSet = (0..problem.p()).filter(|&j| ols[j].abs() > 1e-12).collect();
        if kept.is_empty() {
            return Err(Error::AllWeightsZero);
        }
        let scales: Vec<f64> = kept.iter().map(|j| ols[j].abs().powf(gamma)).collect();
        let m = problem.moments();
        let g = submatrix(&m.gram, &kept, &kept)?;
        let gram = Matrix::from_fn(kept.len(), kept.len(), |a, b| scales[a] * g[(a, b)] * scales[b])?;
        let corr: Vec<f64> = kept.iter().zip(&scales).map(|(j, d)| d * m.corr[j]).collect();
        let path = path_from_moments(&gram, &corr, usize::MAX)?;
        Ok(Self { p: problem.p(), kept, scales, path })
    }

    /// Adaptive Lasso weights at `mu`, in the original coordinates.
    pub fn at(&self, mu: f64) -> Vec<f64> {
        let v = self.path.at(mu);
        let mut w = vec![0.0; self.p];
        for ((j, d), vj) in self.kept.iter().zip(&self.scales).zip(v) {
            w[j] = d * vj;
        }
        w
    }

    pub fn mu_max(&self) -> f64 {
        self.path.mu_max()
    }
}

/// Adaptive Lasso at `mu` with exponent 1.
pub fn adaptive_lasso(problem: &LassoProblem, mu: f64) -> Result<SelectorOutput> {
    adaptive_lasso_with(problem, mu, 1.0)
}

pub fn adaptive_lasso_with(problem: &LassoProblem, mu: f64, gamma: f64) -> Result<SelectorOutput> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("regularization {mu} must be positive")));
    }
    Ok(SelectorOutput::from_weights(AdaptivePath::new(problem, gamma)?.at(mu)))
}

/// Average of the least-squares estimates of `m` resamples. Resample `i` is
/// drawn from `child_rng(derive_seed(seed, i), 0)`.
pub fn bagged_ols(problem: &LassoProblem, m: usize, seed: u64, resampling: Resampling) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
    }
    let estimates = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(derive_seed(seed, i), 0);
            let rows = resampling.indices(problem.n(), &mut rng);
            let sample = problem.take_rows(&rows)?;
            min_norm_lstsq(sample.design(), sample.response())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&estimates, problem.p()))
}

fn average(vectors: &[Vec<f64>], p: usize) -> Vec<f64> {
    let mut mean = vec![0.0; p];
    for v in vectors {
        for (a, b) in mean.iter_mut().zip(v) {
            *a += b;
        }
    }
    let m = vectors.len() as f64;
    mean.iter_mut().for_each(|a| *a /= m);
    mean
}

/// Thresholds the bagged least-squares estimate to its `k` largest entries
/// and refits on the original data.
pub fn bagged_ls_threshold(
    problem: &LassoProblem,
    m: usize,
    k: usize,
    seed: u64,
    resampling: Resampling,
) -> Result<SelectorOutput> {
    if k > problem.p() {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {} variables", problem.p())));
    }
    let mean = bagged_ols(problem, m, seed, resampling)?;
    SelectorOutput::refit(problem, &top_k(&mean, k))
}

/// Average of the Lasso solutions at `mu` over `m` resamples, seeded as in
/// [`bootstrap_paths`]. The result is generally dense.
pub fn bagged_lasso(problem: &LassoProblem, m: usize, mu: f64, seed: u64, resampling: Resampling) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
    }
    let paths = bootstrap_paths(problem, m, seed, resampling)?;
    Ok(bagged_lasso_from_paths(&paths, mu, problem.p()))
}

pub fn bagged_lasso_from_paths(paths: &[LassoPath], mu: f64, p: usize) -> Vec<f64> {
    let solutions: Vec<Vec<f64>> = paths.iter().map(|path| path.at(mu)).collect();
    average(&solutions, p)
}

/// The support of size `r` held at the most grid positions of `supports`
/// (ordered by decreasing `μ`), ties to the larger `μ`. When no position has
/// exactly `r` variables, the closest size is used, the smaller on a tie.
pub fn stable_pattern_near(supports: &[IndexSet], r: usize) -> IndexSet {
    let mut sizes: Vec<usize> = supports.iter().map(IndexSet::len).collect();
    sizes.sort_by_key(|&s| (s.abs_diff(r), s));
    sizes
        .first()
        .and_then(|&size| most_stable_of(supports, size).ok())
        .unwrap_or_default()
}

/// Supports of the plain Lasso path along `grid`.
pub fn lasso_supports(problem: &LassoProblem, grid: &[f64]) -> Result<Vec<IndexSet>> {
    let path = crate::lasso::lars_lasso_path(problem, usize::MAX)?;
    Ok(grid.iter().map(|&mu| path.support_at(mu)).collect())
}

/// Supports of the adaptive Lasso (exponent `gamma`) along `grid`.
pub fn adaptive_supports(problem: &LassoProblem, grid: &[f64], gamma: f64) -> Result<Vec<IndexSet>> {
    let path = AdaptivePath::new(problem, gamma)?;
    Ok(grid.iter().map(|&mu| support_of(&path.at(mu), ZERO_WEIGHT)).collect())
}

/// Trace-based ridge scale `tr(XᵀX/n)/p`.
pub fn ridge_scale(problem: &LassoProblem) -> f64 {
    let x = problem.design();
    let n = problem.n() as f64;
    x.data().iter().map(|v| v * v).sum::<f64>() / (n * problem.p() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::tests::orthonormal_design;
    use crate::numerics::norm_inf;
    use crate::lasso::{coordinate_descent, soft_threshold};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_problem(seed: u64, n: usize, p: usize) -> LassoProblem {
        let mut rng = rng_from_seed(seed);
        let x = Matrix::from_fn(n, p, |_, _| rng.sample(StandardNormal)).unwrap();
        let w: Vec<f64> = (0..p).map(|j| if j < p / 2 { 1.0 + j as f64 } else { 0.0 }).collect();
        let y: Vec<f64> = x.matvec(&w).iter().map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        LassoProblem::new(x, y).unwrap()
    }

    /// Normal equations by Gauss-Jordan elimination.
    fn normal_equations(problem: &LassoProblem, lambda: f64) -> Vec<f64> {
        let m = problem.moments();
        let p = problem.p();
        let mut a: Vec<Vec<f64>> = (0..p)
            .map(|i| {
                let mut row: Vec<f64> = (0..p).map(|j| m.gram[(i, j)] + if i == j { lambda } else { 0.0 }).collect();
                row.push(m.corr[i]);
                row
            })
            .collect();
        for c in 0..p {
            let piv = (c..p).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            a.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    let pivot = a[c].clone();
                    for (v, pv) in a[r].iter_mut().zip(pivot) {
                        *v -= f * pv;
                    }
                }
            }
        }
        (0..p).map(|i| a[i][p] / a[i][i]).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn ridge_limits() {
        let pr = random_problem(1, 40, 5);
        let ols = ridge(&pr, 0.0).unwrap();
        assert!(close(&ols, &normal_equations(&pr, 0.0), 1e-8));
        assert!(close(&ridge(&pr, 0.7).unwrap(), &normal_equations(&pr, 0.7), 1e-8));
        let huge = ridge(&pr, 1e9 * pr.mu_max()).unwrap();
        assert!(norm_inf(&huge) <= 1e-6 * norm_inf(&ols));
    }

    #[test]
    fn ridge_orthonormal_closed_form() {
        let mut rng = rng_from_seed(4);
        let x = orthonormal_design(&mut rng, 30, 4);
        let y: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let pr = LassoProblem::new(x, y).unwrap();
        let ols = pr.moments().corr;
        let lambda = 0.35;
        let w = ridge(&pr, lambda).unwrap();
        for j in 0..4 {
            assert!((w[j] - ols[j] / (1.0 + lambda)).abs() <= 1e-12);
        }
    }

    #[test]
    fn ridge_rank_deficient_falls_back() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let pr = LassoProblem::new(x, vec![2.0, 4.0, 6.0]).unwrap();
        let w = ridge(&pr, 0.0).unwrap();
        assert!(close(&w, &[1.0, 1.0], 1e-10));
    }

    #[test]
    fn greedy_edge_cases() {
        let pr = random_problem(2, 30, 6);
        let none = forward_greedy(&pr, 0).unwrap();
        assert!(none.support.is_empty() && none.weights.iter().all(|w| *w == 0.0));
        let all = forward_greedy(&pr, 6).unwrap();
        assert_eq!(all.support, IndexSet::full(6));
        assert!(close(&all.weights, &normal_equations(&pr, 0.0), 1e-8));
        assert!(forward_greedy(&pr, 7).is_err());
    }

    #[test]
    fn greedy_first_pick_matches_brute_force() {
        let mut rng = rng_from_seed(3);
        let x = Matrix::from_fn(50, 6, |_, _| rng.sample(StandardNormal)).unwrap();
        let y = x.column(3);
        let pr = LassoProblem::new(x.clone(), y.clone()).unwrap();
        let brute = (0..6)
            .map(|j| {
                let c = x.column(j);
                let b = dot(&c, &y) / dot(&c, &c);
                y.iter().zip(&c).map(|(yi, ci)| (yi - b * ci).powi(2)).sum::<f64>()
            })
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert_eq!(brute, 3);
        assert_eq!(forward_greedy(&pr, 1).unwrap().support, IndexSet::from_unsorted(vec![3]));
    }

    #[test]
    fn threshold_examples() {
        let pr = random_problem(5, 40, 5);
        let all = threshold_ls(&pr, 5).unwrap();
        assert!(close(&all.weights, &normal_equations(&pr, 0.0), 1e-8));
        assert!(threshold_ls(&pr, 0).unwrap().support.is_empty());
        assert_eq!(top_k(&[3.0, -1.0, 0.5], 2), IndexSet::from_unsorted(vec![0, 1]));
        assert_eq!(top_k(&[1.0, -1.0, 1.0], 2), IndexSet::from_unsorted(vec![0, 1]));
    }

    #[test]
    fn threshold_recovers_noiseless_support() {
        let mut rng = rng_from_seed(6);
        let x = Matrix::from_fn(40, 8, |_, _| rng.sample(StandardNormal)).unwrap();
        let w = [0.0, 0.8, 0.0, -0.5, 0.0, 0.0, 0.4, 0.0];
        let pr = LassoProblem::new(x.clone(), x.matvec(&w)).unwrap();
        let out = threshold_ls(&pr, 3).unwrap();
        assert_eq!(out.support, IndexSet::from_unsorted(vec![1, 3, 6]));
        assert!(close(&out.weights, &w, 1e-8));
    }

    #[test]
    fn adaptive_orthonormal_closed_form() {
        let mut rng = rng_from_seed(7);
        let x = orthonormal_design(&mut rng, 40, 5);
        let w = [1.5, -0.8, 0.3, 0.0, -0.1];
        let y: Vec<f64> = x.matvec(&w).iter().map(|v| v + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect();
        let pr = LassoProblem::new(x, y).unwrap();
        let ols = pr.moments().corr;
        for mu in [0.01, 0.1, 0.5, 1.0] {
            let out = adaptive_lasso(&pr, mu).unwrap();
            for j in 0..5 {
                let expect = ols[j].signum() * (ols[j].abs() - mu / ols[j].abs()).max(0.0);
                assert!((out.weights[j] - expect).abs() <= 1e-8, "mu {mu} j {j}");
            }
        }
    }

    #[test]
    fn adaptive_uniform_weights_is_rescaled_lasso() {
        // Orthonormal design with all least-squares coefficients of magnitude c.
        let mut rng = rng_from_seed(8);
        let x = orthonormal_design(&mut rng, 30, 3);
        let c = 0.6;
        let pr = LassoProblem::new(x.clone(), x.matvec(&[c, -c, c])).unwrap();
        let mu = 0.1;
        let out = adaptive_lasso(&pr, mu).unwrap();
        let plain = coordinate_descent(&pr, mu / c, 1e-14, 100_000).unwrap();
        assert!(close(&out.weights, &plain, 1e-8));
        for j in 0..3 {
            assert!((out.weights[j] - soft_threshold(pr.moments().corr[j], mu / c)).abs() <= 1e-8);
        }
    }

    #[test]
    fn adaptive_excludes_zero_ols() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, -1.0]]).unwrap();
        let pr = LassoProblem::new(x, vec![2.0, 0.0, 2.0, 0.0]).unwrap();
        let out = adaptive_lasso(&pr, 1e-6).unwrap();
        assert_eq!(out.support, IndexSet::from_unsorted(vec![0]));
        let zero = LassoProblem::new(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert!(matches!(adaptive_lasso(&zero, 0.1), Err(Error::AllWeightsZero)));
    }

    #[test]
    fn degenerate_bagging() {
        let pr = random_problem(9, 30, 6);
        let bagged = bagged_ls_threshold(&pr, 1, 3, 0, Resampling::Identity).unwrap();
        assert_eq!(bagged, threshold_ls(&pr, 3).unwrap());
        let mu = 0.2 * pr.mu_max();
        let lasso = bagged_lasso(&pr, 1, mu, 0, Resampling::Identity).unwrap();
        let plain = crate::lasso::lars_lasso_path(&pr, usize::MAX).unwrap().at(mu);
        assert_eq!(lasso, plain);
    }

    #[test]
    fn bagged_ols_is_the_mean() {
        let pr = random_problem(10, 30, 4);
        let m = 5;
        let mean = bagged_ols(&pr, m, 17, Resampling::Bootstrap).unwrap();
        let singles: Vec<Vec<f64>> = (0..m as u64)
            .map(|i| {
                let mut rng = child_rng(derive_seed(17, i), 0);
                let rows = Resampling::Bootstrap.indices(30, &mut rng);
                let s = pr.take_rows(&rows).unwrap();
                min_norm_lstsq(s.design(), s.response()).unwrap()
            })
            .collect();
        for j in 0..4 {
            let direct = singles.iter().map(|v| v[j]).sum::<f64>() / m as f64;
            assert!((mean[j] - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn bagged_lasso_zero_and_homogeneity() {
        let pr = random_problem(11, 25, 4);
        let paths = bootstrap_paths(&pr, 8, 3, Resampling::Bootstrap).unwrap();
        let top = paths.iter().map(LassoPath::mu_max).fold(0.0, f64::max);
        assert!(bagged_lasso(&pr, 8, top, 3, Resampling::Bootstrap).unwrap().iter().all(|w| *w == 0.0));
        let mu = 0.3 * top;
        let once = bagged_lasso(&pr, 8, mu, 3, Resampling::Bootstrap).unwrap();
        let doubled = pr.with_response(pr.response().iter().map(|y| 2.0 * y).collect()).unwrap();
        let twice = bagged_lasso(&doubled, 8, 2.0 * mu, 3, Resampling::Bootstrap).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((2.0 * a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn bagging_reduces_coefficient_variance() {
        // Fixed design-generating model, fresh data per seed.
        let (mut single, mut bagged) = (Vec::new(), Vec::new());
        for seed in 0..64 {
            let pr = random_problem(1000 + seed, 30, 6);
            single.push(bagged_ols(&pr, 1, seed, Resampling::Bootstrap).unwrap()[0]);
            bagged.push(bagged_ols(&pr, 16, seed, Resampling::Bootstrap).unwrap()[0]);
        }
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        assert!(var(&bagged) <= var(&single));
    }

    #[test]
    fn stable_pattern_fallback() {
        let s = |v: &[usize]| IndexSet::from_unsorted(v.to_vec());
        let supports = vec![s(&[1]), s(&[1, 2, 3]), s(&[1, 2, 3]), s(&[0, 1, 2, 3])];
        assert_eq!(stable_pattern_near(&supports, 3), s(&[1, 2, 3]));
        assert_eq!(stable_pattern_near(&supports, 2), s(&[1]));
        assert_eq!(stable_pattern_near(&supports, 9), s(&[0, 1, 2, 3]));
        assert_eq!(stable_pattern_near(&[], 2), IndexSet::empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn selector_invariants(seed in any::<u64>(), k in 0usize..=6) {
            let pr = random_problem(seed, 20, 6);
            let outputs = [
                forward_greedy(&pr, k).unwrap(),
                threshold_ls(&pr, k).unwrap(),
                adaptive_lasso(&pr, 0.05 * pr.mu_max()).unwrap(),
                bagged_ls_threshold(&pr, 4, k, seed, Resampling::Bootstrap).unwrap(),
            ];
            for out in &outputs {
                prop_assert_eq!(&out.support, &support_of(&out.weights, ZERO_WEIGHT));
            }
        }

        #[test]
        fn greedy_rss_nonincreasing(seed in any::<u64>()) {
            let pr = random_problem(seed, 15, 8);
            let trace = forward_greedy_trace(&pr, 8).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1].1 <= w[0].1 + 1e-12);
            }
        }

        #[test]
        fn adaptive_support_within_ols_support(seed in any::<u64>(), ratio in 0.001f64..0.9) {
            let pr = random_problem(seed, 25, 5);
            let ols = min_norm_lstsq(pr.design(), pr.response()).unwrap();
            let out = adaptive_lasso(&pr, ratio * pr.mu_max()).unwrap();
            prop_assert!(out.support.is_subset(&support_of(&ols, 1e-12)));
        }
    }
}
