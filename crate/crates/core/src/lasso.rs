//! Lasso solutions for `min_w 1/(2n)‖y − Xw‖² + μ‖w‖₁`.
//!
//! [`lars_lasso_path`] computes the exact piecewise-linear regularization path
//! with the LARS homotopy (variables join when their correlation reaches `μ`
//! and leave when their coefficient crosses zero). [`coordinate_descent`] solves
//! a single `μ` independently and serves as a cross-check. [`kkt_residual`]
//! certifies any candidate through the subgradient optimality conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm_inf, Cholesky, IndexSet, Matrix};

/// Design matrix and response of one regression problem, no intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct LassoProblem {
    design: Matrix,
    response: Vec<f64>,
    centered: bool,
    scaled: bool,
}

impl LassoProblem {
    pub fn new(design: Matrix, response: Vec<f64>) -> Result<Self> {
        Self::with_flags(design, response, false, false)
    }

    /// Builds a problem and checks the claimed preprocessing: when `centered`,
    /// every column and the response have mean 0; when `scaled`, every
    /// nonconstant column has `‖x_j‖²/n = 1`. Both within `1e-10`.
    pub fn with_flags(design: Matrix, response: Vec<f64>, centered: bool, scaled: bool) -> Result<Self> {
        if design.rows() != response.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} rows but response has {} entries",
                design.rows(),
                response.len()
            )));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("response entry {i}")));
        }
        let n = design.rows() as f64;
        if centered {
            let y_mean = response.iter().sum::<f64>() / n;
            if y_mean.abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("response mean {y_mean:e} is not 0")));
            }
        }
        if centered || scaled {
            for j in 0..design.cols() {
                let col = design.column(j);
                let mean = col.iter().sum::<f64>() / n;
                if centered && mean.abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!("column {j} mean {mean:e} is not 0")));
                }
                let ms = dot(&col, &col) / n;
                let constant = col.iter().all(|v| (v - col[0]).abs() <= 1e-12 * (1.0 + col[0].abs()));
                if scaled && !constant && (ms - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "column {j} has mean square {ms} instead of 1"
                    )));
                }
            }
        }
        Ok(Self { design, response, centered, scaled })
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn n(&self) -> usize {
        self.design.rows()
    }

    pub fn p(&self) -> usize {
        self.design.cols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn moments(&self) -> Moments {
        let scale = 1.0 / self.n() as f64;
        let mut corr = self.design.t_matvec(&self.response);
        corr.iter_mut().for_each(|c| *c *= scale);
        Moments { gram: self.design.scaled_gram(scale), corr }
    }

    /// `‖Xᵀy/n‖∞`, the smallest `μ` with a zero solution.
    pub fn mu_max(&self) -> f64 {
        let scale = 1.0 / self.n() as f64;
        self.design.t_matvec(&self.response).iter().fold(0.0f64, |m, c| m.max((c * scale).abs()))
    }

    pub fn residual(&self, w: &[f64]) -> Vec<f64> {
        self.design.matvec(w).iter().zip(&self.response).map(|(f, y)| y - f).collect()
    }

    /// `1/(2n)‖y − Xw‖² + μ‖w‖₁`.
    pub fn objective(&self, w: &[f64], mu: f64) -> f64 {
        let r = self.residual(w);
        dot(&r, &r) / (2.0 * self.n() as f64) + mu * w.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Rows gathered by index, repeats allowed. Preprocessing flags are not
    /// carried over since a resample is no longer centered.
    pub fn take_rows(&self, rows: &[usize]) -> Result<Self> {
        let design = self.design.take_rows(rows)?;
        let response = rows.iter().map(|&i| self.response[i]).collect();
        Self::new(design, response)
    }

    pub fn select_columns(&self, cols: &IndexSet) -> Result<Self> {
        Ok(Self {
            design: self.design.select_columns(cols)?,
            response: self.response.clone(),
            centered: self.centered,
            scaled: self.scaled,
        })
    }

    /// Same design, different response.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Self> {
        Self::new(self.design.clone(), response)
    }
}

/// Empirical second moments `Q = XᵀX/n` and `Xᵀy/n`.
#[derive(Clone, Debug)]
pub struct Moments {
    pub gram: Matrix,
    pub corr: Vec<f64>,
}

/// Coefficient signs in {−1, 0, 1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(Error::InvalidArgument(format!("sign {bad} not in {{-1, 0, 1}}")));
        }
        Ok(Self(signs))
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn support(&self) -> IndexSet {
        self.0.iter().enumerate().filter(|(_, s)| **s != 0).map(|(j, _)| j).collect()
    }
}

/// A breakpoint of the regularization path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathKnot {
    pub mu: f64,
    pub weights: Vec<f64>,
    /// Nonzero coordinates of `weights`.
    pub active: IndexSet,
    pub signs: SignPattern,
}

impl PathKnot {
    fn new(mu: f64, weights: Vec<f64>) -> Self {
        let active = support_of(&weights, 0.0);
        let signs = sign_pattern_of(&weights, 0.0);
        Self { mu, weights, active, signs }
    }
}

/// Knots in strictly decreasing `μ`; the first has zero weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    knots: Vec<PathKnot>,
}

impl LassoPath {
    pub fn knots(&self) -> &[PathKnot] {
        &self.knots
    }

    pub fn p(&self) -> usize {
        self.knots[0].weights.len()
    }

    pub fn mu_max(&self) -> f64 {
        self.knots[0].mu
    }

    /// Whether the path was followed all the way to `μ = 0`.
    pub fn is_complete(&self) -> bool {
        self.knots.last().is_some_and(|k| k.mu == 0.0)
    }

    /// See [`path_at`].
    pub fn at(&self, mu: f64) -> Vec<f64> {
        path_at(self, mu)
    }

    /// Exact support of the solution at `mu`.
    pub fn support_at(&self, mu: f64) -> IndexSet {
        support_of(&self.at(mu), 0.0)
    }
}

const TIE: f64 = 1e-12;
/// Events below this fraction of `μ_max` are merged into the final `μ = 0` knot.
const ZERO_MU: f64 = 1e-10;

/// Full Lasso regularization path by LARS with variable dropping.
///
/// Starts at `μ_max = ‖Xᵀy/n‖∞` with `w = 0` and follows the path down to
/// `μ = 0` or until `max_knots` knots have been recorded. Variables reaching the
/// boundary at the same `μ` (within `1e-12` relative) join in index order at a
/// single knot; one that is collinear with the active set raises
/// [`Error::DegenerateDesign`].
pub fn lars_lasso_path(problem: &LassoProblem, max_knots: usize) -> Result<LassoPath> {
    let m = problem.moments();
    path_from_moments(&m.gram, &m.corr, max_knots)
}

/// [`lars_lasso_path`] from precomputed `Q` and `Xᵀy/n`.
pub fn path_from_moments(gram: &Matrix, corr: &[f64], max_knots: usize) -> Result<LassoPath> {
    if max_knots == 0 {
        return Err(Error::InvalidArgument("max_knots must be at least 1".into()));
    }
    let p = corr.len();
    if gram.rows() != p || gram.cols() != p {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix {}x{} does not match {p} correlations",
            gram.rows(),
            gram.cols()
        )));
    }
    let mu0 = norm_inf(corr);
    let mut knots = vec![PathKnot::new(mu0, vec![0.0; p])];
    if mu0 == 0.0 {
        return Ok(LassoPath { knots });
    }

    let mut mu = mu0;
    // Insertion order matches the Cholesky factor.
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut chol = Cholesky::default();
    let mut joining: Vec<(usize, f64)> = (0..p)
        .filter(|&j| corr[j].abs() >= mu0 * (1.0 - TIE))
        .map(|j| (j, corr[j].signum()))
        .collect();
    // A dropped variable sits on the boundary it left; only the opposite one counts.
    let mut just_dropped: Vec<(usize, f64)> = Vec::new();
    let mut is_active = vec![false; p];
    // Variables that joined at the last knot start from zero there; their own
    // zero crossing at that knot is not a drop.
    let mut just_joined: Vec<usize> = Vec::new();
    let step_limit = 64 * (p + 1);

    for _ in 0..step_limit {
        just_joined.clear();
        for (j, s) in joining.drain(..) {
            let cross: Vec<f64> = active.iter().map(|&k| gram[(j, k)]).collect();
            let diag = gram[(j, j)];
            chol.push(&cross, diag, TIE * diag)
                .map_err(|_| Error::DegenerateDesign { column: j, mu })?;
            active.push(j);
            signs.push(s);
            is_active[j] = true;
            just_joined.push(j);
        }
        if knots.len() >= max_knots {
            return Ok(LassoPath { knots });
        }

        // On the current segment w_A(t) = a − t·b.
        let c_active: Vec<f64> = active.iter().map(|&j| corr[j]).collect();
        let a = chol.solve(&c_active);
        let b = chol.solve(&signs);

        let mut drops: Vec<(usize, f64)> = Vec::new();
        for k in 0..active.len() {
            if b[k] != 0.0 && !just_joined.contains(&active[k]) {
                let t = a[k] / b[k];
                if t > 0.0 && t < mu * (1.0 - TIE) {
                    drops.push((k, t));
                }
            }
        }
        // Inactive correlation: ρ_j(t) = α_j + t·β_j, joins where ρ_j(t) = ±t.
        let mut joins: Vec<(usize, f64, f64)> = Vec::new();
        let mut g_row = Vec::with_capacity(active.len());
        for j in 0..p {
            if is_active[j] {
                continue;
            }
            let left_side = just_dropped.iter().find(|d| d.0 == j).map(|d| d.1);
            g_row.clear();
            g_row.extend(active.iter().map(|&k| gram[(j, k)]));
            let alpha = corr[j] - dot(&g_row, &a);
            let beta = dot(&g_row, &b);
            let mut best: Option<(f64, f64)> = None;
            for (num, den, sign) in [(alpha, 1.0 - beta, 1.0), (-alpha, 1.0 + beta, -1.0)] {
                if den > 0.0 && left_side != Some(sign) {
                    let t = num / den;
                    if t > 0.0 && t < mu * (1.0 - TIE) && best.is_none_or(|(bt, _)| t > bt) {
                        best = Some((t, sign));
                    }
                }
            }
            if let Some((t, sign)) = best {
                joins.push((j, t, sign));
            }
        }

        let next = drops
            .iter()
            .map(|d| d.1)
            .chain(joins.iter().map(|j| j.1))
            .fold(0.0f64, f64::max);
        let next = if next < ZERO_MU * mu0 { 0.0 } else { next };

        let mut w = vec![0.0; p];
        for (k, &j) in active.iter().enumerate() {
            w[j] = a[k] - next * b[k];
        }
        if next == 0.0 {
            knots.push(PathKnot::new(0.0, w));
            return Ok(LassoPath { knots });
        }

        let window = next * (1.0 - TIE);
        let dropped: Vec<(usize, f64)> = drops
            .iter()
            .filter(|d| d.1 >= window)
            .map(|d| (active[d.0], signs[d.0]))
            .collect();
        for &(j, _) in &dropped {
            w[j] = 0.0;
        }
        knots.push(PathKnot::new(next, w));

        joining = joins
            .iter()
            .filter(|j| j.1 >= window)
            .map(|&(j, _, s)| (j, s))
            .collect();
        just_dropped = dropped;
        if !just_dropped.is_empty() {
            for &(j, _) in &just_dropped {
                is_active[j] = false;
            }
            let keep: Vec<usize> = (0..active.len()).filter(|&k| is_active[active[k]]).collect();
            active = keep.iter().map(|&k| active[k]).collect();
            signs = keep.iter().map(|&k| signs[k]).collect();
            chol = Cholesky::default();
            for (k, &j) in active.iter().enumerate() {
                let cross: Vec<f64> = active[..k].iter().map(|&i| gram[(j, i)]).collect();
                chol.push(&cross, gram[(j, j)], 0.0)
                    .map_err(|_| Error::DegenerateDesign { column: j, mu: next })?;
            }
        }
        mu = next;
    }
    Err(Error::NotConverged { iterations: step_limit, last_change: mu })
}

/// Solution at `mu`, interpolated linearly between the bracketing knots.
///
/// Returns zeros for `mu` at or above the first knot and exact knot weights at
/// a knot. Below the last knot of a truncated path the last knot's weights are
/// returned.
pub fn path_at(path: &LassoPath, mu: f64) -> Vec<f64> {
    let knots = &path.knots;
    if mu >= knots[0].mu {
        return vec![0.0; path.p()];
    }
    // First knot with knot.mu <= mu.
    let k = knots.partition_point(|kn| kn.mu > mu);
    if k == knots.len() {
        return knots[k - 1].weights.clone();
    }
    let hi = &knots[k - 1];
    let lo = &knots[k];
    if lo.mu == mu {
        return lo.weights.clone();
    }
    let t = (hi.mu - mu) / (hi.mu - lo.mu);
    hi.weights
        .iter()
        .zip(&lo.weights)
        .map(|(&u, &v)| if u == v { u } else { (1.0 - t) * u + t * v })
        .collect()
}

/// Cyclic coordinate descent for a single `mu`, from `w = 0`.
///
/// Sweeps coordinates `0..p` in order and stops once the largest coordinate
/// change of a sweep is at most `tol·(1 + ‖w‖∞)`.
pub fn coordinate_descent(problem: &LassoProblem, mu: f64, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let m = problem.moments();
    coordinate_descent_from_moments(&m.gram, &m.corr, mu, tol, max_iter)
}

pub fn coordinate_descent_from_moments(
    gram: &Matrix,
    corr: &[f64],
    mu: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if !(tol > 0.0) || max_iter == 0 || !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coordinate descent needs tol > 0, max_iter >= 1, mu >= 0 (got {tol}, {max_iter}, {mu})"
        )));
    }
    let p = corr.len();
    let mut w = vec![0.0; p];
    let mut gw = vec![0.0; p];
    let mut last_change = f64::INFINITY;
    for _ in 0..max_iter {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let gjj = gram[(j, j)];
            if gjj <= 0.0 {
                continue;
            }
            let z = corr[j] - (gw[j] - gjj * w[j]);
            let new = soft_threshold(z, mu) / gjj;
            let delta = new - w[j];
            if delta != 0.0 {
                for (k, g) in gw.iter_mut().enumerate() {
                    *g += delta * gram[(k, j)];
                }
                w[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        last_change = max_change;
        if max_change <= tol * (1.0 + norm_inf(&w)) {
            return Ok(w);
        }
    }
    Err(Error::NotConverged { iterations: max_iter, last_change })
}

pub fn soft_threshold(z: f64, threshold: f64) -> f64 {
    if z > threshold {
        z - threshold
    } else if z < -threshold {
        z + threshold
    } else {
        0.0
    }
}

/// Largest violation of the Lasso optimality conditions at `w`.
///
/// With `g = Xᵀ(Xw − y)/n`: an active coordinate must satisfy
/// `g_j = −μ·sign(w_j)`, an inactive one `|g_j| ≤ μ`.
pub fn kkt_residual(problem: &LassoProblem, mu: f64, w: &[f64]) -> f64 {
    let r = problem.residual(w);
    let n = problem.n() as f64;
    let g: Vec<f64> = problem.design().t_matvec(&r).iter().map(|v| -v / n).collect();
    g.iter()
        .zip(w)
        .map(|(&gj, &wj)| {
            if wj != 0.0 {
                (gj + mu * wj.signum()).abs()
            } else {
                (gj.abs() - mu).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Indices with `|w_j| > tol`.
pub fn support_of(w: &[f64], tol: f64) -> IndexSet {
    w.iter().enumerate().filter(|(_, v)| v.abs() > tol).map(|(j, _)| j).collect()
}

pub fn sign_pattern_of(w: &[f64], tol: f64) -> SignPattern {
    SignPattern(
        w.iter()
            .map(|&v| {
                if v > tol {
                    1
                } else if v < -tol {
                    -1
                } else {
                    0
                }
            })
            .collect(),
    )
}
