//! Dense linear algebra used throughout the crate.
//!
//! Everything here works on small, dense, row-major matrices: Gram matrices of
//! at most a few hundred columns and designs with a few thousand rows. The
//! Cholesky factor supports appending a column so the path solver can grow its
//! active set without refactoring.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({}, {})", k / cols, k % cols)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].as_ref().len()
            )));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }).expect("identity is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)]).expect("transpose keeps shape valid")
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ v`.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "t_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.row(i), &mut out);
            }
        }
        out
    }

    /// `A B`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out);
                }
            }
        }
        Matrix::new(self.rows, other.cols, data)
    }

    /// `scale · AᵀA`, exactly symmetric.
    pub fn scaled_gram(&self, scale: f64) -> Matrix {
        let p = self.cols;
        let mut g = vec![0.0; p * p];
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..p {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let out = &mut g[a * p..a * p + a + 1];
                for (o, &rb) in out.iter_mut().zip(&r[..=a]) {
                    *o += ra * rb;
                }
            }
        }
        for a in 0..p {
            for b in 0..=a {
                let v = g[a * p + b] * scale;
                g[a * p + b] = v;
                g[b * p + a] = v;
            }
        }
        Matrix { rows: p, cols: p, data: g }
    }

    /// Rows gathered in the given order; repeats allowed (bootstrap resampling).
    pub fn take_rows(&self, rows: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange { index: i, len: self.rows });
            }
            data.extend_from_slice(self.row(i));
        }
        Matrix::new(rows.len(), self.cols, data)
    }

    pub fn select_columns(&self, cols: &IndexSet) -> Result<Matrix> {
        let all_rows = IndexSet::full(self.rows);
        submatrix(self, &all_rows, cols)
    }

    /// Largest relative asymmetry `max|a_ij - a_ji| / max|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        (0..m.rows).map(|i| m.row(i).to_vec()).collect()
    }
}

/// Sorted set of distinct zero-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    /// Fails unless every index is below `bound`.
    pub fn bounded(indices: Vec<usize>, bound: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= bound) {
            return Err(Error::IndexOutOfRange { index: bad, len: bound });
        }
        Ok(Self::from_unsorted(indices))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn complement(&self, n: usize) -> Self {
        Self((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn intersection(&self, other: &IndexSet) -> Self {
        Self(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn union(&self, other: &IndexSet) -> Self {
        Self::from_unsorted(self.iter().chain(other.iter()).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Elements in exactly one of the two sets.
    pub fn symmetric_difference_len(&self, other: &IndexSet) -> usize {
        self.iter().filter(|&i| !other.contains(i)).count()
            + other.iter().filter(|&i| !self.contains(i)).count()
    }

    /// `self[positions[k]]` for each k, i.e. composition of index maps.
    pub fn compose(&self, positions: &IndexSet) -> Result<Self> {
        positions
            .iter()
            .map(|k| {
                self.0
                    .get(k)
                    .copied()
                    .ok_or(Error::IndexOutOfRange { index: k, len: self.len() })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for IndexSet {
    /// Space-separated indices, e.g. `0 3 7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

/// Entry `(i, j)` of the result is `a[rows[i], cols[j]]`.
pub fn submatrix(a: &Matrix, rows: &IndexSet, cols: &IndexSet) -> Result<Matrix> {
    for (set, len) in [(rows, a.rows()), (cols, a.cols())] {
        if let Some(bad) = set.iter().find(|&i| i >= len) {
            return Err(Error::IndexOutOfRange { index: bad, len });
        }
    }
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for i in rows.iter() {
        let r = a.row(i);
        data.extend(cols.iter().map(|j| r[j]));
    }
    Matrix::new(rows.len(), cols.len(), data)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha · x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`, stored row by row so that new
/// variables can be appended.
#[derive(Clone, Debug, Default)]
pub struct Cholesky {
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    /// Factorizes an SPD matrix. A pivot `<= n·ε·max(diag)` is rejected.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
        let tol = n as f64 * f64::EPSILON * max_diag;
        let mut chol = Self { rows: Vec::with_capacity(n) };
        for j in 0..n {
            let cross: Vec<f64> = (0..j).map(|k| a[(j, k)]).collect();
            chol.push(&cross, a[(j, j)], tol)?;
        }
        Ok(chol)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Extends the factor by one row/column. `cross` holds the new column's
    /// entries against the existing ones; `diag` its diagonal entry. The
    /// factor is left untouched when the squared pivot is `<= tol`.
    pub fn push(&mut self, cross: &[f64], diag: f64, tol: f64) -> Result<()> {
        let k = self.dim();
        assert_eq!(cross.len(), k, "cross terms must match current dimension");
        let mut row = self.forward(cross);
        let d2 = diag - dot(&row, &row);
        if !(d2 > tol.max(0.0)) {
            return Err(Error::NotPositiveDefinite { column: k, pivot: d2 });
        }
        row.push(d2.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Solves `L z = b` for the leading `b.len()` block of the factor.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        assert!(b.len() <= self.dim(), "right-hand side longer than factor");
        let mut z = Vec::with_capacity(b.len());
        for (i, &bi) in b.iter().enumerate() {
            let row = &self.rows[i];
            z.push((bi - dot(&row[..i], &z)) / row[i]);
        }
        z
    }

    /// Solves `Lᵀ x = z` in place.
    fn backward(&self, z: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = z[i];
            for (k, row) in self.rows.iter().enumerate().skip(i + 1) {
                s -= row[i] * z[k];
            }
            z[i] = s / self.rows[i][i];
        }
    }

    /// `L z`.
    pub fn lower_mul(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim(), "vector dimension mismatch");
        self.rows.iter().map(|row| dot(row, &z[..row.len()])).collect()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim(), "right-hand side dimension mismatch");
        let mut z = self.forward(b);
        self.backward(&mut z);
        z
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "solve_spd: matrix {}x{}, right-hand side {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let asym = a.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

/// Minimum-ℓ2-norm minimizer of `‖A x − b‖₂`.
///
/// Singular values at or below `max(rows, cols)·ε·σ_max` are treated as zero.
pub fn min_norm_lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "min_norm_lstsq: matrix has {} rows, right-hand side {}",
            a.rows(),
            b.len()
        )));
    }
    let svd = a.to_nalgebra().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    if sigma_max == 0.0 {
        return Ok(vec![0.0; a.cols()]);
    }
    let tol = a.rows().max(a.cols()) as f64 * f64::EPSILON * sigma_max;
    // nalgebra zeroes singular values strictly below `eps`.
    let eps = tol * (1.0 + f64::EPSILON);
    let x = svd
        .solve(&DVector::from_column_slice(b), eps)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(x.iter().copied().collect())
}
