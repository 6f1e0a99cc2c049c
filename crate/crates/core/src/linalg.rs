//! Dense matrix kernels and the proximal / subgradient operators the solver
//! is built from.
//!
//! Everything here works on small dense row-major matrices. The largest
//! factorizations in the tracker are `N x K` coefficient blocks (10 x 4) and
//! `d_k x N` dictionaries, so a one-sided Jacobi SVD is plenty.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{arg, shape, Result};

/// Singular triples at or below `REL_CUTOFF * s_max` are treated as zero when
/// forming the nuclear-norm subgradient.
pub const REL_CUTOFF: f64 = 1e-10;

/// Dense real matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    /// Builds a matrix from row-major entries. Rejects empty shapes and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return arg(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return arg(format!("non-finite entry at ({}, {})", pos / cols, pos % cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return shape("ragged rows");
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<f64>]) -> Result<Self> {
        let rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != rows) {
            return shape("ragged columns");
        }
        let mut m = Self::from_vec(rows, cols.len(), vec![0.0; rows * cols.len()])?;
        for (j, col) in cols.iter().enumerate() {
            m.set_col(j, col);
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return arg("non-finite entry");
        }
        Ok(m)
    }

    /// Zero matrix. Zero-sized shapes are allowed here; they only show up as
    /// the empty factors of a zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn set_col(&mut self, c: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.rows != rhs.rows {
            return shape(format!(
                "cannot multiply ({}x{})^T by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        let mut out = Mat::zeros(self.cols, rhs.cols);
        for r in 0..self.rows {
            let rrow = rhs.row(r);
            for (a, &v) in self.row(r).iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let orow = &mut out.data[a * rhs.cols..(a + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += v * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same(&self, other: &Mat, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.check_same(other, "add")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.check_same(other, "sub")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Mat) -> Result<Mat> {
        self.check_same(other, "axpy")?;
        Ok(self.zip_map(other, |a, b| a + alpha * b))
    }

    pub fn scale(&self, alpha: f64) -> Mat {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_map(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Mat) -> Result<f64> {
        self.check_same(other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Entrywise L1 norm.
    pub fn l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Columns `start..start+count` as a new matrix.
    pub fn col_block(&self, start: usize, count: usize) -> Mat {
        let mut out = Mat::zeros(self.rows, count);
        for r in 0..self.rows {
            out.row_mut(r)
                .copy_from_slice(&self.row(r)[start..start + count]);
        }
        out
    }

    /// Rows `start..start+count` as a new matrix.
    pub fn row_block(&self, start: usize, count: usize) -> Mat {
        Mat {
            rows: count,
            cols: self.cols,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }

    pub fn hstack(blocks: &[Mat]) -> Result<Mat> {
        let rows = blocks.first().map_or(0, Mat::rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return shape("hstack: row counts differ");
        }
        let cols = blocks.iter().map(Mat::cols).sum();
        let mut out = Mat::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for b in blocks {
                out.row_mut(r)[off..off + b.cols].copy_from_slice(b.row(r));
                off += b.cols;
            }
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[Mat]) -> Result<Mat> {
        let cols = blocks.first().map_or(0, Mat::cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return shape("vstack: column counts differ");
        }
        let rows = blocks.iter().map(Mat::rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Mat { rows, cols, data })
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Thin SVD `Y = U diag(S) V^T` truncated to the retained rank `r`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m x r`, orthonormal columns.
    pub u: Mat,
    /// Nonincreasing, positive.
    pub s: Vec<f64>,
    /// `n x r`, orthonormal columns.
    pub v: Mat,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// True when nothing survived the cutoff (the input was zero).
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn reconstruct(&self) -> Mat {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Mat::zeros(m, n);
        for (t, &s) in self.s.iter().enumerate() {
            for i in 0..m {
                let ui = self.u[(i, t)] * s;
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, t)];
                }
            }
        }
        out
    }

    /// `U V^T` over the retained triples.
    pub fn polar(&self) -> Mat {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Mat::zeros(m, n);
        for t in 0..self.rank() {
            for i in 0..m {
                let ui = self.u[(i, t)];
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, t)];
                }
            }
        }
        out
    }
}

/// Entrywise `sign(y) * max(|y| - rho, 0)`.
pub fn soft_threshold(y: &Mat, rho: f64) -> Result<Mat> {
    if !(rho >= 0.0) {
        return arg(format!("soft-threshold level must be nonnegative, got {rho}"));
    }
    Ok(y.map(|v| v.signum() * (v.abs() - rho).max(0.0)))
}

/// Euclidean projection onto the nonnegative orthant.
pub fn project_nonneg(y: &Mat) -> Mat {
    y.map(|v| v.max(0.0))
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD. Triples with `s_i <= rel_cutoff * s_max`
/// are dropped; a zero matrix yields empty factors.
pub fn svd_thin(y: &Mat, rel_cutoff: f64) -> Result<SvdFactors> {
    if !(0.0..1.0).contains(&rel_cutoff) {
        return arg(format!("rel_cutoff must lie in [0, 1), got {rel_cutoff}"));
    }
    if y.rows() < y.cols() {
        let t = svd_thin(&y.transpose(), rel_cutoff)?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = y.shape();
    // Work column-major: a[j] is column j of the evolving Y*V.
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| y.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    // Columns below eps * |Y|_F cannot move any singular value by more than
    // rounding; rotating against them only burns sweeps.
    let negligible = f64::EPSILON * f64::EPSILON * y.frobenius_sq();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut triples: Vec<(f64, usize)> = a
        .iter()
        .enumerate()
        .map(|(j, col)| (col.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    triples.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let s_max = triples.first().map_or(0.0, |t| t.0);
    let keep: Vec<(f64, usize)> = triples
        .into_iter()
        .filter(|&(s, _)| s > 0.0 && s > rel_cutoff * s_max)
        .collect();

    let r = keep.len();
    let mut u = Mat::zeros(m, r);
    let mut vm = Mat::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for (t, &(sv, j)) in keep.iter().enumerate() {
        for i in 0..m {
            u[(i, t)] = a[j][i] / sv;
        }
        for i in 0..n {
            vm[(i, t)] = v[j][i];
        }
        s.push(sv);
    }
    Ok(SvdFactors { u, s, v: vm })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

pub fn singular_values(y: &Mat) -> Vec<f64> {
    svd_thin(y, 0.0).map(|f| f.s).unwrap_or_default()
}

/// Sum of singular values.
pub fn nuclear_norm(y: &Mat) -> f64 {
    singular_values(y).iter().sum()
}

/// Largest singular value.
pub fn spectral_norm(y: &Mat) -> f64 {
    singular_values(y).first().copied().unwrap_or(0.0)
}

/// The subgradient `U V^T` of the nuclear norm at `y`, built from the triples
/// that survive `rel_cutoff`. The zero matrix maps to zero.
pub fn nuclear_subgradient(y: &Mat, rel_cutoff: f64) -> Result<Mat> {
    Ok(svd_thin(y, rel_cutoff)?.polar())
}

/// The element of `lambda * d|Y|_*` closest to `-g`, given the SVD of `Y`.
///
/// The subdifferential is `U V^T + W` with `U^T W = 0`, `W V = 0` and
/// `|W|_2 <= 1`. The minimizer of `|g + lambda (U V^T + W)|_F` takes
/// `W = -clip(P g Q / lambda)`, with `P`, `Q` the projectors onto the
/// complements of `U` and `V` and singular values clipped at 1. Full-rank
/// inputs have no freedom and return `U V^T`. The result is not scaled by
/// `lambda`.
pub fn steepest_nuclear_subgradient(f: &SvdFactors, g: &Mat, lambda: f64, rel_cutoff: f64) -> Result<Mat> {
    let (m, n) = (f.u.rows(), f.v.rows());
    if g.shape() != (m, n) {
        return shape(format!("gradient is {:?}, factors describe {m}x{n}", g.shape()));
    }
    let polar = f.polar();
    if !(lambda > 0.0) || f.rank() >= m.min(n) {
        return Ok(polar);
    }
    // P g Q = (g - U U^T g) - (g - U U^T g) V V^T
    let left = g.sub(&f.u.matmul(&f.u.t_matmul(g)?)?)?;
    let resid = left.sub(&left.matmul(&f.v)?.matmul(&f.v.transpose())?)?;
    let w = svd_thin(&resid, rel_cutoff)?;
    let mut out = polar;
    for (t, &mu) in w.s.iter().enumerate() {
        let scale = (mu / lambda).min(1.0);
        for i in 0..m {
            let ui = w.u[(i, t)] * scale;
            for j in 0..n {
                out[(i, j)] -= ui * w.v[(j, t)];
            }
        }
    }
    Ok(out)
}

fn check_group(cols: usize, i: usize, n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return arg("particle and view counts must be positive");
    }
    if cols != n * k {
        return shape(format!("expected {} columns (n={n}, K={k}), got {cols}", n * k));
    }
    if i >= n {
        return arg(format!("particle index {i} out of range for n={n}"));
    }
    Ok(())
}

/// Columns `{l*n + i : l in 0..k}` of `c` (0-based particle index `i`), in
/// view order.
pub fn column_group_select(c: &Mat, i: usize, n: usize, k: usize) -> Result<Mat> {
    check_group(c.cols(), i, n, k)?;
    let mut out = Mat::zeros(c.rows(), k);
    for r in 0..c.rows() {
        for l in 0..k {
            out[(r, l)] = c[(r, l * n + i)];
        }
    }
    Ok(out)
}

/// Adjoint of [`column_group_select`]: zero matrix of `target_shape` with the
/// columns of `w` placed at particle `i`'s positions.
pub fn column_group_scatter(
    w: &Mat,
    i: usize,
    n: usize,
    k: usize,
    target_shape: (usize, usize),
) -> Result<Mat> {
    check_group(target_shape.1, i, n, k)?;
    if w.shape() != (target_shape.0, k) {
        return shape(format!(
            "scatter source is {}x{}, expected {}x{k}",
            w.rows(),
            w.cols(),
            target_shape.0
        ));
    }
    let mut out = Mat::zeros(target_shape.0, target_shape.1);
    for r in 0..w.rows() {
        for l in 0..k {
            out[(r, l * n + i)] = w[(r, l)];
        }
    }
    Ok(out)
}
