//! Small dense real matrices.
//!
//! Dimensions in this crate never exceed six, so everything is stored
//! row-major in a flat `Vec<f64>` and the algorithms favour robustness
//! over asymptotic speed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::Serialize;
use thiserror::Error;

/// Default relative threshold for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular to working precision")]
    Singular,
}

#[derive(Clone, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input; intended for
    /// literals in code and tests.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|row| row.as_ref().len()).unwrap_or(0);
        assert!(r > 0 && c > 0, "empty matrix literal");
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged matrix literal");
            data.extend_from_slice(row.as_ref());
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
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

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Self {
        let c = cols.len();
        let r = cols.first().map(|col| col.as_ref().len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.as_ref().iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Maximum absolute row sum (the induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Submatrix with row `skip_r` and column `skip_c` removed.
    pub fn minor(&self, skip_r: usize, skip_c: usize) -> Matrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_r) {
            for j in (0..self.cols).filter(|&j| j != skip_c) {
                data.push(self[(i, j)]);
            }
        }
        Matrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
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

/// Characteristic-polynomial coefficients `p_1..p_n` in the convention
/// `det(zI - m) = z^n - p_1 z^{n-1} - ... - p_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPolyCoeffs {
    pub p: Vec<f64>,
}

impl CharPolyCoeffs {
    pub fn degree(&self) -> usize {
        self.p.len()
    }
}

/// LU factorisation with partial pivoting: packed factors, row permutation,
/// permutation sign, and whether an exactly zero pivot column was met.
fn lu(m: &Matrix) -> (Matrix, Vec<usize>, f64, bool) {
    let n = m.rows;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = a[(k, k)];
        for i in (k + 1)..n {
            let factor = a[(i, k)] / piv;
            a[(i, k)] = factor;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
            }
        }
    }
    (a, perm, sign, singular)
}

pub fn det(m: &Matrix) -> Result<f64, LinalgError> {
    let n = m.require_square()?;
    match n {
        1 => return Ok(m[(0, 0)]),
        2 => return Ok(m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]),
        _ => {}
    }
    let (a, _, sign, singular) = lu(m);
    if singular {
        return Ok(0.0);
    }
    Ok((0..n).map(|i| a[(i, i)]).product::<f64>() * sign)
}

/// Solves `m x = b` for a square nonsingular `m`.
pub fn solve(m: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = m.require_square()?;
    if b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "right-hand side has length {} for a {n}x{n} system",
            b.len()
        )));
    }
    let (a, perm, _, singular) = lu(m);
    let scale = m.norm_max();
    if singular || (0..n).any(|i| a[(i, i)].abs() <= f64::EPSILON * scale * 1e-3) {
        return Err(LinalgError::Singular);
    }
    let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            y[i] -= a[(i, j)] * y[j];
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            y[i] -= a[(i, j)] * y[j];
        }
        y[i] /= a[(i, i)];
    }
    Ok(y)
}

pub fn inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.require_square()?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(m, &e)?);
    }
    Ok(Matrix::from_columns(&cols))
}

fn cofactor_adjugate(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.rows;
    if n == 1 {
        return Ok(Matrix::identity(1));
    }
    let mut adj = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = sign * det(&m.minor(i, j))?;
        }
    }
    Ok(adj)
}

/// Classical adjoint: `m · adj(m) = det(m) I`.
pub fn adjugate(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.require_square()?;
    if n <= 4 {
        return cofactor_adjugate(m);
    }
    let d = det(m)?;
    match inverse(m) {
        Ok(inv) if d.abs() > 1e-8 * m.norm_max().powi(n as i32) => Ok(inv.scale(d)),
        _ => cofactor_adjugate(m),
    }
}

/// Characteristic-polynomial coefficients from power-sum traces via
/// Newton's identities `k p_k = s_k - sum_{i<k} p_i s_{k-i}`.
pub fn faddeev_coeffs(m: &Matrix) -> Result<CharPolyCoeffs, LinalgError> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut power = m.clone();
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            power = &power * m;
        }
        s.push(power.trace());
    }
    let mut p = Vec::with_capacity(n);
    for k in 1..=n {
        let mut acc = s[k - 1];
        for i in 1..k {
            acc -= p[i - 1] * s[k - i - 1];
        }
        p.push(acc / k as f64);
    }
    Ok(CharPolyCoeffs { p })
}

/// Max-norm of `m^n - sum_i p_i m^{n-i}`.
pub fn cayley_hamilton_residual(m: &Matrix) -> Result<f64, LinalgError> {
    let n = m.require_square()?;
    let coeffs = faddeev_coeffs(m)?;
    // powers[j] = m^j
    let mut powers = vec![Matrix::identity(n)];
    for j in 1..=n {
        let next = &powers[j - 1] * m;
        powers.push(next);
    }
    let mut acc = powers[n].clone();
    for (i, p) in coeffs.p.iter().enumerate() {
        acc = &acc - &powers[n - i - 1].scale(*p);
    }
    Ok(acc.norm_max())
}

/// Singular value decomposition by one-sided Jacobi rotations.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values in descending order.
    pub values: Vec<f64>,
    /// Right singular vectors, one per value, in the same order.
    pub right: Vec<Vec<f64>>,
}

pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = (m.rows, m.cols);
    let mut u = m.clone();
    let mut v = Matrix::identity(cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..cols {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..cols)
        .map(|j| {
            let norm = (0..rows).map(|i| u[(i, j)].powi(2)).sum::<f64>().sqrt();
            (norm, v.col(j))
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (values, right) = pairs.into_iter().unzip();
    Svd { values, right }
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    let sv = svd(m).values;
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Orthonormal basis of the null space of `m`, relative to its largest
/// singular value.
pub fn null_space(m: &Matrix, rel_tol: f64) -> Vec<Vec<f64>> {
    let decomposition = svd(m);
    let top = decomposition.values.first().copied().unwrap_or(0.0);
    decomposition
        .values
        .iter()
        .zip(decomposition.right)
        .filter(|(s, _)| top == 0.0 || **s <= rel_tol * top)
        .map(|(_, v)| v)
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faddeev_identity_and_nilpotent() {
        let c = faddeev_coeffs(&Matrix::identity(2)).unwrap();
        assert_eq!(c.p, vec![2.0, -1.0]);
        let c = faddeev_coeffs(&Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]])).unwrap();
        assert_eq!(c.p, vec![0.0, 0.0]);
    }

    #[test]
    fn faddeev_rejects_rectangular() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(
            faddeev_coeffs(&m),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn cayley_hamilton_small_cases() {
        assert_eq!(cayley_hamilton_residual(&Matrix::identity(3)).unwrap(), 0.0);
        let d = Matrix::from_rows(&[[2.0, 0.0], [0.0, 3.0]]);
        let c = faddeev_coeffs(&d).unwrap();
        assert!((c.p[0] - 5.0).abs() < 1e-12 && (c.p[1] + 6.0).abs() < 1e-12);
        assert!(cayley_hamilton_residual(&d).unwrap() < 1e-12);
    }

    #[test]
    fn adjugate_two_by_two() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let adj = adjugate(&m).unwrap();
        assert_eq!(adj, Matrix::from_rows(&[[4.0, -2.0], [-3.0, 1.0]]));
        assert_eq!(adjugate(&Matrix::identity(4)).unwrap(), Matrix::identity(4));
    }

    #[test]
    fn rank_thresholds() {
        assert_eq!(numerical_rank(&Matrix::zeros(3, 3), DEFAULT_RANK_TOL), 0);
        let outer = &Matrix::column(&[1.0, 2.0, 3.0]) * &Matrix::from_rows(&[[4.0, -1.0, 0.5]]);
        assert_eq!(numerical_rank(&outer, DEFAULT_RANK_TOL), 1);
        let nearly = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1e-14]]);
        assert_eq!(numerical_rank(&nearly, 1e-8), 1);
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]);
        assert!((det(&m).unwrap() - 18.0).abs() < 1e-12);
        let prod = &m * &inverse(&m).unwrap();
        assert!((&prod - &Matrix::identity(3)).norm_max() < 1e-14);
        let singular = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(inverse(&singular), Err(LinalgError::Singular));
    }

    #[test]
    fn null_space_of_projector() {
        let m = Matrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let ns = null_space(&m, 1e-8);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(norm(&m.mul_vec(v)) < 1e-14);
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constructor_validates() {
        assert_eq!(Matrix::new(0, 2, vec![]), Err(LinalgError::Empty));
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0; 3]),
            Err(LinalgError::EntryCount { .. })
        ));
        assert_eq!(
            Matrix::new(1, 1, vec![f64::NAN]),
            Err(LinalgError::NonFinite)
        );
    }
}
