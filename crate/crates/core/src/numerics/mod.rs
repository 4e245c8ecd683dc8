//! Dense linear algebra and seeded randomness.

mod eig;
mod rng;
mod svd;

pub use eig::{sym_eig, sym_eig_jacobi, SymEig};
pub use rng::{gaussian, SeededRng};
pub use svd::{thin_svd, ThinSvd};

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum absolute asymmetry accepted by symmetric-only operations.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Owned real vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(pub Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        DenseVector(vec![value; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        DenseVector((0..n).map(f).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(self, other)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        dot(self, self)
    }

    pub fn norm_l1(&self) -> f64 {
        self.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &[f64]) -> DenseVector {
        DenseVector(self.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    /// `self + other`.
    pub fn add(&self, other: &[f64]) -> DenseVector {
        DenseVector(self.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, alpha: f64) -> DenseVector {
        DenseVector(self.iter().map(|v| alpha * v).collect())
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &[f64]) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += alpha * v;
        }
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(v: &[f64]) -> Self {
        DenseVector(v.to_vec())
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        DenseVector(iter.into_iter().collect())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for DenseMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        DenseMatrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Builds from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self.set(i, j, *x);
        }
    }

    pub fn diag(&self) -> DenseVector {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`.
    pub fn matvec_t(&self, y: &[f64]) -> DenseVector {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = DenseVector::zeros(self.cols);
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Largest `|a_ij - a_ji|`; infinite for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        let asymmetry = self.max_asymmetry();
        if asymmetry > SYMMETRY_TOL {
            Err(Error::NonSymmetric { asymmetry })
        } else {
            Ok(())
        }
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }
}

/// `‖A‖₂²` from the top eigenvalue of the smaller Gram matrix.
pub fn spectral_norm_sq(a: &DenseMatrix) -> Result<f64> {
    a.ensure_finite("spectral_norm_sq input")?;
    if a.cols() == 0 || a.rows() == 0 {
        return Ok(0.0);
    }
    let gram = if a.cols() <= a.rows() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    Ok(sym_eig(&gram)?.values[0].max(0.0))
}

/// Power-iteration estimate of `‖A‖₂²` (the top eigenvalue of `AᵀA`).
///
/// The Rayleigh quotient of `(AᵀA)^k x₀` is nondecreasing in `k`, so more
/// iterations never lower the estimate. Iteration stops early once the
/// estimate is stationary to machine precision.
pub fn op_norm_sq(a: &DenseMatrix, iters: usize) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidParameter("power iteration needs iters >= 1".into()));
    }
    a.ensure_finite("op_norm_sq input")?;
    if a.cols() == 0 || a.rows() == 0 {
        return Ok(0.0);
    }
    // Fixed pseudo-random start: avoids starting orthogonal to the top
    // singular vector for structured inputs.
    let mut rng = SeededRng::new(0x5eed_0f_9a11);
    let mut x: DenseVector = (0..a.cols()).map(|_| rng.uniform() + 0.5).collect();
    let nx = x.norm();
    x = x.scaled(1.0 / nx);
    let mut estimate: f64 = 0.0;
    for _ in 0..iters {
        let ax = a.matvec(&x);
        let next = ax.norm_sq();
        let y = a.matvec_t(&ax);
        let ny = y.norm();
        if ny == 0.0 {
            return Ok(estimate.max(next));
        }
        let converged = (next - estimate).abs() <= 4.0 * f64::EPSILON * next;
        estimate = estimate.max(next);
        if converged {
            break;
        }
        x = y.scaled(1.0 / ny);
    }
    Ok(estimate)
}
