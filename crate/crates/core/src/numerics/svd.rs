use super::{dot, DenseMatrix, DenseVector};
use crate::error::Result;

/// Thin SVD `A = U diag(S) Vᵀ` with `k = min(rows, cols)` columns.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    /// Singular values, descending and nonnegative.
    pub s: DenseVector,
    pub v: DenseMatrix,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n, k) = (self.u.rows(), self.v.rows(), self.s.len());
        DenseMatrix::from_fn(m, n, |i, j| {
            (0..k).map(|r| self.u.get(i, r) * self.s[r] * self.v.get(j, r)).sum()
        })
    }
}

const MAX_SWEEPS: usize = 60;

/// Thin SVD by one-sided Jacobi rotations.
///
/// Column pairs of a working copy of `A` are rotated until mutually
/// orthogonal to machine precision; the column norms are the singular values
/// and the accumulated rotations form `V`. Wide inputs are handled by
/// transposition. Left vectors of vanishing singular values are completed
/// from the standard basis. Each right singular vector is sign-fixed so its
/// largest-magnitude entry is positive.
pub fn thin_svd(a: &DenseMatrix) -> Result<ThinSvd> {
    a.ensure_finite("thin_svd input")?;
    if a.cols() > a.rows() {
        let t = thin_svd(&a.transpose())?;
        return Ok(ThinSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return Ok(ThinSvd {
            u: DenseMatrix::zeros(m, 0),
            s: DenseVector::zeros(0),
            v: DenseMatrix::zeros(0, 0),
        });
    }
    let mut w: Vec<DenseVector> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<DenseVector> = (0..n)
        .map(|j| DenseVector::from_fn(n, |i| if i == j { 1.0 } else { 0.0 }))
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w[p].norm_sq();
                let beta = w[q].norm_sq();
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: DenseVector = order.iter().map(|&j| norms[j]).collect();
    let tiny = s[0] * (m as f64) * f64::EPSILON;

    let mut u = DenseMatrix::zeros(m, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut u_cols: Vec<DenseVector> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let pivot = v[j].iter().fold(0.0f64, |best, x| if x.abs() > best.abs() { *x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let q = if s[k] > tiny {
            w[j].scaled(sign / s[k])
        } else {
            (0..m)
                .find_map(|e| {
                    let mut basis = DenseVector::zeros(m);
                    basis[e] = 1.0;
                    orthonormalize_against(&u_cols, basis)
                })
                .expect("column count never exceeds the ambient dimension")
        };
        u.set_column(k, &q);
        vm.set_column(k, &v[j].scaled(sign));
        u_cols.push(q);
    }
    Ok(ThinSvd { u, s, v: vm })
}

/// Two passes of modified Gram-Schmidt; `None` when nothing independent remains.
fn orthonormalize_against(basis: &[DenseVector], mut x: DenseVector) -> Option<DenseVector> {
    let start = x.norm();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &x);
            x.axpy(-c, b);
        }
    }
    let n = x.norm();
    if n <= 1e-8 * start {
        None
    } else {
        Some(x.scaled(1.0 / n))
    }
}
