//! Proximal operators and projections.
//!
//! `prox_{t g}(x) = argmin_u t·g(u) + ½‖u − x‖²`. Every operator here is
//! closed form; the nuclear-norm case goes through [`thin_svd`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{thin_svd, DenseMatrix, DenseVector};

fn check_step(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveStep(t))
    }
}

/// Soft-thresholding, the prox of `t‖·‖₁`.
pub fn prox_l1(x: &[f64], t: f64) -> Result<DenseVector> {
    check_step(t)?;
    Ok(x.iter().map(|&v| soft_threshold(v, t)).collect())
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Block soft-thresholding, the prox of `t‖·‖₂`.
pub fn prox_l2norm(x: &[f64], t: f64) -> Result<DenseVector> {
    check_step(t)?;
    let n = crate::numerics::norm(x);
    if n <= t {
        return Ok(DenseVector::zeros(x.len()));
    }
    let scale = 1.0 - t / n;
    Ok(x.iter().map(|v| scale * v).collect())
}

/// Componentwise clamp onto `[-r, r]`.
pub fn project_linf_ball(x: &[f64], r: f64) -> DenseVector {
    x.iter().map(|v| v.clamp(-r, r)).collect()
}

/// Radial projection onto the Euclidean ball of radius `r`.
pub fn project_l2_ball(x: &[f64], r: f64) -> DenseVector {
    let n = crate::numerics::norm(x);
    if n <= r {
        x.into()
    } else {
        x.iter().map(|v| r * v / n).collect()
    }
}

/// Singular-value thresholding, the prox of `t‖·‖_*`.
pub fn prox_nuclear(x: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    check_step(t)?;
    let svd = thin_svd(x)?;
    let shrunk: Vec<f64> = svd.s.iter().map(|s| (s - t).max(0.0)).collect();
    let (m, n) = (x.rows(), x.cols());
    let k = shrunk.iter().take_while(|s| **s > 0.0).count();
    Ok(DenseMatrix::from_fn(m, n, |i, j| {
        (0..k).map(|r| svd.u.get(i, r) * shrunk[r] * svd.v.get(j, r)).sum()
    }))
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Result<DenseVector> {
    if lo.len() != x.len() || hi.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "box bounds",
            expected: x.len(),
            found: lo.len().min(hi.len()),
        });
    }
    check_bounds(lo, hi)?;
    Ok(x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| v.max(*l).min(*h))
        .collect())
}

pub fn check_bounds(lo: &[f64], hi: &[f64]) -> Result<()> {
    for (index, (l, h)) in lo.iter().zip(hi).enumerate() {
        if l > h || l.is_nan() || h.is_nan() {
            return Err(Error::InvertedBounds {
                index,
                lo: *l,
                hi: *h,
            });
        }
    }
    Ok(())
}

/// Reshape a flat vector into a `rows × cols` matrix, column by column.
pub fn reshape_columns(x: &[f64], rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| x[j * rows + i])
}

pub fn flatten_columns(m: &DenseMatrix) -> DenseVector {
    let (rows, cols) = (m.rows(), m.cols());
    (0..rows * cols).map(|k| m.get(k % rows, k / rows)).collect()
}

/// Which convex function a [`ProxTerm`] represents (before weighting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxKind {
    Zero,
    /// `‖x‖₁`
    L1,
    /// `‖x‖₂`
    L2Norm,
    /// `‖x‖₂²`
    SquaredL2,
    /// Indicator of `‖x‖_∞ ≤ weight` (the dual unit ball of ℓ1 when `weight = 1`).
    LinfBall,
    /// Indicator of `lo ≤ x ≤ hi`. The weight is ignored.
    IndicatorBox { lo: Vec<f64>, hi: Vec<f64> },
    /// `‖X‖_*` of the column-major reshape of `x` into `rows × cols`.
    NuclearNorm { rows: usize, cols: usize },
}

/// A weighted prox-friendly convex function on ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxTerm {
    #[serde(flatten)]
    pub kind: ProxKind,
    pub weight: f64,
    pub dim: usize,
}

impl ProxTerm {
    pub fn new(kind: ProxKind, weight: f64, dim: usize) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("term weight must be >= 0, got {weight}")));
        }
        match &kind {
            ProxKind::IndicatorBox { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "indicator box bounds",
                        expected: dim,
                        found: lo.len().min(hi.len()),
                    });
                }
                check_bounds(lo, hi)?;
            }
            ProxKind::NuclearNorm { rows, cols } if rows * cols != dim => {
                return Err(Error::DimensionMismatch {
                    context: "nuclear norm shape",
                    expected: dim,
                    found: rows * cols,
                });
            }
            _ => {}
        }
        Ok(ProxTerm { kind, weight, dim })
    }

    pub fn zero(dim: usize) -> Self {
        ProxTerm {
            kind: ProxKind::Zero,
            weight: 0.0,
            dim,
        }
    }

    pub fn l1(weight: f64, dim: usize) -> Self {
        Self::new(ProxKind::L1, weight, dim).expect("valid l1 term")
    }

    pub fn l2norm(weight: f64, dim: usize) -> Self {
        Self::new(ProxKind::L2Norm, weight, dim).expect("valid l2 term")
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, ProxKind::LinfBall | ProxKind::IndicatorBox { .. })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "prox term argument",
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Function value; `+∞` outside an indicator's set.
    pub fn value(&self, x: &[f64]) -> f64 {
        let w = self.weight;
        match &self.kind {
            ProxKind::Zero => 0.0,
            ProxKind::L1 => w * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxKind::L2Norm => w * crate::numerics::norm(x),
            ProxKind::SquaredL2 => w * crate::numerics::dot(x, x),
            ProxKind::LinfBall => {
                if x.iter().all(|v| v.abs() <= w) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxKind::IndicatorBox { lo, hi } => {
                if x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v >= l && v <= h) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxKind::NuclearNorm { rows, cols } => {
                let m = reshape_columns(x, *rows, *cols);
                w * thin_svd(&m).map(|s| s.s.iter().sum()).unwrap_or(f64::NAN)
            }
        }
    }

    /// `prox_{t·self}(x)`.
    pub fn prox(&self, x: &[f64], t: f64) -> Result<DenseVector> {
        check_step(t)?;
        self.check_dim(x)?;
        let w = self.weight;
        match &self.kind {
            ProxKind::Zero => Ok(x.into()),
            _ if w == 0.0 && !matches!(self.kind, ProxKind::IndicatorBox { .. }) => {
                if matches!(self.kind, ProxKind::LinfBall) {
                    Ok(DenseVector::zeros(x.len()))
                } else {
                    Ok(x.into())
                }
            }
            ProxKind::L1 => prox_l1(x, t * w),
            ProxKind::L2Norm => prox_l2norm(x, t * w),
            ProxKind::SquaredL2 => {
                let s = 1.0 / (1.0 + 2.0 * t * w);
                Ok(x.iter().map(|v| s * v).collect())
            }
            ProxKind::LinfBall => Ok(project_linf_ball(x, w)),
            ProxKind::IndicatorBox { lo, hi } => project_box(x, lo, hi),
            ProxKind::NuclearNorm { rows, cols } => {
                let m = reshape_columns(x, *rows, *cols);
                Ok(flatten_columns(&prox_nuclear(&m, t * w)?))
            }
        }
    }

    /// `L_f²` such that `|g(x) − g(y)| ≤ L_f ‖x − y‖`; `None` when unbounded.
    pub fn lipschitz_sq(&self) -> Option<f64> {
        let w2 = self.weight * self.weight;
        match &self.kind {
            ProxKind::Zero => Some(0.0),
            ProxKind::L1 => Some(w2 * self.dim as f64),
            ProxKind::L2Norm => Some(w2),
            ProxKind::NuclearNorm { rows, cols } => Some(w2 * (*rows).min(*cols) as f64),
            ProxKind::SquaredL2 | ProxKind::LinfBall | ProxKind::IndicatorBox { .. } => None,
        }
    }

    /// One element of the subdifferential (zero on kinks; zero for indicators).
    pub fn subgradient(&self, x: &[f64]) -> Result<DenseVector> {
        self.check_dim(x)?;
        let w = self.weight;
        Ok(match &self.kind {
            ProxKind::Zero | ProxKind::LinfBall | ProxKind::IndicatorBox { .. } => {
                DenseVector::zeros(x.len())
            }
            ProxKind::L1 => x
                .iter()
                .map(|v| if *v == 0.0 { 0.0 } else { w * v.signum() })
                .collect(),
            ProxKind::L2Norm => {
                let n = crate::numerics::norm(x);
                if n == 0.0 {
                    DenseVector::zeros(x.len())
                } else {
                    x.iter().map(|v| w * v / n).collect()
                }
            }
            ProxKind::SquaredL2 => x.iter().map(|v| 2.0 * w * v).collect(),
            ProxKind::NuclearNorm { rows, cols } => {
                let m = reshape_columns(x, *rows, *cols);
                let svd = thin_svd(&m)?;
                let tol = svd.s.first().copied().unwrap_or(0.0) * 1e-12;
                let k = svd.s.iter().take_while(|s| **s > tol).count();
                let g = DenseMatrix::from_fn(*rows, *cols, |i, j| {
                    (0..k).map(|r| svd.u.get(i, r) * svd.v.get(j, r)).sum::<f64>() * w
                });
                flatten_columns(&g)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Grid minimizer of `t|u| + ½(u − x)²` on `[x − 3t − 1, x + 3t + 1]`.
    fn grid_l1_1d(x: f64, t: f64) -> f64 {
        let (lo, hi) = (x - 3.0 * t - 1.0, x + 3.0 * t + 1.0);
        let n = 100_000;
        (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .min_by(|a, b| {
                let fa = t * a.abs() + 0.5 * (a - x).powi(2);
                let fb = t * b.abs() + 0.5 * (b - x).powi(2);
                fa.total_cmp(&fb)
            })
            .unwrap()
    }

    #[test]
    fn l1_examples() {
        let p = prox_l1(&[3.0, -0.5, 0.0], 1.0).unwrap();
        assert_eq!(p.0, vec![2.0, 0.0, 0.0]);
        for (x, got) in [3.0, -0.5, 0.0].iter().zip(p.iter()) {
            assert!((grid_l1_1d(*x, 1.0) - got).abs() < 1e-4);
        }
        assert_eq!(prox_l1(&[1.0, 1.0], 1.0).unwrap().0, vec![0.0, 0.0]);
        let x = [0.3, -2.0, 7.5];
        let p = prox_l1(&x, 1e-12).unwrap();
        assert!(p.dist(&x) < 1e-9);
        assert!(matches!(prox_l1(&x, 0.0), Err(Error::NonPositiveStep(_))));
    }

    #[test]
    fn l2norm_examples() {
        let p = prox_l2norm(&[3.0, 4.0], 1.0).unwrap();
        assert!((p[0] - 2.4).abs() < 1e-15 && (p[1] - 3.2).abs() < 1e-15);
        // Radial oracle: r ↦ r + ½(r − 5)² minimized on a grid.
        let r = (0..=100_000)
            .map(|i| 10.0 * i as f64 / 100_000.0)
            .min_by(|a, b| (a + 0.5 * (a - 5.0).powi(2)).total_cmp(&(b + 0.5 * (b - 5.0).powi(2))))
            .unwrap();
        assert!((p.norm() - r).abs() < 1e-4);
        assert_eq!(prox_l2norm(&[0.3, 0.4], 1.0).unwrap().0, vec![0.0, 0.0]);
        assert!(prox_l2norm(&[0.3, 0.4], 1e-12).unwrap().dist(&[0.3, 0.4]) < 1e-9);
        assert!(prox_l2norm(&[1.0], -1.0).is_err());
    }

    #[test]
    fn projections() {
        assert_eq!(project_linf_ball(&[2.0, -0.3], 1.0).0, vec![1.0, -0.3]);
        assert_eq!(project_linf_ball(&[0.2, -0.3], 1.0).0, vec![0.2, -0.3]);
        assert_eq!(project_linf_ball(&[-5.0], 2.0).0, vec![-2.0]);
        let p = project_l2_ball(&[3.0, 4.0], 1.0);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(project_l2_ball(&[0.1, 0.0], 1.0).0, vec![0.1, 0.0]);
        let b = [0.6, 0.8];
        assert!(project_l2_ball(&b, 1.0).dist(&b) <= 1e-12);
    }

    #[test]
    fn box_projection() {
        let p = project_box(&[5.0, -5.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p.0, vec![1.0, 0.0]);
        let p = project_box(&[0.5, 0.25], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p.0, vec![0.5, 0.25]);
        let p = project_box(&[-3.0, 9.0], &[0.7, 0.7], &[0.7, 0.7]).unwrap();
        assert_eq!(p.0, vec![0.7, 0.7]);
        assert!(matches!(
            project_box(&[0.0], &[1.0], &[0.0]),
            Err(Error::InvertedBounds { index: 0, .. })
        ));
    }

    #[test]
    fn nuclear_examples() {
        let p = prox_nuclear(&DenseMatrix::from_diag(&[3.0, 1.0]), 2.0).unwrap();
        assert!(p.sub(&DenseMatrix::from_diag(&[1.0, 0.0])).frobenius_norm() < 1e-12);
        let z = prox_nuclear(&DenseMatrix::zeros(3, 2), 0.7).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, 0.0]]).unwrap();
        assert!(prox_nuclear(&x, 1e-12).unwrap().sub(&x).frobenius_norm() < 1e-8);
    }

    #[test]
    fn term_values_and_constants() {
        let l1 = ProxTerm::l1(2.0, 3);
        assert_eq!(l1.value(&[1.0, -1.0, 0.5]), 5.0);
        assert_eq!(l1.lipschitz_sq(), Some(12.0));
        let bx = ProxTerm::new(
            ProxKind::IndicatorBox { lo: vec![0.0; 2], hi: vec![1.0; 2] },
            1.0,
            2,
        )
        .unwrap();
        assert_eq!(bx.value(&[0.5, 1.0]), 0.0);
        assert_eq!(bx.value(&[0.5, 1.5]), f64::INFINITY);
        assert_eq!(bx.lipschitz_sq(), None);
        assert_eq!(bx.prox(&[2.0, -1.0], 0.3).unwrap().0, vec![1.0, 0.0]);
        let nuc = ProxTerm::new(ProxKind::NuclearNorm { rows: 2, cols: 2 }, 1.5, 4).unwrap();
        // diag(3, 1) in column-major order.
        assert!((nuc.value(&[3.0, 0.0, 0.0, 1.0]) - 6.0).abs() < 1e-12);
        assert!(ProxTerm::new(ProxKind::NuclearNorm { rows: 2, cols: 2 }, 1.0, 5).is_err());
        assert!(ProxTerm::new(ProxKind::L1, -1.0, 2).is_err());
        let sq = ProxTerm::new(ProxKind::SquaredL2, 0.5, 2).unwrap();
        assert_eq!(sq.prox(&[2.0, 4.0], 1.0).unwrap().0, vec![1.0, 2.0]);
    }

    #[test]
    fn reshape_round_trip() {
        let x: Vec<f64> = (0..6).map(f64::from).collect();
        let m = reshape_columns(&x, 2, 3);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(flatten_columns(&m).0, x);
    }
}
