//! Composite objectives `F = f + h` in the shapes used by the experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{spectral_norm_sq, sym_eig, DenseMatrix, DenseVector};
use crate::prox::ProxTerm;
use crate::smoothing::{smoothed_residual_grad, spectral_max_eval, ResidualNorm};

/// Differentiable part of `f`, used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SmoothPart {
    None,
    /// `½‖y − Hx‖²`
    LeastSquares { h: DenseMatrix, y: DenseVector },
    /// `½xᵀPx + qᵀx + r` with `P` symmetric positive semidefinite.
    Quadratic { p: DenseMatrix, q: DenseVector, r: f64 },
    /// `⟨c, x⟩`
    Linear { c: DenseVector },
}

/// Nonsmooth part of `f`, replaced by a smooth surrogate during the solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NonsmoothPart {
    None,
    /// `w‖Ax − b‖`, smoothed over the dual ball of radius `w`.
    Residual {
        a: DenseMatrix,
        b: DenseVector,
        norm: ResidualNorm,
        weight: f64,
    },
    /// `λ_max(C + Diag(x))`, smoothed by log-sum-exp of the spectrum.
    SpectralMax { c: DenseMatrix },
}

impl NonsmoothPart {
    pub fn is_none(&self) -> bool {
        matches!(self, NonsmoothPart::None)
    }
}

/// The prox term `h`, optionally acting on a subset of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    pub term: ProxTerm,
    /// Coordinates `h` reads, in order; all of `x` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
}

impl Regularizer {
    pub fn full(term: ProxTerm) -> Self {
        Regularizer {
            term,
            support: None,
        }
    }

    pub fn on(term: ProxTerm, support: Vec<usize>) -> Self {
        Regularizer {
            term,
            support: Some(support),
        }
    }

    pub fn is_indicator(&self) -> bool {
        self.term.is_indicator()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match &self.support {
            None if self.term.dim != dim => Err(Error::DimensionMismatch {
                context: "prox term dimension",
                expected: dim,
                found: self.term.dim,
            }),
            None => Ok(()),
            Some(s) => {
                if s.len() != self.term.dim {
                    return Err(Error::DimensionMismatch {
                        context: "prox term support length",
                        expected: self.term.dim,
                        found: s.len(),
                    });
                }
                let mut seen = vec![false; dim];
                for &i in s {
                    if i >= dim || seen[i] {
                        return Err(Error::InvalidParameter(format!(
                            "prox support index {i} out of range or repeated"
                        )));
                    }
                    seen[i] = true;
                }
                Ok(())
            }
        }
    }

    fn gather(&self, x: &[f64]) -> DenseVector {
        match &self.support {
            None => x.into(),
            Some(s) => s.iter().map(|&i| x[i]).collect(),
        }
    }

    fn scatter(&self, x: &[f64], part: DenseVector, fill_rest: bool) -> DenseVector {
        match &self.support {
            None => part,
            Some(s) => {
                let mut out = if fill_rest {
                    DenseVector::from(x)
                } else {
                    DenseVector::zeros(x.len())
                };
                for (k, &i) in s.iter().enumerate() {
                    out[i] = part[k];
                }
                out
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.term.value(&self.gather(x))
    }

    /// `prox_{t h}(x)`; coordinates outside the support pass through.
    pub fn prox(&self, x: &[f64], t: f64) -> Result<DenseVector> {
        let p = self.term.prox(&self.gather(x), t)?;
        Ok(self.scatter(x, p, true))
    }

    pub fn subgradient(&self, x: &[f64]) -> Result<DenseVector> {
        let g = self.term.subgradient(&self.gather(x))?;
        Ok(self.scatter(x, g, false))
    }
}

/// `F = f + h` with `f = smooth + nonsmooth`, plus the constants the
/// solvers need: curvature scale `L_A` of the nonsmooth part's linear map,
/// Lipschitz constant `L_s` of the smooth gradient, and `L_f²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub dim: usize,
    pub smooth: SmoothPart,
    pub nonsmooth: NonsmoothPart,
    pub h: Regularizer,
    pub curvature: f64,
    pub smooth_lipschitz: f64,
    pub lipschitz_sq: f64,
}

const CONSTANT_RTOL: f64 = 1e-6;

impl ObjectiveSpec {
    pub fn new(smooth: SmoothPart, nonsmooth: NonsmoothPart, h: Regularizer) -> Result<Self> {
        let dim = infer_dim(&smooth, &nonsmooth, &h);
        let (curvature, lipschitz_sq) = nonsmooth_constants(&nonsmooth)?;
        let spec = ObjectiveSpec {
            dim,
            smooth_lipschitz: smooth_constant(&smooth)?,
            smooth,
            nonsmooth,
            h,
            curvature,
            lipschitz_sq,
        };
        spec.check_shapes()?;
        Ok(spec)
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.dim;
        let mismatch = |context, expected, found| Error::DimensionMismatch {
            context,
            expected,
            found,
        };
        match &self.smooth {
            SmoothPart::None => {}
            SmoothPart::LeastSquares { h, y } => {
                if h.cols() != n {
                    return Err(mismatch("least-squares operator columns", n, h.cols()));
                }
                if h.rows() != y.len() {
                    return Err(mismatch("least-squares target length", h.rows(), y.len()));
                }
                h.ensure_finite("least-squares operator")?;
                y.ensure_finite("least-squares target")?;
            }
            SmoothPart::Quadratic { p, q, r } => {
                if p.rows() != n || p.cols() != n {
                    return Err(mismatch("quadratic matrix size", n, p.rows().max(p.cols())));
                }
                if q.len() != n {
                    return Err(mismatch("quadratic linear term", n, q.len()));
                }
                p.ensure_symmetric()?;
                q.ensure_finite("quadratic linear term")?;
                if !r.is_finite() {
                    return Err(Error::NonFinite("quadratic constant"));
                }
            }
            SmoothPart::Linear { c } => {
                if c.len() != n {
                    return Err(mismatch("linear term length", n, c.len()));
                }
                c.ensure_finite("linear term")?;
            }
        }
        match &self.nonsmooth {
            NonsmoothPart::None => {}
            NonsmoothPart::Residual { a, b, weight, .. } => {
                if a.cols() != n {
                    return Err(mismatch("residual operator columns", n, a.cols()));
                }
                if a.rows() != b.len() {
                    return Err(mismatch("residual offset length", a.rows(), b.len()));
                }
                b.ensure_finite("residual offset")?;
                if !(*weight >= 0.0 && weight.is_finite()) {
                    return Err(Error::InvalidParameter(format!("residual weight {weight}")));
                }
            }
            NonsmoothPart::SpectralMax { c } => {
                if c.rows() != n || c.cols() != n {
                    return Err(mismatch("spectral base matrix size", n, c.rows()));
                }
                c.ensure_symmetric()?;
            }
        }
        self.h.validate(n)
    }

    /// Re-derives every stored constant and dimension.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("objective dimension must be >= 1".into()));
        }
        self.check_shapes()?;
        let (curvature, lipschitz_sq) = nonsmooth_constants(&self.nonsmooth)?;
        let smooth = smooth_constant(&self.smooth)?;
        for (name, stored, derived) in [
            ("curvature", self.curvature, curvature),
            ("lipschitz_sq", self.lipschitz_sq, lipschitz_sq),
            ("smooth_lipschitz", self.smooth_lipschitz, smooth),
        ] {
            if !((stored - derived).abs() <= CONSTANT_RTOL * derived.abs().max(1.0)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} is {stored}, operator gives {derived}"
                )));
            }
        }
        if !(self.curvature > 0.0) {
            return Err(Error::InvalidParameter("curvature scale must be positive".into()));
        }
        Ok(())
    }

    pub fn smooth_value_grad(&self, x: &[f64]) -> (f64, DenseVector) {
        match &self.smooth {
            SmoothPart::None => (0.0, DenseVector::zeros(x.len())),
            SmoothPart::LeastSquares { h, y } => {
                let r = h.matvec(x).sub(y);
                (0.5 * r.norm_sq(), h.matvec_t(&r))
            }
            SmoothPart::Quadratic { p, q, r } => {
                let px = p.matvec(x);
                (0.5 * px.dot(x) + q.dot(x) + r, px.add(q))
            }
            SmoothPart::Linear { c } => (c.dot(x), c.clone()),
        }
    }

    /// `C + Diag(x)`.
    pub fn spectral_matrix(c: &DenseMatrix, x: &[f64]) -> DenseMatrix {
        let mut m = c.clone();
        for (i, v) in x.iter().enumerate() {
            m.set(i, i, m.get(i, i) + v);
        }
        m
    }

    /// Exact value of the nonsmooth part.
    pub fn nonsmooth_value(&self, x: &[f64]) -> Result<f64> {
        match &self.nonsmooth {
            NonsmoothPart::None => Ok(0.0),
            NonsmoothPart::Residual {
                a,
                b,
                norm,
                weight,
            } => Ok(weight * norm.eval(&a.matvec(x).sub(b))),
            NonsmoothPart::SpectralMax { c } => {
                Ok(sym_eig(&Self::spectral_matrix(c, x))?.values[0])
            }
        }
    }

    /// Value and gradient of the smoothed nonsmooth part at level `μ`.
    pub fn smoothed_value_grad(&self, x: &[f64], mu: f64) -> Result<(f64, DenseVector)> {
        match &self.nonsmooth {
            NonsmoothPart::None => Ok((0.0, DenseVector::zeros(x.len()))),
            NonsmoothPart::Residual {
                a,
                b,
                norm,
                weight,
            } => {
                if *weight == 0.0 {
                    return Ok((0.0, DenseVector::zeros(x.len())));
                }
                // Radius-w dual ball at level μ equals w times the unit ball at level wμ.
                let (v, g) = smoothed_residual_grad(a, b, x, weight * mu, *norm)?;
                Ok((weight * v, g.scaled(*weight)))
            }
            NonsmoothPart::SpectralMax { c } => {
                let e = spectral_max_eval(&Self::spectral_matrix(c, x), mu)?;
                Ok((e.value, e.gradient_diag()))
            }
        }
    }

    /// `f(x)`.
    pub fn f_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.smooth_value_grad(x).0 + self.nonsmooth_value(x)?)
    }

    /// `(f_μ(x), ∇f_μ(x))`.
    pub fn f_mu(&self, x: &[f64], mu: f64) -> Result<(f64, DenseVector)> {
        let (sv, mut sg) = self.smooth_value_grad(x);
        let (nv, ng) = self.smoothed_value_grad(x, mu)?;
        sg.axpy(1.0, &ng);
        Ok((sv + nv, sg))
    }

    pub fn h_value(&self, x: &[f64]) -> f64 {
        self.h.value(x)
    }

    /// `F(x) = f(x) + h(x)`, `+∞` outside the domain of `h`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f_value(x)? + self.h_value(x))
    }

    /// `f_μ(x) + h(x)`.
    pub fn smoothed_value(&self, x: &[f64], mu: f64) -> Result<f64> {
        Ok(self.f_mu(x, mu)?.0 + self.h_value(x))
    }

    /// False when `f` has no nonsmooth term or its weight is zero; the
    /// stepsize then no longer depends on `μ`.
    pub fn has_nonsmooth(&self) -> bool {
        match &self.nonsmooth {
            NonsmoothPart::None => false,
            NonsmoothPart::Residual { weight, .. } => *weight > 0.0,
            NonsmoothPart::SpectralMax { .. } => true,
        }
    }

    /// Lipschitz constant of `∇f_μ`: `L_s + L_A/μ`.
    pub fn smoothness(&self, mu: f64) -> f64 {
        if !self.has_nonsmooth() {
            self.smooth_lipschitz
        } else {
            self.smooth_lipschitz + self.curvature / mu
        }
    }

    /// Stepsize `1/(L_s + L_A/μ)`, i.e. `μ/L_A` when `f` has no smooth part.
    /// Written as `μ/(μL_s + L_A)` so it stays finite for subnormal `μ`.
    pub fn step(&self, mu: f64) -> f64 {
        if self.has_nonsmooth() {
            mu / (mu * self.smooth_lipschitz + self.curvature)
        } else if self.smooth_lipschitz > 0.0 {
            1.0 / self.smooth_lipschitz
        } else {
            mu
        }
    }

    /// Gradient mapping `(x − prox_{ζh}(x − ζ∇f_μ(x)))/ζ` together with the
    /// prox point.
    pub fn grad_map(&self, x: &[f64], mu: f64, zeta: f64) -> Result<(DenseVector, DenseVector)> {
        if !(zeta > 0.0) {
            return Err(Error::NonPositiveStep(zeta));
        }
        let (_, g) = self.f_mu(x, mu)?;
        let mut w = DenseVector::from(x);
        w.axpy(-zeta, &g);
        let p = self.h.prox(&w, zeta)?;
        let gm = x.iter().zip(p.iter()).map(|(a, b)| (a - b) / zeta).collect();
        Ok((gm, p))
    }

    /// One subgradient of `F` (zero on kinks).
    pub fn subgradient(&self, x: &[f64]) -> Result<DenseVector> {
        let (_, mut g) = self.smooth_value_grad(x);
        match &self.nonsmooth {
            NonsmoothPart::None => {}
            NonsmoothPart::Residual {
                a,
                b,
                norm,
                weight,
            } => {
                let r = a.matvec(x).sub(b);
                let y: DenseVector = match norm {
                    ResidualNorm::L1 => r.iter().map(|v| if *v == 0.0 { 0.0 } else { v.signum() }).collect(),
                    ResidualNorm::L2 => {
                        let n = r.norm();
                        if n == 0.0 {
                            DenseVector::zeros(r.len())
                        } else {
                            r.scaled(1.0 / n)
                        }
                    }
                };
                g.axpy(*weight, &a.matvec_t(&y));
            }
            NonsmoothPart::SpectralMax { c } => {
                let e = sym_eig(&Self::spectral_matrix(c, x))?;
                for (i, gi) in g.iter_mut().enumerate() {
                    let q = e.vectors.get(i, 0);
                    *gi += q * q;
                }
            }
        }
        g.axpy(1.0, &self.h.subgradient(x)?);
        Ok(g)
    }

    /// The residual map `(A, b, norm, w)` when `f`'s nonsmooth part is a
    /// weighted residual norm.
    pub fn residual(&self) -> Option<(&DenseMatrix, &DenseVector, ResidualNorm, f64)> {
        match &self.nonsmooth {
            NonsmoothPart::Residual {
                a,
                b,
                norm,
                weight,
            } => Some((a, b, *norm, *weight)),
            _ => None,
        }
    }

    /// Starting point with the right dimension.
    pub fn zeros(&self) -> DenseVector {
        DenseVector::zeros(self.dim)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "starting point",
                expected: self.dim,
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("starting point"));
        }
        Ok(())
    }
}

fn infer_dim(smooth: &SmoothPart, nonsmooth: &NonsmoothPart, h: &Regularizer) -> usize {
    match (nonsmooth, smooth) {
        (NonsmoothPart::Residual { a, .. }, _) => a.cols(),
        (NonsmoothPart::SpectralMax { c }, _) => c.rows(),
        (_, SmoothPart::LeastSquares { h, .. }) => h.cols(),
        (_, SmoothPart::Quadratic { q, .. }) => q.len(),
        (_, SmoothPart::Linear { c }) => c.len(),
        _ => match &h.support {
            None => h.term.dim,
            Some(s) => s.iter().max().map_or(0, |m| m + 1),
        },
    }
}

fn smooth_constant(smooth: &SmoothPart) -> Result<f64> {
    match smooth {
        SmoothPart::None | SmoothPart::Linear { .. } => Ok(0.0),
        SmoothPart::LeastSquares { h, .. } => spectral_norm_sq(h),
        SmoothPart::Quadratic { p, .. } => {
            p.ensure_symmetric()?;
            Ok(sym_eig(p)?.values[0].max(0.0))
        }
    }
}

/// `(L_A, L_f²)` of the nonsmooth part.
fn nonsmooth_constants(nonsmooth: &NonsmoothPart) -> Result<(f64, f64)> {
    match nonsmooth {
        NonsmoothPart::None => Ok((1.0, 0.0)),
        NonsmoothPart::Residual {
            a, norm, weight, ..
        } => Ok((spectral_norm_sq(a)?, weight * weight * norm.lipschitz_sq(a.rows()))),
        NonsmoothPart::SpectralMax { c } => Ok((1.0, 2.0 * (c.rows() as f64).ln())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ProxKind;

    fn lasso_1d() -> ObjectiveSpec {
        // |x − 1| + 0.5|x|
        ObjectiveSpec::new(
            SmoothPart::None,
            NonsmoothPart::Residual {
                a: DenseMatrix::identity(1),
                b: vec![1.0].into(),
                norm: ResidualNorm::L1,
                weight: 1.0,
            },
            Regularizer::full(ProxTerm::l1(0.5, 1)),
        )
        .unwrap()
    }

    #[test]
    fn constants_and_values() {
        let s = lasso_1d();
        assert_eq!((s.dim, s.curvature, s.lipschitz_sq, s.smooth_lipschitz), (1, 1.0, 1.0, 0.0));
        assert_eq!(s.value(&[1.0]).unwrap(), 0.5);
        assert_eq!(s.value(&[0.0]).unwrap(), 1.0);
        assert_eq!(s.step(0.25), 0.25);
        s.validate().unwrap();
    }

    #[test]
    fn weighted_residual_matches_scaled_dual_ball() {
        // w‖x − b‖₁ smoothed over ‖y‖_∞ ≤ w: per coordinate a Huber function
        // with kink width wμ.
        let s = ObjectiveSpec::new(
            SmoothPart::None,
            NonsmoothPart::Residual {
                a: DenseMatrix::identity(2),
                b: vec![0.0, 0.0].into(),
                norm: ResidualNorm::L1,
                weight: 2.0,
            },
            Regularizer::full(ProxTerm::zero(2)),
        )
        .unwrap();
        let mu = 0.1;
        let (v, g) = s.smoothed_value_grad(&[0.1, -3.0], mu).unwrap();
        let huber = |r: f64| {
            let y = (r / mu).clamp(-2.0, 2.0);
            y * r - 0.5 * mu * y * y
        };
        assert!((v - huber(0.1) - huber(-3.0)).abs() < 1e-14);
        assert_eq!(g.0, vec![1.0, -2.0]);
        assert_eq!(s.lipschitz_sq, 8.0);
    }

    #[test]
    fn supported_regularizer() {
        let reg = Regularizer::on(ProxTerm::l1(1.0, 2), vec![2, 0]);
        let x = [3.0, -5.0, 0.5];
        assert_eq!(reg.value(&x), 3.5);
        assert_eq!(reg.prox(&x, 1.0).unwrap().0, vec![2.0, -5.0, 0.0]);
        assert_eq!(reg.subgradient(&x).unwrap().0, vec![1.0, 0.0, 1.0]);
        assert!(reg.validate(3).is_ok());
        assert!(Regularizer::on(ProxTerm::l1(1.0, 2), vec![0, 0]).validate(3).is_err());
        assert!(Regularizer::on(ProxTerm::l1(1.0, 2), vec![0, 3]).validate(3).is_err());
    }

    #[test]
    fn spectral_objective() {
        let c = DenseMatrix::identity(2).scaled(0.5);
        let s = ObjectiveSpec::new(
            SmoothPart::Linear {
                c: vec![-1.0, -1.0].into(),
            },
            NonsmoothPart::SpectralMax { c },
            Regularizer::full(ProxTerm::new(ProxKind::SquaredL2, 0.05, 2).unwrap()),
        )
        .unwrap();
        assert_eq!(s.value(&[0.0, 0.0]).unwrap(), 0.5);
        assert!((s.lipschitz_sq - 2.0 * 2f64.ln()).abs() < 1e-15);
        let (_, g) = s.smoothed_value_grad(&[0.3, -0.2], 0.1).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stepsize_rule() {
        let s = ObjectiveSpec::new(
            SmoothPart::LeastSquares {
                h: DenseMatrix::from_diag(&[2.0, 1.0]),
                y: vec![0.0, 0.0].into(),
            },
            NonsmoothPart::Residual {
                a: DenseMatrix::from_diag(&[3.0, 1.0]),
                b: vec![0.0, 0.0].into(),
                norm: ResidualNorm::L2,
                weight: 1.0,
            },
            Regularizer::full(ProxTerm::zero(2)),
        )
        .unwrap();
        assert!((s.smooth_lipschitz - 4.0).abs() < 1e-12);
        assert!((s.curvature - 9.0).abs() < 1e-12);
        assert!((s.step(0.5) - 1.0 / (4.0 + 18.0)).abs() < 1e-15);
        assert!(s.step(f64::MIN_POSITIVE / 4.0) > 0.0);
    }

    #[test]
    fn validate_detects_tampering() {
        let mut s = lasso_1d();
        s.curvature = 2.0;
        assert!(s.validate().is_err());
        let mut s = lasso_1d();
        s.dim = 2;
        assert!(matches!(s.validate(), Err(Error::DimensionMismatch { .. })));
    }
}
