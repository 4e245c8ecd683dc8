//! Smooth surrogates of nonsmooth terms and the proximal gradient mapping.
//!
//! For a prox-friendly `f` the Moreau envelope
//! `f_μ(x) = min_y f(y) + ‖y − x‖²/(2μ)` is `1/μ`-smooth with
//! `∇f_μ(x) = (x − prox_{μf}(x))/μ` and satisfies
//! `f_μ ≤ f ≤ f_μ + μ L_f²/2`. Residual norms `‖Ax − b‖` are smoothed through
//! their dual-ball representation, and `λ_max` through log-sum-exp of the
//! spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, DenseMatrix, DenseVector, SymEig};
use crate::prox::{project_l2_ball, project_linf_ball, ProxKind, ProxTerm};

/// Absolute slack used by [`uniform_bound_check`].
pub const SANDWICH_SLACK: f64 = 1e-9;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("smoothing level must be positive, got {mu}")))
    }
}

/// Moreau envelope value `f(p) + ‖p − x‖²/(2μ)` with `p = prox_{μf}(x)`.
pub fn moreau_value(term: &ProxTerm, x: &[f64], mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let p = term.prox(x, mu)?;
    let fp = if term.is_indicator() { 0.0 } else { term.value(&p) };
    Ok(fp + p.dist(x).powi(2) / (2.0 * mu))
}

/// Moreau envelope gradient `(x − prox_{μf}(x))/μ`.
///
/// The ℓ1 and ℓ2 cases use the equivalent closed forms (clamp and radial
/// projection of `x/μ`), which avoid the cancellation in `x − prox` when
/// `μ ≪ |x|`.
pub fn moreau_grad(term: &ProxTerm, x: &[f64], mu: f64) -> Result<DenseVector> {
    check_mu(mu)?;
    let w = term.weight;
    match term.kind {
        ProxKind::Zero => Ok(DenseVector::zeros(x.len())),
        ProxKind::L1 => Ok(x.iter().map(|v| (v / mu).clamp(-w, w)).collect()),
        ProxKind::L2Norm => {
            let scaled: Vec<f64> = x.iter().map(|v| v / mu).collect();
            Ok(project_l2_ball(&scaled, w))
        }
        _ => {
            let p = term.prox(x, mu)?;
            Ok(x.iter().zip(p.iter()).map(|(a, b)| (a - b) / mu).collect())
        }
    }
}

/// Which dual ball smooths a residual norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualNorm {
    /// `‖r‖₁ = max { ⟨y, r⟩ : ‖y‖_∞ ≤ 1 }`
    L1,
    /// `‖r‖₂ = max { ⟨y, r⟩ : ‖y‖₂ ≤ 1 }`
    L2,
}

impl ResidualNorm {
    pub fn eval(self, r: &[f64]) -> f64 {
        match self {
            ResidualNorm::L1 => r.iter().map(|v| v.abs()).sum(),
            ResidualNorm::L2 => crate::numerics::norm(r),
        }
    }

    /// Dual-ball maximizer of `⟨y, r⟩ − (μ/2)‖y‖²`.
    pub fn dual_point(self, r: &[f64], mu: f64) -> DenseVector {
        match self {
            ResidualNorm::L1 => {
                let scaled: Vec<f64> = r.iter().map(|v| v / mu).collect();
                project_linf_ball(&scaled, 1.0)
            }
            ResidualNorm::L2 => {
                // Normalizing by max(‖r‖, μ) avoids overflow of r/μ for tiny μ.
                let n = crate::numerics::norm(r).max(mu);
                r.iter().map(|v| v / n).collect()
            }
        }
    }

    /// `L_f²` of the norm on ℝᵐ.
    pub fn lipschitz_sq(self, m: usize) -> f64 {
        match self {
            ResidualNorm::L1 => m as f64,
            ResidualNorm::L2 => 1.0,
        }
    }
}

/// Smoothed `‖Ax − b‖` as `(value, gradient)`.
///
/// The dual solution is `y* = proj_ball((Ax − b)/μ)`; the value is
/// `⟨y*, Ax − b⟩ − (μ/2)‖y*‖²` and the gradient `Aᵀ y*`.
pub fn smoothed_residual_grad(
    a: &DenseMatrix,
    b: &[f64],
    x: &[f64],
    mu: f64,
    norm: ResidualNorm,
) -> Result<(f64, DenseVector)> {
    check_mu(mu)?;
    if a.cols() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "residual operator columns",
            expected: a.cols(),
            found: x.len(),
        });
    }
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "residual offset length",
            expected: a.rows(),
            found: b.len(),
        });
    }
    let r = a.matvec(x).sub(b);
    let y = norm.dual_point(&r, mu);
    let value = y.dot(&r) - 0.5 * mu * y.norm_sq();
    Ok((value, a.matvec_t(&y)))
}

/// Log-sum-exp smoothing of `λ_max` evaluated at one matrix.
#[derive(Debug, Clone)]
pub struct SpectralEval {
    pub value: f64,
    /// Softmax weights of the eigenvalues, aligned with `eig.values`.
    pub weights: DenseVector,
    pub eig: SymEig,
}

impl SpectralEval {
    /// `Q diag(w) Qᵀ`.
    pub fn gradient(&self) -> DenseMatrix {
        let q = &self.eig.vectors;
        let n = q.rows();
        let mut g = DenseMatrix::zeros(n, n);
        for (k, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for i in 0..n {
                let qi = q.get(i, k) * w;
                for j in 0..n {
                    g.set(i, j, g.get(i, j) + qi * q.get(j, k));
                }
            }
        }
        g
    }

    /// Diagonal of the gradient, `Σ_k w_k q_ik²`.
    pub fn gradient_diag(&self) -> DenseVector {
        let q = &self.eig.vectors;
        (0..q.rows())
            .map(|i| {
                self.weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * q.get(i, k) * q.get(i, k))
                    .sum()
            })
            .collect()
    }
}

/// `μ log Σ exp(λ_i/μ)` computed with a max shift, plus its softmax weights.
pub fn spectral_max_eval(x: &DenseMatrix, mu: f64) -> Result<SpectralEval> {
    check_mu(mu)?;
    let eig = sym_eig(x)?;
    let top = eig.values[0];
    let exps: Vec<f64> = eig.values.iter().map(|l| ((l - top) / mu).exp()).collect();
    let total: f64 = exps.iter().sum();
    let value = top + mu * total.ln();
    let weights = exps.iter().map(|e| e / total).collect();
    Ok(SpectralEval {
        value,
        weights,
        eig,
    })
}

/// `(f_μ(X), ∇f_μ(X))` for the log-sum-exp smoothing of `λ_max`.
pub fn spectral_max_value_grad(x: &DenseMatrix, mu: f64) -> Result<(f64, DenseMatrix)> {
    let e = spectral_max_eval(x, mu)?;
    Ok((e.value, e.gradient()))
}

/// Gradient mapping `(x − prox_{ζh}(x − ζ∇f(x)))/ζ`.
pub fn gradient_mapping<F>(grad_f: F, h: &ProxTerm, x: &[f64], zeta: f64) -> Result<DenseVector>
where
    F: FnOnce(&[f64]) -> Result<DenseVector>,
{
    if !(zeta > 0.0) {
        return Err(Error::NonPositiveStep(zeta));
    }
    let g = grad_f(x)?;
    if matches!(h.kind, ProxKind::Zero) {
        return Ok(g);
    }
    let mut w = DenseVector::from(x);
    w.axpy(-zeta, &g);
    let p = h.prox(&w, zeta)?;
    Ok(x.iter().zip(p.iter()).map(|(a, b)| (a - b) / zeta).collect())
}

/// Checks `f_μ(x) ≤ f(x) ≤ f_μ(x) + μL_f²/2` with absolute slack `1e-9`.
pub fn uniform_bound_check(term: &ProxTerm, x: &[f64], mu: f64) -> Result<(bool, bool)> {
    let lf_sq = term.lipschitz_sq().ok_or(Error::UnboundedLipschitz)?;
    let fm = moreau_value(term, x, mu)?;
    let f = term.value(x);
    Ok((fm <= f + SANDWICH_SLACK, f <= fm + 0.5 * mu * lf_sq + SANDWICH_SLACK))
}

/// A prox term paired with a smoothing level and the curvature scale of the
/// linear map it is composed with.
#[derive(Debug, Clone)]
pub struct SmoothedTerm {
    pub base: ProxTerm,
    pub mu: f64,
    pub curvature_scale: f64,
}

impl SmoothedTerm {
    pub fn new(base: ProxTerm, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(SmoothedTerm {
            base,
            mu,
            curvature_scale: 1.0,
        })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        moreau_value(&self.base, x, self.mu)
    }

    pub fn grad(&self, x: &[f64]) -> Result<DenseVector> {
        moreau_grad(&self.base, x, self.mu)
    }

    /// Lipschitz constant of the gradient.
    pub fn smoothness(&self) -> f64 {
        self.curvature_scale / self.mu
    }
}

/// Log-sum-exp smoothing of `λ_max` on `n × n` symmetric matrices.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSmoothedMax {
    pub mu: f64,
    pub n: usize,
}

impl SpectralSmoothedMax {
    pub fn eval(&self, x: &DenseMatrix) -> Result<SpectralEval> {
        spectral_max_eval(x, self.mu)
    }

    /// `L_f² = 2 log n`.
    pub fn lipschitz_sq(&self) -> f64 {
        2.0 * (self.n as f64).ln()
    }

    /// Worst-case overestimate of `λ_max`: `μ log n`.
    pub fn max_bias(&self) -> f64 {
        self.mu * (self.n as f64).ln()
    }
}
