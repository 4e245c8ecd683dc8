//! Runtime audit of the adaptive method's optimality-gap bound and of the
//! per-iteration Lyapunov inequality behind it.
//!
//! With `δ_k = f_{μ_k}(y_k) + h(y_k) − F*`, `u_k = β_k x_k − (β_k − 1)y_k − x*`,
//! `ω_k = μ_{k+1}/μ_k` and `κ = ab − b + a`, every iteration `k ≥ 1` satisfies
//!
//! ```text
//! ζ_k β_k² δ_{k+1} − ζ_{k−1} β_{k−1}² δ_k
//!   − (1 − ω_{k−1}) κ (μ_{k−1}/2) L_f² ζ_{k−1} β_{k−1}²
//!   + (1 − ω_k) κ (μ_k/2) L_f² ζ_k β_k²  ≤  (‖u_k‖² − ‖u_{k+1}‖²)/2
//! ```
//!
//! and summing gives `F(y_{T+1}) − F* ≤ L_f² μ_{T+1}/2 + E/(2 ζ_T β_T²)` with
//! `E = ‖u_1‖² + ζ_0 β_0² δ_1 + (1 − ω_0) κ (μ_0/2) L_f² ζ_0 β_0²`.
//! Since `ζ_T = μ_{T+1}/L_A` when there is no smooth part, the second term is
//! `E·L_A/(2 β_T² μ_{T+1})`.

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::schedule::ScheduleParams;

use super::objective::ObjectiveSpec;
use super::trace::Trace;

/// Relative slack applied to both inequalities.
pub const AUDIT_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Bound7Report {
    pub e: f64,
    pub u1_sq: f64,
    pub delta1: f64,
    /// Largest `(F(y_{T+1}) − F*)/bound` over the audited `T`.
    pub max_bound_ratio: f64,
    /// Number of `T` at which the bound was checked.
    pub bound_checks: usize,
    /// Number of `k` at which the Lyapunov inequality was checked.
    pub lyapunov_checks: usize,
    pub lipschitz: f64,
    pub curvature: f64,
}

impl Bound7Report {
    /// Iteration count `2L_f√E/ε` after which the gap is at most `ε`, and the
    /// same count with the curvature factor, `2L_f√(E·L_A)/ε`.
    pub fn iteration_bounds(&self, eps: f64) -> (f64, f64) {
        let t = 2.0 * self.lipschitz * self.e.sqrt() / eps;
        (t, t * self.curvature.sqrt())
    }
}

/// First record index `T` (the trace's `iter`) with `F(y_T) − F* ≤ ε`.
pub fn first_within(trace: &Trace, f_star: f64, eps: f64) -> Option<usize> {
    trace
        .records
        .iter()
        .find(|r| r.objective - f_star <= eps)
        .map(|r| r.iter)
}

fn within(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + AUDIT_SLACK * scale.max(1e-300)
}

/// Checks the gap bound at every `T` and the Lyapunov inequality at every
/// `k` covered by `trace`, which must come from the adaptive method run with
/// `params` and keep its iterates.
pub fn audit_bound7(
    trace: &Trace,
    spec: &ObjectiveSpec,
    x_star: &[f64],
    f_star: f64,
    params: &ScheduleParams,
) -> Result<Bound7Report> {
    params.validate()?;
    spec.check_point(x_star)?;
    let n = trace.records.len();
    if n < 2 || trace.xs.len() != n || trace.ys.len() != n {
        return Err(Error::InvalidParameter(
            "bound audit needs at least two records with kept iterates".into(),
        ));
    }
    let kappa = params.a * params.b - params.b + params.a;
    let lf_sq = spec.lipschitz_sq;

    // Index k of these vectors means x_k, y_k, μ_k, β_k, ζ_k; index 0 holds the
    // initial values and y_0 = x_0 is never needed.
    let mut mu = vec![params.mu0];
    let mut beta = vec![params.beta0];
    let mut zeta = Vec::with_capacity(n);
    for r in &trace.records {
        mu.push(r.mu);
        beta.push(r.beta);
        zeta.push(r.stepsize);
    }
    let x = |k: usize| &trace.xs[k - 1];
    let y = |k: usize| &trace.ys[k - 1];
    let u = |k: usize| -> DenseVector {
        x(k).iter()
            .zip(y(k).iter().zip(x_star))
            .map(|(xv, (yv, s))| beta[k] * xv - (beta[k] - 1.0) * yv - s)
            .collect()
    };
    let delta = |k: usize| -> Result<f64> { Ok(spec.smoothed_value(y(k), mu[k])? - f_star) };
    let omega = |k: usize| mu[k + 1] / mu[k];
    let damp = |k: usize| (1.0 - omega(k)) * kappa * 0.5 * mu[k] * lf_sq * zeta[k] * beta[k] * beta[k];

    let u1_sq = u(1).norm_sq();
    let delta1 = delta(1)?;
    let e = u1_sq + zeta[0] * beta[0] * beta[0] * delta1 + damp(0);

    let mut max_ratio = f64::NEG_INFINITY;
    let mut bound_checks = 0;
    let mut lyapunov_checks = 0;
    let mut u_k = u(1);
    let mut delta_k = delta1;
    // Record k+1 exists for k = 1..n−1.
    for k in 1..n {
        let u_next = u(k + 1);
        let delta_next = delta(k + 1)?;
        let lhs = zeta[k] * beta[k] * beta[k] * delta_next - zeta[k - 1] * beta[k - 1] * beta[k - 1] * delta_k
            - damp(k - 1)
            + damp(k);
        let rhs = 0.5 * (u_k.norm_sq() - u_next.norm_sq());
        let scale = zeta[k] * beta[k] * beta[k] * delta_next.abs() + u_k.norm_sq() + e;
        if !within(lhs, rhs, scale) {
            return Err(Error::AuditFailure {
                check: "lyapunov",
                index: k,
                detail: format!("lhs {lhs:e} > rhs {rhs:e}"),
            });
        }
        lyapunov_checks += 1;

        let gap = trace.records[k].objective - f_star;
        let bound = 0.5 * lf_sq * mu[k + 1] + e / (2.0 * zeta[k] * beta[k] * beta[k]);
        if !within(gap, bound, bound.abs().max(f_star.abs())) {
            return Err(Error::AuditFailure {
                check: "bound7",
                index: k,
                detail: format!("F(y_{{T+1}}) − F* = {gap:e} exceeds {bound:e}"),
            });
        }
        max_ratio = max_ratio.max(gap / bound);
        bound_checks += 1;
        u_k = u_next;
        delta_k = delta_next;
    }
    Ok(Bound7Report {
        e,
        u1_sq,
        delta1,
        max_bound_ratio: max_ratio,
        bound_checks,
        lyapunov_checks,
        lipschitz: lf_sq.sqrt(),
        curvature: spec.curvature,
    })
}
