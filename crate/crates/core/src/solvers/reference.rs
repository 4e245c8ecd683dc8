//! High-accuracy reference optimum by smoothing continuation.
//!
//! A restarted accelerated proximal-gradient loop is run on `f_μ + h` for a
//! geometrically decreasing sequence of levels `μ`, each stage warm-started
//! from the previous one. For the polyhedral and spectral terms used here,
//! the smoothed problem is well conditioned near its minimizer once the
//! active structure is identified, so each stage converges linearly.

use crate::error::{Error, Result};
use crate::numerics::DenseVector;

use super::objective::ObjectiveSpec;

/// Knobs of the continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub mu_start: f64,
    pub mu_final: f64,
    /// Ratio between consecutive levels.
    pub shrink: f64,
    pub stage_iters: usize,
    /// Extra iterations at the final level.
    pub polish_iters: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            mu_start: 1.0,
            mu_final: 1e-12,
            shrink: 0.1,
            stage_iters: 20_000,
            polish_iters: 100_000,
        }
    }
}

/// Reference point and the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x: DenseVector,
    /// `F(x)`.
    pub f: f64,
    /// Final smoothing level.
    pub mu: f64,
    /// Gradient-mapping norm of `f_μ + h` at `x`, scaled by `1 + ‖x‖`.
    pub residual: f64,
    /// Smoothing bias `μL_f²/2` at the final level.
    pub bias: f64,
    /// Relative suboptimality estimate that was checked against the target.
    pub certificate: f64,
    pub iterations: usize,
}

/// Restarted accelerated proximal gradient at a fixed level; stops when the
/// scaled gradient-mapping norm reaches `tol`.
fn stage(
    spec: &ObjectiveSpec,
    x0: DenseVector,
    mu: f64,
    iters: usize,
    tol: f64,
) -> Result<(DenseVector, f64, usize)> {
    let zeta = spec.step(mu);
    let mut x = x0;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best = f64::INFINITY;
    for it in 0..iters {
        let (g, x_next) = spec.grad_map(&y, mu, zeta)?;
        let res = g.norm() * (1.0 + y.norm());
        best = best.min(res);
        let stalled = zeta * g.norm() <= 4.0 * f64::EPSILON * (1.0 + y.norm());
        if res <= tol || stalled {
            return Ok((x_next, res, it + 1));
        }
        // Gradient restart: drop momentum when the step opposes the motion.
        let opposes = y
            .iter()
            .zip(x_next.iter().zip(x.iter()))
            .map(|(yv, (xn, xo))| (yv - xn) * (xn - xo))
            .sum::<f64>()
            > 0.0;
        let t_next = if opposes { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let w = if opposes { 0.0 } else { (t - 1.0) / t_next };
        y = x_next.iter().zip(x.iter()).map(|(a, b)| a + w * (a - b)).collect();
        if !y.is_finite() {
            return Err(Error::NonFiniteIterate {
                iter: it + 1,
                norm: y.norm(),
            });
        }
        x = x_next;
        t = t_next;
    }
    let (g, _) = spec.grad_map(&x, mu, zeta)?;
    Ok((x.clone(), g.norm() * (1.0 + x.norm()), iters))
}

/// Computes a reference optimum starting from `x0`.
///
/// Stages stop when the gradient-mapping norm (scaled by `1 + ‖x‖`) reaches
/// `target · max(1, |F|)` or when the proximal step stalls at rounding level.
/// The reported certificate is the smoothing bias `μL_f²/2` plus the change
/// of `F` across the last two levels, relative to `max(1, |F|)`; the result is
/// returned when that is at most `target`, else [`Error::NotCertified`].
pub fn run_reference(
    spec: &ObjectiveSpec,
    x0: &[f64],
    target: f64,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    spec.check_point(x0)?;
    if !(target > 0.0) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    if !(opts.mu_start >= opts.mu_final && opts.mu_final > 0.0 && opts.shrink > 0.0 && opts.shrink < 1.0) {
        return Err(Error::InvalidParameter(format!("invalid continuation {opts:?}")));
    }
    let mut x = DenseVector::from(x0);
    let mut mu = opts.mu_start;
    let mut total = 0;
    let mut f_prev = f64::INFINITY;
    loop {
        let last = mu <= opts.mu_final * (1.0 + 1e-12);
        let iters = if last { opts.polish_iters } else { opts.stage_iters };
        let tol = target * spec.value(&x)?.abs().max(1.0);
        let (next, res, used) = stage(spec, x, mu, iters, tol)?;
        x = next;
        total += used;
        let f = spec.value(&x)?;
        if last {
            let scale = f.abs().max(1.0);
            let bias = 0.5 * mu * spec.lipschitz_sq;
            let reached = (bias + (f - f_prev).abs()) / scale;
            if !(reached <= target) {
                return Err(Error::NotCertified { reached, target });
            }
            return Ok(ReferenceSolution {
                x,
                f,
                mu,
                residual: res,
                bias,
                certificate: reached,
                iterations: total,
            });
        }
        f_prev = f;
        mu = (mu * opts.shrink).max(opts.mu_final);
    }
}
