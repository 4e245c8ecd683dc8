//! Non-smoothing baselines: subgradient descent, Chambolle-Pock and
//! linearized ADMM.
//!
//! The trace's `grad_map_norm` column holds each method's own stationarity
//! measure: `‖g_k‖` for subgradient descent, the scaled primal step
//! `‖x_{k+1} − x_k‖/τ` for Chambolle-Pock, and the constraint residual
//! `‖Ax_k − z_k‖` for ADMM. `mu` and `beta` are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};
use crate::prox::{project_l2_ball, project_linf_ball, prox_l1, prox_l2norm};
use crate::smoothing::ResidualNorm;

use super::objective::{NonsmoothPart, ObjectiveSpec, SmoothPart};
use super::trace::{Monitor, SolverState, TraceSink};

/// Subgradient stepsize `t_k` at 0-based iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "scale", rename_all = "snake_case")]
pub enum StepRule {
    /// `c/√(k+1)`
    InvSqrt(f64),
    /// `c/(k+1)`
    Inv(f64),
}

impl StepRule {
    pub fn step(self, k: usize) -> f64 {
        let i = (k + 1) as f64;
        match self {
            StepRule::InvSqrt(c) => c / i.sqrt(),
            StepRule::Inv(c) => c / i,
        }
    }

    fn validate(self) -> Result<()> {
        let (StepRule::InvSqrt(c) | StepRule::Inv(c)) = self;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveStep(c));
        }
        Ok(())
    }
}

fn state(x: DenseVector, y: DenseVector, k: usize, zeta: f64) -> SolverState {
    SolverState {
        x,
        y,
        k,
        mu: 0.0,
        beta: 0.0,
        zeta,
        schedule: None,
    }
}

fn check_budget(iters: usize) -> Result<()> {
    if iters == 0 {
        return Err(Error::InvalidParameter("iteration budget must be >= 1".into()));
    }
    Ok(())
}

/// Subgradient descent, projected when `h` is an indicator. The trace and the
/// returned `y` follow the best iterate seen so far; `x` is the raw iterate.
pub fn run_subgradient(
    spec: &ObjectiveSpec,
    x0: &[f64],
    iters: usize,
    rule: StepRule,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    spec.check_point(x0)?;
    check_budget(iters)?;
    rule.validate()?;
    let project = spec.h.is_indicator();
    let mut monitor = Monitor::new(sink, x0);
    let mut x = DenseVector::from(x0);
    if project {
        x = spec.h.prox(&x, 1.0)?;
    }
    let mut best = x.clone();
    let mut f_best = spec.value(&x)?;
    let mut t = f64::NAN;
    for k in 0..iters {
        let g = spec.subgradient(&x)?;
        t = rule.step(k);
        let mut next = x.clone();
        next.axpy(-t, &g);
        if project {
            next = spec.h.prox(&next, t)?;
        }
        monitor.guard(k + 1, &next)?;
        let f = spec.value(&next)?;
        if f < f_best {
            f_best = f;
            best.copy_from_slice(&next);
        }
        x = next;
        monitor.emit(k + 1, f_best, 0.0, 0.0, t, g.norm(), &x, &best);
    }
    Ok(state(x, best, iters, t))
}

/// `argmin_z w‖z − b‖ + (ρ/2)‖z − v‖²`.
fn prox_residual(v: &[f64], b: &[f64], norm: ResidualNorm, w: f64, rho: f64) -> Result<DenseVector> {
    let shifted: DenseVector = v.iter().zip(b).map(|(a, c)| a - c).collect();
    let p = match norm {
        ResidualNorm::L1 => prox_l1(&shifted, w / rho)?,
        ResidualNorm::L2 => prox_l2norm(&shifted, w / rho)?,
    };
    Ok(p.add(b))
}

/// Chambolle-Pock for `w‖Kx − b‖ + h(x)` with `τ = σ = 1/‖K‖` and
/// over-relaxation 1. Other objective shapes are rejected.
pub fn run_chambolle_pock(
    spec: &ObjectiveSpec,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    spec.check_point(x0)?;
    check_budget(iters)?;
    let Some((k_op, b, norm, w)) = spec.residual() else {
        return Err(Error::Unsupported(
            "Chambolle-Pock needs a residual-norm term composed with a linear map".into(),
        ));
    };
    if !matches!(spec.smooth, SmoothPart::None) {
        return Err(Error::Unsupported(
            "multiple nonsmooth terms; Chambolle-Pock handles w‖Kx − b‖ + h(x) only".into(),
        ));
    }
    let k_norm = spec.curvature.sqrt();
    let (tau, sigma) = if k_norm > 0.0 { (1.0 / k_norm, 1.0 / k_norm) } else { (1.0, 1.0) };
    assert!(tau * sigma * spec.curvature <= 1.0 + 1e-12, "τσ‖K‖² = {}", tau * sigma * spec.curvature);

    let dual_proj = |v: &[f64]| match norm {
        ResidualNorm::L1 => project_linf_ball(v, w),
        ResidualNorm::L2 => project_l2_ball(v, w),
    };
    let mut monitor = Monitor::new(sink, x0);
    let mut x = DenseVector::from(x0);
    let mut x_bar = x.clone();
    let mut u = DenseVector::zeros(k_op.rows());
    for k in 0..iters {
        // Dual prox of the conjugate of w‖· − b‖: shift by σb, project.
        let mut v = k_op.matvec(&x_bar);
        v.axpy(-1.0, b);
        let mut arg = u.clone();
        arg.axpy(sigma, &v);
        u = dual_proj(&arg);
        let mut arg = x.clone();
        arg.axpy(-tau, &k_op.matvec_t(&u));
        let next = spec.h.prox(&arg, tau)?;
        monitor.guard(k + 1, &next)?;
        x_bar = next.iter().zip(x.iter()).map(|(a, c)| 2.0 * a - c).collect();
        let step = next.dist(&x) / tau;
        x = next;
        let f = spec.value(&x)?;
        monitor.emit(k + 1, f, 0.0, 0.0, tau, step, &x, &x);
    }
    Ok(state(x.clone(), x, iters, tau))
}

/// Linearized ADMM on `s(x) + h(x) + g(z)` subject to `Ax − z = 0`, where
/// `g(z) = w‖z − b‖` is the residual term and `s` the smooth part:
///
/// ```text
/// x⁺ = prox_{h/α}(x − (∇s(x) + ρAᵀ(Ax − z + u))/α),   α = L_s + ρ‖A‖²
/// z⁺ = prox_{g/ρ}(Ax⁺ + u)
/// u⁺ = u + Ax⁺ − z⁺
/// ```
///
/// Without a nonsmooth part `A = I` and `g = 0`. Spectral terms have no such
/// splitting and are rejected.
pub fn run_admm(
    spec: &ObjectiveSpec,
    rho: f64,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    spec.check_point(x0)?;
    check_budget(iters)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("ADMM penalty must be positive, got {rho}")));
    }
    let identity;
    let zero_b;
    let (a, b, norm, w, a_norm_sq) = match &spec.nonsmooth {
        NonsmoothPart::Residual { .. } => {
            let (a, b, norm, w) = spec.residual().expect("residual term");
            (a, b, norm, w, spec.curvature)
        }
        NonsmoothPart::None => {
            identity = DenseMatrix::identity(spec.dim);
            zero_b = DenseVector::zeros(spec.dim);
            (&identity, &zero_b, ResidualNorm::L2, 0.0, 1.0)
        }
        NonsmoothPart::SpectralMax { .. } => {
            return Err(Error::Unsupported("ADMM has no two-block splitting for λ_max terms".into()));
        }
    };
    let alpha = spec.smooth_lipschitz + rho * a_norm_sq;
    let mut monitor = Monitor::new(sink, x0);
    let mut x = DenseVector::from(x0);
    let mut ax = a.matvec(&x);
    let mut z = ax.clone();
    let mut u = DenseVector::zeros(z.len());
    for k in 0..iters {
        let (_, gs) = spec.smooth_value_grad(&x);
        let coupling: DenseVector = ax.iter().zip(z.iter().zip(u.iter())).map(|(p, (q, r))| p - q + r).collect();
        let mut grad = gs;
        grad.axpy(rho, &a.matvec_t(&coupling));
        let mut arg = x.clone();
        arg.axpy(-1.0 / alpha, &grad);
        x = spec.h.prox(&arg, 1.0 / alpha)?;
        monitor.guard(k + 1, &x)?;
        ax = a.matvec(&x);
        let v = ax.add(&u);
        z = if w > 0.0 { prox_residual(&v, b, norm, w, rho)? } else { v };
        let r = ax.sub(&z);
        u.axpy(1.0, &r);
        let f = spec.value(&x)?;
        monitor.emit(k + 1, f, 0.0, 0.0, 1.0 / alpha, r.norm(), &x, &x);
    }
    Ok(state(x.clone(), x, iters, 1.0 / alpha))
}

/// Penalties swept by [`run_admm_best`].
pub const ADMM_PENALTIES: [f64; 3] = [0.1, 1.0, 10.0];

/// Runs ADMM for every penalty in `penalties` and returns the one with the
/// lowest final objective together with its trace records.
pub fn run_admm_best<S: TraceSink>(
    spec: &ObjectiveSpec,
    penalties: &[f64],
    x0: &[f64],
    iters: usize,
    make_sink: impl Fn() -> S,
) -> Result<(f64, SolverState, S)> {
    let mut best: Option<(f64, f64, SolverState, S)> = None;
    for &rho in penalties {
        let mut sink = make_sink();
        let st = run_admm(spec, rho, x0, iters, &mut sink)?;
        let f = spec.value(&st.x)?;
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((rho, f, st, sink));
        }
    }
    let (rho, _, st, sink) = best.ok_or_else(|| Error::InvalidParameter("no ADMM penalties given".into()))?;
    Ok((rho, st, sink))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{ProxKind, ProxTerm};
    use crate::solvers::{Regularizer, Trace};

    fn abs_1d() -> ObjectiveSpec {
        ObjectiveSpec::new(
            SmoothPart::None,
            NonsmoothPart::Residual {
                a: DenseMatrix::identity(1),
                b: DenseVector::zeros(1),
                norm: ResidualNorm::L1,
                weight: 1.0,
            },
            Regularizer::full(ProxTerm::zero(1)),
        )
        .unwrap()
    }

    #[test]
    fn subgradient_at_kink_stays() {
        let s = run_subgradient(&abs_1d(), &[0.0], 50, StepRule::InvSqrt(0.1), &mut Trace::new()).unwrap();
        assert_eq!(s.x.0, vec![0.0]);
    }

    #[test]
    fn subgradient_best_so_far() {
        let mut t = Trace::with_reference(0.0);
        let s = run_subgradient(&abs_1d(), &[1.0], 500, StepRule::InvSqrt(0.1), &mut t).unwrap();
        assert!(t.records.windows(2).all(|w| w[1].gap <= w[0].gap));
        assert!(t.records.iter().all(|r| r.objective <= 1.0));
        assert!(s.y[0].abs() <= s.x[0].abs());
        assert!(run_subgradient(&abs_1d(), &[1.0], 5, StepRule::Inv(0.0), &mut Trace::new()).is_err());
    }

    #[test]
    fn projected_subgradient_stays_feasible() {
        let box_term = ProxTerm::new(
            ProxKind::IndicatorBox {
                lo: vec![0.5],
                hi: vec![2.0],
            },
            1.0,
            1,
        )
        .unwrap();
        let spec = ObjectiveSpec::new(SmoothPart::None, abs_1d().nonsmooth, Regularizer::full(box_term)).unwrap();
        let mut t = Trace::new();
        let s = run_subgradient(&spec, &[3.0], 200, StepRule::InvSqrt(1.0), &mut t).unwrap();
        assert!(t.records.iter().all(|r| r.objective.is_finite()));
        assert!((s.y[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chambolle_pock_zero_operator() {
        let spec = ObjectiveSpec::new(
            SmoothPart::None,
            NonsmoothPart::Residual {
                a: DenseMatrix::zeros(2, 2),
                b: vec![3.0, -0.5].into(),
                norm: ResidualNorm::L1,
                weight: 1.0,
            },
            Regularizer::full(ProxTerm::l1(1.0, 2)),
        )
        .unwrap();
        // With K = 0 the dual step only sees −σb, projected onto the ∞-ball.
        let mut t = Trace::new();
        let s = run_chambolle_pock(&spec, &[0.0, 0.0], 5, &mut t).unwrap();
        assert_eq!(s.x.0, vec![0.0, 0.0]);
        assert!(t.records.iter().all(|r| r.objective == 3.5));
    }

    #[test]
    fn chambolle_pock_rejects_three_terms() {
        let spec = ObjectiveSpec::new(
            SmoothPart::Linear { c: vec![1.0].into() },
            abs_1d().nonsmooth,
            Regularizer::full(ProxTerm::zero(1)),
        )
        .unwrap();
        assert!(matches!(
            run_chambolle_pock(&spec, &[0.0], 5, &mut Trace::new()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn admm_empty_objective_projects() {
        let box_term = ProxTerm::new(
            ProxKind::IndicatorBox {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            1.0,
            2,
        )
        .unwrap();
        let spec = ObjectiveSpec::new(SmoothPart::None, NonsmoothPart::None, Regularizer::full(box_term)).unwrap();
        let s = run_admm(&spec, 1.0, &[3.0, 0.25], 1, &mut Trace::new()).unwrap();
        assert_eq!(s.x.0, vec![1.0, 0.25]);
    }

    #[test]
    fn admm_best_of_sweep() {
        let spec = abs_1d();
        let (rho, st, trace) = run_admm_best(&spec, &ADMM_PENALTIES, &[2.0], 200, Trace::new).unwrap();
        assert!(ADMM_PENALTIES.contains(&rho));
        for other in ADMM_PENALTIES {
            let s = run_admm(&spec, other, &[2.0], 200, &mut Trace::new()).unwrap();
            assert!(spec.value(&st.x).unwrap() <= spec.value(&s.x).unwrap());
        }
        assert_eq!(trace.records.len(), 200);
        assert!(run_admm(&spec, 0.0, &[2.0], 1, &mut Trace::new()).is_err());
    }
}
