//! Accelerated proximal-gradient loops on the smoothed objective: the
//! adaptive method with coupled smoothing, and two fixed-rule baselines.

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::schedule::{gamma, momentum_next, ScheduleParams, ScheduleState};

use super::objective::ObjectiveSpec;
use super::trace::{Monitor, SolverState, TraceSink};

/// Smallest smoothing level handed to the oracles. With `c = 0` the coupled
/// recursion decays geometrically and would otherwise reach zero after about
/// a thousand iterations.
pub const MU_FLOOR: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy)]
enum Smoothing<'p> {
    Coupled(&'p ScheduleParams),
    Fixed(f64),
    Harmonic(f64),
}

fn accelerated(
    spec: &ObjectiveSpec,
    rule: Smoothing<'_>,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    spec.check_point(x0)?;
    if iters == 0 {
        return Err(Error::InvalidParameter("iteration budget must be >= 1".into()));
    }
    let mut schedule = match rule {
        Smoothing::Coupled(p) => Some(ScheduleState::initial(p)?),
        Smoothing::Fixed(mu) | Smoothing::Harmonic(mu) => {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidParameter(format!("smoothing level {mu}")));
            }
            None
        }
    };
    let mut monitor = Monitor::new(sink, x0);
    let mut x = DenseVector::from(x0);
    let mut y = x.clone();
    let mut beta = schedule.map_or(1.0, |s| s.beta);
    let (mut mu, mut zeta) = (f64::NAN, f64::NAN);

    for k in 0..iters {
        let (beta_next, gamma_k, mu_next) = match (rule, schedule.as_mut()) {
            (Smoothing::Coupled(p), Some(state)) => {
                let (step, next) = state.advance(p)?;
                *state = next;
                (step.beta_next, step.gamma, step.mu_next)
            }
            (Smoothing::Fixed(m), _) => {
                let b = momentum_next(beta);
                (b, gamma(beta, b), m)
            }
            (Smoothing::Harmonic(m0), _) => {
                let b = momentum_next(beta);
                (b, gamma(beta, b), m0 / (k + 2) as f64)
            }
            (Smoothing::Coupled(_), None) => unreachable!("coupled rule always carries a schedule"),
        };
        mu = mu_next.max(MU_FLOOR);
        zeta = spec.step(mu);
        // y_{k+1} = x_k − ζ_k G(x_k) is exactly the prox point.
        let (g, y_next) = spec.grad_map(&x, mu, zeta)?;
        let x_next: DenseVector = y_next
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (1.0 - gamma_k) * a + gamma_k * b)
            .collect();
        monitor.guard(k + 1, &x_next)?;
        let objective = spec.value(&y_next)?;
        monitor.emit(k + 1, objective, mu, beta_next, zeta, g.norm(), &x_next, &y_next);
        x = x_next;
        y = y_next;
        beta = beta_next;
    }
    Ok(SolverState {
        x,
        y,
        k: iters,
        mu,
        beta,
        zeta,
        schedule,
    })
}

/// Adaptive accelerated smoothing: momentum `β_k`, smoothing `μ_k` from the
/// coupled recursion, stepsize `ζ_k = 1/(L_s + L_A/μ_{k+1})`.
pub fn run_alg1(
    spec: &ObjectiveSpec,
    params: &ScheduleParams,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    accelerated(spec, Smoothing::Coupled(params), x0, iters, sink)
}

/// Nesterov's accelerated method on `f_μ + h` with the fixed level
/// `μ = 2ε/L_f²`.
pub fn run_nesterov_smoothing(
    spec: &ObjectiveSpec,
    eps: f64,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("target accuracy must be positive, got {eps}")));
    }
    let lf_sq = if spec.lipschitz_sq > 0.0 { spec.lipschitz_sq } else { 1.0 };
    accelerated(spec, Smoothing::Fixed(2.0 * eps / lf_sq), x0, iters, sink)
}

/// Decoupled decreasing smoothing `μ_k = μ₀/(k+1)` inside the same
/// accelerated loop; a stand-in for the adaptive rule of Tran-Dinh.
pub fn run_tran_dinh(
    spec: &ObjectiveSpec,
    mu0: f64,
    x0: &[f64],
    iters: usize,
    sink: &mut dyn TraceSink,
) -> Result<SolverState> {
    accelerated(spec, Smoothing::Harmonic(mu0), x0, iters, sink)
}

/// Initial smoothing level `‖B‖·‖x₀ − x_ref‖/√(3L_f²)` with `‖B‖² = L_A`;
/// `None` when it would not be a positive finite number.
pub fn auto_mu0(spec: &ObjectiveSpec, x0: &[f64], x_ref: &[f64]) -> Option<f64> {
    let d = crate::numerics::norm(&x0.iter().zip(x_ref).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mu0 = spec.curvature.sqrt() * d / (3.0 * spec.lipschitz_sq).sqrt();
    (mu0 > 0.0 && mu0.is_finite()).then_some(mu0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DenseMatrix;
    use crate::prox::ProxTerm;
    use crate::smoothing::ResidualNorm;
    use crate::solvers::{NonsmoothPart, Regularizer, SmoothPart, Trace};

    fn quadratic() -> ObjectiveSpec {
        ObjectiveSpec::new(
            SmoothPart::Quadratic {
                p: DenseMatrix::from_diag(&[2.0, 1.0]),
                q: vec![-1.0, 1.0].into(),
                r: 0.0,
            },
            NonsmoothPart::None,
            Regularizer::full(ProxTerm::zero(2)),
        )
        .unwrap()
    }

    #[test]
    fn one_step_is_gradient_step() {
        let spec = quadratic();
        let x0 = [1.0, 1.0];
        let (_, g) = spec.smooth_value_grad(&x0);
        let zeta = spec.step(1.0);
        let expected: Vec<f64> = x0.iter().zip(g.iter()).map(|(x, g)| x - zeta * g).collect();
        for run in [
            run_alg1(&spec, &ScheduleParams::default(), &x0, 1, &mut Trace::new()).unwrap(),
            run_nesterov_smoothing(&spec, 1e-3, &x0, 1, &mut Trace::new()).unwrap(),
            run_tran_dinh(&spec, 1.0, &x0, 1, &mut Trace::new()).unwrap(),
        ] {
            assert_eq!(run.y.0, expected);
            assert_eq!(run.x.0, expected);
        }
    }

    fn l1_only(n: usize) -> ObjectiveSpec {
        ObjectiveSpec::new(
            SmoothPart::None,
            NonsmoothPart::Residual {
                a: DenseMatrix::identity(n),
                b: DenseVector::zeros(n),
                norm: ResidualNorm::L1,
                weight: 1.0,
            },
            Regularizer::full(ProxTerm::l1(0.0, n)),
        )
        .unwrap()
    }

    #[test]
    fn optimum_is_fixed_point() {
        let spec = l1_only(3);
        let s = run_alg1(&spec, &ScheduleParams::default(), &[0.0; 3], 50, &mut Trace::new()).unwrap();
        assert_eq!(s.x.0, vec![0.0; 3]);
        assert_eq!(s.y.0, vec![0.0; 3]);
    }

    #[test]
    fn trace_columns() {
        let spec = l1_only(2);
        let mut t = Trace::with_reference(0.0);
        run_nesterov_smoothing(&spec, 1e-3, &[1.0, -2.0], 20, &mut t).unwrap();
        assert!(t.records.iter().all(|r| r.mu == 1e-3));
        assert!(t.records.windows(2).all(|w| w[1].iter == w[0].iter + 1));
        let mut t = Trace::new();
        run_tran_dinh(&spec, 3.0, &[1.0, -2.0], 20, &mut t).unwrap();
        for r in &t.records {
            assert_eq!(r.mu, 3.0 / (r.iter + 1) as f64);
            assert!(r.gap.is_nan());
        }
    }

    #[test]
    fn floor_keeps_stepsize_positive() {
        let spec = l1_only(2);
        let mut t = Trace::new();
        let s = run_alg1(&spec, &ScheduleParams::default(), &[1.0, -2.0], 1200, &mut t).unwrap();
        assert_eq!(s.mu, MU_FLOOR);
        assert!(t.records.iter().all(|r| r.stepsize > 0.0 && r.objective.is_finite()));
    }

    #[test]
    fn divergence_guard_trips() {
        // A linear objective is unbounded below.
        let spec = ObjectiveSpec::new(
            SmoothPart::Linear {
                c: vec![1.0].into(),
            },
            NonsmoothPart::None,
            Regularizer::full(ProxTerm::zero(1)),
        )
        .unwrap();
        let err = run_nesterov_smoothing(&spec, 1e10, &[0.0], 100_000, &mut Trace::new());
        assert!(matches!(err, Err(Error::NonFiniteIterate { .. })));
    }
}
