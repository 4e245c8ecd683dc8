use nsopt_core::numerics::{gaussian, sym_eig};
use nsopt_core::prox::{ProxKind, ProxTerm};
use nsopt_core::schedule::{gamma, momentum_next, mu_next, mu_ratio, schedule_trace, ScheduleParams};
use nsopt_core::smoothing::{
    gradient_mapping, moreau_grad, moreau_value, smoothed_residual_grad, spectral_max_eval, ResidualNorm,
};
use nsopt_core::solvers::relative_gap;
use nsopt_core::{DenseMatrix, DenseVector, SeededRng};
use proptest::prelude::*;

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

fn finite_term() -> impl Strategy<Value = ProxTerm> {
    (0usize..3, 0.0f64..3.0).prop_map(|(k, w)| match k {
        0 => ProxTerm::l1(w, 4),
        1 => ProxTerm::l2norm(w, 4),
        _ => ProxTerm::new(ProxKind::NuclearNorm { rows: 2, cols: 2 }, w, 4).unwrap(),
    })
}

fn any_term() -> impl Strategy<Value = ProxTerm> {
    prop_oneof![
        finite_term(),
        (0.0f64..3.0).prop_map(|w| ProxTerm::new(ProxKind::SquaredL2, w, 4).unwrap()),
        (0.1f64..3.0).prop_map(|w| ProxTerm::new(ProxKind::LinfBall, w, 4).unwrap()),
        (vec_in(4, 2.0), vec_in(4, 2.0)).prop_map(|(a, b)| {
            let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
            let hi: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
            ProxTerm::new(ProxKind::IndicatorBox { lo, hi }, 1.0, 4).unwrap()
        }),
    ]
}

proptest! {
    #[test]
    fn momentum_identity(beta in 1.0f64..1e6) {
        let next = momentum_next(beta);
        prop_assert!(next > beta);
        prop_assert!(((next * next - next) - beta * beta).abs() <= 1e-9 * beta * beta);
        let g = gamma(beta, next);
        prop_assert!(g <= 0.0 && g > -1.0);
    }

    #[test]
    fn coupled_ratio_is_a_contraction(a in 1.1f64..5.0, b in 0.1f64..10.0, beta in 1.0f64..1e4) {
        let p = ScheduleParams::default().with_shape(a, b);
        let next = momentum_next(beta);
        let r = mu_ratio(beta, next, &p).unwrap();
        prop_assert!(r > 0.0 && r <= p.limit_ratio() + 1e-12);
        let m = mu_next(2.0, beta, next, &p).unwrap();
        prop_assert!((m - 2.0 * r).abs() <= 1e-14 * m.max(1.0));
    }

    #[test]
    fn floor_is_respected(c in 1e-6f64..1e-1, len in 2usize..300) {
        let p = ScheduleParams::default().with_floor(c);
        let (mus, betas) = schedule_trace(&p, len).unwrap();
        prop_assert!(mus.iter().all(|m| *m >= c));
        prop_assert!(mus.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(betas.iter().enumerate().all(|(k, b)| *b >= k as f64 / 2.0));
    }

    #[test]
    fn prox_is_optimal_against_perturbations(term in any_term(), x in vec_in(4, 5.0), t in 0.05f64..3.0,
                                             d in vec_in(4, 1.0), s in 1e-4f64..1.0) {
        // p = prox_{t g}(x) minimizes g(·) + ‖· − x‖²/(2t); any feasible z does no better.
        let p = term.prox(&x, t).unwrap();
        let phi = |z: &[f64]| term.value(z) + DenseVector::from(z).dist(&x).powi(2) / (2.0 * t);
        let z: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + s * b).collect();
        let z = if term.is_indicator() { term.prox(&z, 1.0).unwrap().into_inner() } else { z };
        prop_assert!(phi(&p) <= phi(&z) + 1e-9 * phi(&z).abs().max(1.0));
    }

    #[test]
    fn prox_is_nonexpansive(term in any_term(), x in vec_in(4, 5.0), y in vec_in(4, 5.0), t in 0.05f64..3.0) {
        let px = term.prox(&x, t).unwrap();
        let py = term.prox(&y, t).unwrap();
        prop_assert!(px.dist(&py) <= DenseVector::from(x.as_slice()).dist(&y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn moreau_sandwich(term in finite_term(), x in vec_in(4, 10.0), mu in 1e-3f64..5.0) {
        let f = term.value(&x);
        let fm = moreau_value(&term, &x, mu).unwrap();
        let lf_sq = term.lipschitz_sq().unwrap();
        prop_assert!(fm <= f + 1e-9);
        prop_assert!(f <= fm + 0.5 * mu * lf_sq + 1e-9);
    }

    #[test]
    fn moreau_gradient_is_lipschitz(term in finite_term(), x in vec_in(4, 5.0), y in vec_in(4, 5.0), mu in 1e-2f64..5.0) {
        let gx = moreau_grad(&term, &x, mu).unwrap();
        let gy = moreau_grad(&term, &y, mu).unwrap();
        let d = DenseVector::from(x.as_slice()).dist(&y);
        prop_assert!(gx.dist(&gy) <= d / mu + 1e-9);
    }

    #[test]
    fn residual_smoothing_sandwich(seed in 0u64..10_000, mu in 1e-3f64..5.0, l2 in any::<bool>()) {
        let mut rng = SeededRng::new(seed);
        let a = gaussian(&mut rng, 5, 3);
        let b: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let x: Vec<f64> = (0..3).map(|_| 3.0 * rng.normal()).collect();
        let norm = if l2 { ResidualNorm::L2 } else { ResidualNorm::L1 };
        let (v, _) = smoothed_residual_grad(&a, &b, &x, mu, norm).unwrap();
        let f = norm.eval(&a.matvec(&x).sub(&b));
        prop_assert!(v <= f + 1e-9);
        prop_assert!(f <= v + 0.5 * mu * norm.lipschitz_sq(5) + 1e-9);
    }

    #[test]
    fn spectral_gradient_is_a_density(seed in 0u64..10_000, n in 2usize..8, mu in 1e-3f64..10.0) {
        let mut rng = SeededRng::new(seed);
        let g = gaussian(&mut rng, n, n);
        let x = DenseMatrix::from_fn(n, n, |i, j| g.get(i, j) + g.get(j, i));
        let e = spectral_max_eval(&x, mu).unwrap();
        let grad = e.gradient();
        prop_assert!((grad.trace() - 1.0).abs() <= 1e-10);
        let spec = sym_eig(&grad).unwrap();
        prop_assert!(*spec.values.last().unwrap() >= -1e-10);
        // Log-sum-exp overestimates λ_max by at most μ log n.
        let top = e.eig.values[0];
        prop_assert!(e.value >= top - 1e-12 && e.value <= top + mu * (n as f64).ln() + 1e-12);
    }

    #[test]
    fn gradient_mapping_fixed_point(x in vec_in(3, 2.0), zeta in 0.01f64..2.0, w in 0.0f64..2.0) {
        let h = ProxTerm::l1(w, 3);
        let grad = |v: &[f64]| Ok(DenseVector::from(v));
        let g = gradient_mapping(grad, &h, &x, zeta).unwrap();
        let p: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a - zeta * b).collect();
        let w_pt: Vec<f64> = x.iter().map(|v| v - zeta * v).collect();
        let direct = h.prox(&w_pt, zeta).unwrap();
        prop_assert!(direct.dist(&p) <= 1e-12);
    }

    #[test]
    fn gap_is_nonnegative_and_scale_free(f in -1e6f64..1e6, r in -1e6f64..1e6, s in 2.0f64..100.0) {
        let g = relative_gap(f, r);
        prop_assert!(g >= 0.0);
        if r.abs() >= 1.0 {
            prop_assert!((relative_gap(s * f, s * r) - g).abs() <= 1e-9 * g.max(1.0));
        }
    }
}
