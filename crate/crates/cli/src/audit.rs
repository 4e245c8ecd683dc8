//! Seeded invariant suites behind `nsopt audit`.

use clap::ValueEnum;
use nsopt_core::numerics::{gaussian, sym_eig, DenseMatrix};
use nsopt_core::problems::{gen_lasso, DEFAULT_START_SEED};
use nsopt_core::prox::{ProxKind, ProxTerm};
use nsopt_core::schedule::{momentum_next, mu_rate_audit, schedule_trace, ScheduleParams};
use nsopt_core::smoothing::{
    moreau_grad, moreau_value, smoothed_residual_grad, spectral_max_eval, uniform_bound_check, ResidualNorm,
};
use nsopt_core::solvers::{
    audit_bound7, auto_mu0, first_within, run_alg1, run_reference, ReferenceOptions, Trace,
};
use nsopt_core::{DenseVector, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditSuite {
    Schedule,
    Smoothing,
    Prox,
    Bound7,
    TailRate,
    All,
}

/// Passing detail, or the first counterexample.
type Check = Result<String, String>;

type Checks = Vec<(&'static str, fn(u64) -> Check)>;

/// Runs the suite, printing one line per invariant; returns the failure count.
pub fn audit(suite: AuditSuite, seed: u64) -> usize {
    let checks: Checks = match suite {
        AuditSuite::Schedule => schedule_checks(),
        AuditSuite::Smoothing => smoothing_checks(),
        AuditSuite::Prox => prox_checks(),
        AuditSuite::Bound7 => vec![("bound7 on seeded l1-l1 lasso", bound7)],
        AuditSuite::TailRate => vec![("tail rate on seeded l1-l1 lasso", tail_rate)],
        AuditSuite::All => {
            let mut all = schedule_checks();
            all.extend(smoothing_checks());
            all.extend(prox_checks());
            all.push(("bound7 on seeded l1-l1 lasso", bound7));
            all.push(("tail rate on seeded l1-l1 lasso", tail_rate));
            all
        }
    };
    let mut failures = 0;
    for (name, check) in checks {
        match check(seed) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(counter) => {
                failures += 1;
                println!("FAIL {name}: {counter}");
            }
        }
    }
    failures
}

fn schedule_checks() -> Checks {
    vec![
        ("momentum identity", momentum_identity),
        ("momentum growth beta_k >= k/2", momentum_growth),
        ("mu ratio bounds", mu_rate),
        ("floor respected", floor),
    ]
}

fn smoothing_checks() -> Checks {
    vec![
        ("moreau sandwich", moreau_sandwich),
        ("residual sandwich", residual_sandwich),
        ("moreau gradient vs finite differences", moreau_fd),
        ("spectral gradient is a density", spectral_density),
    ]
}

fn prox_checks() -> Checks {
    vec![("prox optimality", prox_optimality), ("prox nonexpansive", prox_nonexpansive)]
}

fn momentum_identity(_seed: u64) -> Check {
    let mut beta = 1.0f64;
    for k in 0..100_000 {
        let next = momentum_next(beta);
        let err = ((next * next - next) - beta * beta).abs() / (beta * beta);
        if err > 1e-9 {
            return Err(format!("k = {k}: beta = {beta}, relative error {err:e}"));
        }
        beta = next;
    }
    Ok("1e5 steps, relative error <= 1e-9".into())
}

fn momentum_growth(_seed: u64) -> Check {
    let mut beta = 1.0f64;
    for k in 0..=100_000usize {
        if beta < k as f64 / 2.0 {
            return Err(format!("k = {k}: beta = {beta}"));
        }
        beta = momentum_next(beta);
    }
    Ok("1e5 steps".into())
}

fn random_shapes(seed: u64) -> Vec<ScheduleParams> {
    let mut rng = SeededRng::new(seed);
    let mut out = vec![ScheduleParams::default()];
    for _ in 0..8 {
        out.push(
            ScheduleParams::default()
                .with_shape(rng.uniform_in(1.2, 4.0), rng.uniform_in(0.2, 20.0))
                .with_mu0(rng.uniform_in(0.01, 10.0)),
        );
    }
    out
}

fn mu_rate(seed: u64) -> Check {
    for p in random_shapes(seed) {
        let (mus, betas) = schedule_trace(&p, 10_000).map_err(|e| e.to_string())?;
        mu_rate_audit(&mus, &betas, &p).map_err(|e| format!("(a, b, mu0) = ({}, {}, {}): {e}", p.a, p.b, p.mu0))?;
    }
    Ok("9 shapes, 1e4 steps each".into())
}

fn floor(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for p in random_shapes(seed) {
        let p = p.with_floor(rng.uniform_in(1e-6, 1e-1));
        let (mus, _) = schedule_trace(&p, 2000).map_err(|e| e.to_string())?;
        if let Some(k) = mus.iter().position(|m| *m < p.c) {
            return Err(format!("c = {}: mu_{k} = {}", p.c, mus[k]));
        }
        if let Some(k) = mus.windows(2).position(|w| w[1] > w[0]) {
            return Err(format!("c = {}: mu increases at {k}", p.c));
        }
    }
    Ok("9 shapes, 2000 steps each".into())
}

fn terms(rng: &mut SeededRng) -> Vec<ProxTerm> {
    let w = rng.uniform_in(0.1, 3.0);
    vec![
        ProxTerm::l1(w, 6),
        ProxTerm::l2norm(w, 6),
        ProxTerm::new(ProxKind::NuclearNorm { rows: 2, cols: 3 }, w, 6).expect("valid term"),
    ]
}

fn point(rng: &mut SeededRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.normal()).collect()
}

fn moreau_sandwich(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..300 {
        let mu = rng.uniform_in(1e-3, 5.0);
        let x = point(&mut rng, 6, 3.0);
        for term in terms(&mut rng) {
            let (lower, upper) = uniform_bound_check(&term, &x, mu).map_err(|e| e.to_string())?;
            if !(lower && upper) {
                return Err(format!("case {i}: {:?} at x = {x:?}, mu = {mu}", term.kind));
            }
        }
    }
    Ok("900 cases".into())
}

fn residual_sandwich(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..300 {
        let a = gaussian(&mut rng, 7, 5);
        let b = point(&mut rng, 7, 1.0);
        let x = point(&mut rng, 5, 3.0);
        let mu = rng.uniform_in(1e-3, 5.0);
        for norm in [ResidualNorm::L1, ResidualNorm::L2] {
            let (v, _) = smoothed_residual_grad(&a, &b, &x, mu, norm).map_err(|e| e.to_string())?;
            let f = norm.eval(&a.matvec(&x).sub(&b));
            if v > f + 1e-9 || f > v + 0.5 * mu * norm.lipschitz_sq(7) + 1e-9 {
                return Err(format!("case {i}: {norm:?}, mu = {mu}, f = {f}, f_mu = {v}"));
            }
        }
    }
    Ok("600 cases".into())
}

fn moreau_fd(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..100 {
        let x = point(&mut rng, 6, 2.0);
        for mu in [1.0, 0.1, 0.01] {
            for term in terms(&mut rng).into_iter().take(2) {
                let g = moreau_grad(&term, &x, mu).map_err(|e| e.to_string())?;
                let fd: Vec<f64> = (0..x.len())
                    .map(|j| {
                        let h = 1e-6 * x[j].abs().max(1.0);
                        let (mut p, mut m) = (x.clone(), x.clone());
                        p[j] += h;
                        m[j] -= h;
                        (moreau_value(&term, &p, mu).unwrap() - moreau_value(&term, &m, mu).unwrap()) / (2.0 * h)
                    })
                    .collect();
                let err = g.dist(&fd) / g.norm().max(1.0);
                if err > 1e-5 {
                    return Err(format!("case {i}: {:?}, mu = {mu}, relative error {err:e}", term.kind));
                }
            }
        }
    }
    Ok("600 gradients, relative error <= 1e-5".into())
}

fn spectral_density(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..200 {
        let n = 2 + i % 7;
        let g = gaussian(&mut rng, n, n);
        let x = DenseMatrix::from_fn(n, n, |r, c| g.get(r, c) + g.get(c, r));
        let mu = rng.uniform_in(1e-3, 10.0);
        let e = spectral_max_eval(&x, mu).map_err(|e| e.to_string())?;
        let grad = e.gradient();
        let min = *sym_eig(&grad).map_err(|e| e.to_string())?.values.last().unwrap();
        let top = e.eig.values[0];
        if (grad.trace() - 1.0).abs() > 1e-10 || min < -1e-10 {
            return Err(format!("case {i}: trace {}, min eigenvalue {min}", grad.trace()));
        }
        if e.value < top - 1e-12 || e.value > top + mu * (n as f64).ln() + 1e-12 {
            return Err(format!("case {i}: value {} outside [{top}, {top} + mu ln n]", e.value));
        }
    }
    Ok("200 matrices".into())
}

fn any_term(rng: &mut SeededRng) -> ProxTerm {
    let w = rng.uniform_in(0.1, 3.0);
    match (rng.uniform() * 6.0) as usize {
        0 => ProxTerm::l1(w, 4),
        1 => ProxTerm::l2norm(w, 4),
        2 => ProxTerm::new(ProxKind::NuclearNorm { rows: 2, cols: 2 }, w, 4).expect("valid term"),
        3 => ProxTerm::new(ProxKind::SquaredL2, w, 4).expect("valid term"),
        4 => ProxTerm::new(ProxKind::LinfBall, w, 4).expect("valid term"),
        _ => {
            let lo = point(rng, 4, 1.0);
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.uniform_in(0.0, 2.0)).collect();
            ProxTerm::new(ProxKind::IndicatorBox { lo, hi }, 1.0, 4).expect("valid term")
        }
    }
}

fn prox_optimality(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..500 {
        let term = any_term(&mut rng);
        let x = point(&mut rng, 4, 3.0);
        let t = rng.uniform_in(0.05, 3.0);
        let p = term.prox(&x, t).map_err(|e| e.to_string())?;
        let phi = |z: &[f64]| term.value(z) + DenseVector::from(z).dist(&x).powi(2) / (2.0 * t);
        for _ in 0..10 {
            let s = rng.uniform_in(1e-4, 1.0);
            let z: Vec<f64> = p.iter().map(|v| v + s * rng.normal()).collect();
            let z = if term.is_indicator() { term.prox(&z, 1.0).unwrap().into_inner() } else { z };
            if phi(&p) > phi(&z) + 1e-9 * phi(&z).abs().max(1.0) {
                return Err(format!("case {i}: {:?}, x = {x:?}, t = {t}: z = {z:?} does better", term.kind));
            }
        }
    }
    Ok("500 inputs x 10 perturbations".into())
}

fn prox_nonexpansive(seed: u64) -> Check {
    let mut rng = SeededRng::new(seed);
    for i in 0..500 {
        let term = any_term(&mut rng);
        let x = point(&mut rng, 4, 3.0);
        let y = point(&mut rng, 4, 3.0);
        let t = rng.uniform_in(0.05, 3.0);
        let px = term.prox(&x, t).map_err(|e| e.to_string())?;
        let py = term.prox(&y, t).map_err(|e| e.to_string())?;
        let d = DenseVector::from(x.clone()).dist(&y);
        if px.dist(&py) > d * (1.0 + 1e-12) + 1e-12 {
            return Err(format!("case {i}: {:?}, x = {x:?}, y = {y:?}", term.kind));
        }
    }
    Ok("500 pairs".into())
}

fn bound7(seed: u64) -> Check {
    let inst = gen_lasso(20, 20, false, seed, ResidualNorm::L1).map_err(|e| e.to_string())?;
    let x0 = inst.start_point(DEFAULT_START_SEED);
    let r = run_reference(&inst.objective, &x0, 1e-10, &ReferenceOptions::default()).map_err(|e| e.to_string())?;
    let eps = 1e-2;
    let mu0 = auto_mu0(&inst.objective, &x0, &r.x).unwrap_or(1.0);
    let p = ScheduleParams::default()
        .with_mu0(mu0)
        .with_floor(eps / inst.objective.lipschitz_sq);
    let mut t = Trace::with_reference(r.f).keeping_iterates();
    run_alg1(&inst.objective, &p, &x0, 10_000, &mut t).map_err(|e| e.to_string())?;
    let rep = audit_bound7(&t, &inst.objective, &r.x, r.f, &p).map_err(|e| e.to_string())?;
    let (literal, curved) = rep.iteration_bounds(eps);
    Ok(format!(
        "{} bound and {} Lyapunov checks, max gap/bound {:.3}; first T with gap <= {eps}: {}; 2 L_f sqrt(E)/eps = {literal:.0}, times sqrt(L_A) = {curved:.0}",
        rep.bound_checks,
        rep.lyapunov_checks,
        rep.max_bound_ratio,
        first_within(&t, r.f, eps).map_or("none".into(), |k| k.to_string())
    ))
}

fn tail_rate(seed: u64) -> Check {
    let inst = gen_lasso(20, 20, false, seed, ResidualNorm::L1).map_err(|e| e.to_string())?;
    let x0 = inst.start_point(DEFAULT_START_SEED);
    let r = run_reference(&inst.objective, &x0, 1e-10, &ReferenceOptions::default()).map_err(|e| e.to_string())?;
    let mu0 = auto_mu0(&inst.objective, &x0, &r.x).unwrap_or(1.0);
    let p = ScheduleParams::default().with_mu0(mu0).with_shape(2.0, 1e4);
    let mut t = Trace::with_reference(r.f);
    run_alg1(&inst.objective, &p, &x0, 10_000, &mut t).map_err(|e| e.to_string())?;
    let g = t.gaps();
    let tail = &g[g.len() - 2000..];
    let (k, worst) = (0..tail.len() - 500)
        .map(|k| (k, tail[k + 500] / tail[k]))
        .fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
    let detail = format!(
        "worst gap_(k+500)/gap_k = {worst:.3} at k = {}, final gap {:.3e}",
        g.len() - 2000 + k,
        g[g.len() - 1]
    );
    if worst <= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}
