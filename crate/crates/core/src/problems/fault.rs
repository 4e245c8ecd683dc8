//! Model-free fault diagnosis:
//! `min_x ½‖y − Hx‖² + τ‖X_L‖_* + λ‖X_S‖₁`.
//!
//! The record comes from a seeded second-order ARX system
//! `y_t = a₁y_{t−1} + a₂y_{t−2} + u_{t−1} + f_t + noise` driven by Gaussian
//! input `u` and an additive fault `f` active on one window. The unknown
//! `x = (g, s)` stacks an impulse response `g` of length `lag` and a fault
//! estimate `s` of length `T`, so `H = [T_u | I]` with `T_u` the Toeplitz
//! convolution matrix of the input. `X_L` is the column-major reshape of `g`
//! (low rank because `g` is a sum of two exponentials) and `X_S = s`.

use serde::{Deserialize, Serialize};

use super::{Family, GenParams, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector, SeededRng};
use crate::prox::{ProxKind, ProxTerm};
use crate::smoothing::ResidualNorm;
use crate::solvers::{NonsmoothPart, ObjectiveSpec, Regularizer, SmoothPart};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Signal length `T`.
    pub t_len: usize,
    /// Impulse-response length; `rows · cols` must equal it.
    pub lag: usize,
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    pub lambda: f64,
    pub noise_std: f64,
    pub fault_size: f64,
    pub seed: u64,
}

impl FaultConfig {
    /// Defaults with the most square `rows × cols = lag` split.
    pub fn new(t_len: usize, lag: usize, seed: u64) -> Self {
        let cols = (1..=lag)
            .filter(|c| lag % c == 0 && c * c <= lag)
            .max()
            .unwrap_or(1);
        FaultConfig {
            t_len,
            lag,
            rows: lag / cols.max(1),
            cols,
            tau: 1.0,
            lambda: 1.0,
            noise_std: 0.01,
            fault_size: 1.0,
            seed,
        }
    }
}

pub fn gen_fault_diag(t_len: usize, lag: usize, seed: u64) -> Result<ProblemInstance> {
    gen_fault_diag_with(&FaultConfig::new(t_len, lag, seed))
}

pub fn gen_fault_diag_with(cfg: &FaultConfig) -> Result<ProblemInstance> {
    let (t, p) = (cfg.t_len, cfg.lag);
    if !(t > p && p >= 1) {
        return Err(Error::InvalidParameter(format!("need T > lag >= 1, got T={t}, lag={p}")));
    }
    if cfg.rows * cfg.cols != p {
        return Err(Error::DimensionMismatch {
            context: "impulse-response reshape",
            expected: p,
            found: cfg.rows * cfg.cols,
        });
    }
    if !(cfg.tau >= 0.0 && cfg.lambda >= 0.0 && cfg.noise_std >= 0.0) {
        return Err(Error::InvalidParameter("tau, lambda, noise_std must be >= 0".into()));
    }

    let mut rng = SeededRng::new(cfg.seed);
    let radius = rng.uniform_in(0.6, 0.9);
    let angle = rng.uniform_in(0.2, 1.0);
    let (a1, a2) = (2.0 * radius * angle.cos(), -radius * radius);
    let u: Vec<f64> = (0..t).map(|_| rng.normal()).collect();
    let start = t / 2;
    let width = (t / 10).max(1);
    let fault: Vec<f64> = (0..t)
        .map(|i| if i >= start && i < start + width { cfg.fault_size } else { 0.0 })
        .collect();
    let mut y = vec![0.0; t];
    for i in 0..t {
        let mut v = fault[i] + cfg.noise_std * rng.normal();
        if i >= 1 {
            v += a1 * y[i - 1] + u[i - 1];
        }
        if i >= 2 {
            v += a2 * y[i - 2];
        }
        y[i] = v;
    }
    // Impulse response of the same system from input to output.
    let mut g = vec![0.0; p];
    for k in 0..p {
        let mut v = if k == 1 { 1.0 } else { 0.0 };
        if k >= 1 {
            v += a1 * g[k - 1];
        }
        if k >= 2 {
            v += a2 * g[k - 2];
        }
        g[k] = v;
    }

    let dim = p + t;
    let h = DenseMatrix::from_fn(t, dim, |i, j| {
        if j < p {
            if i >= j {
                u[i - j]
            } else {
                0.0
            }
        } else if j - p == i {
            1.0
        } else {
            0.0
        }
    });
    let selector = DenseMatrix::from_fn(t, dim, |i, j| if j == p + i { 1.0 } else { 0.0 });
    let objective = ObjectiveSpec::new(
        SmoothPart::LeastSquares { h, y: y.into() },
        NonsmoothPart::Residual {
            a: selector,
            b: DenseVector::zeros(t),
            norm: ResidualNorm::L1,
            weight: cfg.lambda,
        },
        Regularizer::on(
            ProxTerm::new(
                ProxKind::NuclearNorm {
                    rows: cfg.rows,
                    cols: cfg.cols,
                },
                cfg.tau,
                p,
            )?,
            (0..p).collect(),
        ),
    )?;
    let planted: DenseVector = g.iter().chain(fault.iter()).copied().collect();
    Ok(ProblemInstance {
        name: format!("fault-T{t}-L{p}-s{}", cfg.seed),
        family: Family::FaultDiag,
        seed: cfg.seed,
        params: GenParams::FaultDiag(cfg.clone()),
        objective,
        planted: Some(planted),
        mpc: None,
    })
}

/// Coordinates of `X_L` and `X_S` in `x`.
pub fn fault_partition(cfg: &FaultConfig) -> (Vec<usize>, Vec<usize>) {
    ((0..cfg.lag).collect(), (cfg.lag..cfg.lag + cfg.t_len).collect())
}
