//! `min_x ‖Bx − b‖_i + η‖x‖₁` with Gaussian data.

use serde::{Deserialize, Serialize};

use super::{Family, GenParams, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{gaussian, DenseMatrix, DenseVector, SeededRng};
use crate::prox::ProxTerm;
use crate::smoothing::ResidualNorm;
use crate::solvers::{NonsmoothPart, ObjectiveSpec, Regularizer, SmoothPart};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub n: usize,
    pub m: usize,
    /// Columns follow `B(:, j+1) = 0.5 B(:, j) + randn`.
    pub correlated: bool,
    pub norm: ResidualNorm,
    pub eta: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            n: 100,
            m: 100,
            correlated: false,
            norm: ResidualNorm::L1,
            eta: 1.0,
            noise_std: 0.05,
            seed: 42,
        }
    }
}

pub fn gen_lasso(
    n: usize,
    m: usize,
    correlated: bool,
    seed: u64,
    norm: ResidualNorm,
) -> Result<ProblemInstance> {
    gen_lasso_with(&LassoConfig {
        n,
        m,
        correlated,
        norm,
        seed,
        ..LassoConfig::default()
    })
}

/// Draws `B` (m×n), then `x♮` (n), then the noise (m), all from one stream.
pub fn gen_lasso_with(cfg: &LassoConfig) -> Result<ProblemInstance> {
    if cfg.n == 0 || cfg.m == 0 {
        return Err(Error::InvalidParameter("lasso needs n, m >= 1".into()));
    }
    if !(cfg.eta >= 0.0 && cfg.noise_std >= 0.0) {
        return Err(Error::InvalidParameter("eta and noise_std must be >= 0".into()));
    }
    let mut rng = SeededRng::new(cfg.seed);
    let mut b_mat = gaussian(&mut rng, cfg.m, cfg.n);
    if cfg.correlated {
        for j in 0..cfg.n - 1 {
            for i in 0..cfg.m {
                let v = 0.5 * b_mat.get(i, j) + b_mat.get(i, j + 1);
                b_mat.set(i, j + 1, v);
            }
        }
    }
    let planted: DenseVector = (0..cfg.n).map(|_| rng.normal()).collect();
    let mut b = b_mat.matvec(&planted);
    for v in b.iter_mut() {
        *v += cfg.noise_std * rng.normal();
    }
    let mut inst = lasso_from_data(b_mat, b, cfg.norm, cfg.eta)?;
    inst.name = format!(
        "lasso-{}-n{}-m{}{}-s{}",
        norm_tag(cfg.norm),
        cfg.n,
        cfg.m,
        if cfg.correlated { "-corr" } else { "" },
        cfg.seed
    );
    inst.seed = cfg.seed;
    inst.params = GenParams::Lasso(cfg.clone());
    inst.planted = Some(planted);
    Ok(inst)
}

fn norm_tag(norm: ResidualNorm) -> &'static str {
    match norm {
        ResidualNorm::L1 => "l1",
        ResidualNorm::L2 => "l2",
    }
}

/// Regression instance over given data.
pub fn lasso_from_data(
    b_mat: DenseMatrix,
    b: DenseVector,
    norm: ResidualNorm,
    eta: f64,
) -> Result<ProblemInstance> {
    let (rows, cols) = (b_mat.rows(), b_mat.cols());
    let objective = ObjectiveSpec::new(
        SmoothPart::None,
        NonsmoothPart::Residual {
            a: b_mat,
            b,
            norm,
            weight: 1.0,
        },
        Regularizer::full(ProxTerm::l1(eta, cols)),
    )?;
    Ok(ProblemInstance {
        name: format!("lasso-{}-data", norm_tag(norm)),
        family: match norm {
            ResidualNorm::L1 => Family::LassoL1,
            ResidualNorm::L2 => Family::LassoL2,
        },
        seed: 0,
        params: GenParams::Libsvm {
            source: String::new(),
            rows,
            cols,
            eta,
        },
        objective,
        planted: None,
        mpc: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = gen_lasso(2, 2, false, 42, ResidualNorm::L1).unwrap();
        let b = gen_lasso(2, 2, false, 42, ResidualNorm::L1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_lasso(2, 2, false, 43, ResidualNorm::L1).unwrap());
    }

    #[test]
    fn constants() {
        let l1 = gen_lasso(20, 20, false, 42, ResidualNorm::L1).unwrap();
        assert_eq!(l1.objective.lipschitz_sq, 20.0);
        assert_eq!(l1.family, Family::LassoL1);
        let l2 = gen_lasso(20, 30, false, 42, ResidualNorm::L2).unwrap();
        assert_eq!(l2.objective.lipschitz_sq, 1.0);
        l2.validate().unwrap();
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn correlated_columns() {
        let inst = gen_lasso(100, 100, true, 5, ResidualNorm::L1).unwrap();
        let (a, _, _, _) = inst.objective.residual().unwrap();
        let mean: f64 = (0..99)
            .map(|j| corr(&a.column(j), &a.column(j + 1)))
            .sum::<f64>()
            / 99.0;
        // Stationary lag-one correlation of the recurrence is 0.5.
        assert!(mean > 0.3, "{mean}");
        let plain = gen_lasso(100, 100, false, 5, ResidualNorm::L1).unwrap();
        let (p, _, _, _) = plain.objective.residual().unwrap();
        let pm: f64 = (0..99).map(|j| corr(&p.column(j), &p.column(j + 1))).sum::<f64>() / 99.0;
        assert!(pm.abs() < 0.05, "{pm}");
    }

    #[test]
    fn noiseless_planted_signal_zeroes_residual() {
        let inst = gen_lasso_with(&LassoConfig {
            n: 6,
            m: 9,
            noise_std: 0.0,
            ..LassoConfig::default()
        })
        .unwrap();
        let x = inst.planted.clone().unwrap();
        assert_eq!(inst.objective.nonsmooth_value(&x).unwrap(), 0.0);
    }

    #[test]
    fn rejects_empty() {
        assert!(gen_lasso(0, 3, false, 1, ResidualNorm::L1).is_err());
    }
}
