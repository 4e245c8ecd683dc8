//! ℓ1-regularized MPC in condensed form.
//!
//! With `x_{i+1} = Ax_i + Bu_i`, every state is affine in the stacked input
//! `u = (u₀, …, u_{H−1})`: `x_i = A^i x₀ + Γ_i u`. The tracking cost
//! `Σ_{i=0}^{H} ‖x_i − x_ref‖²_Q` becomes `½uᵀPu + qᵀu + r`; the actuator
//! term `λ Σ ‖Δu_i‖₁` is a weighted ℓ1 residual `λ‖Du − d‖₁` with `D` the
//! first-difference map and `d = (u_prev, 0, …)`; the bounds enter as the box
//! indicator `h`.

use serde::{Deserialize, Serialize};

use super::{Family, GenParams, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};
use crate::prox::{check_bounds, ProxKind, ProxTerm};
use crate::smoothing::ResidualNorm;
use crate::solvers::{NonsmoothPart, ObjectiveSpec, Regularizer, SmoothPart};

/// Dynamics and weights of an MPC instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcData {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub q: DenseMatrix,
    pub horizon: usize,
    pub x0: DenseVector,
    pub x_ref: DenseVector,
    pub u_prev: DenseVector,
}

impl MpcData {
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn controls(&self) -> usize {
        self.b.cols()
    }

    /// Length of the stacked input sequence.
    pub fn inputs(&self) -> usize {
        self.horizon * self.controls()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.rows();
        let mismatch = |context, expected, found| {
            Err(Error::DimensionMismatch {
                context,
                expected,
                found,
            })
        };
        if self.a.cols() != n {
            return mismatch("A must be square", n, self.a.cols());
        }
        if self.b.rows() != n {
            return mismatch("B rows", n, self.b.rows());
        }
        if self.q.rows() != n || self.q.cols() != n {
            return mismatch("Q size", n, self.q.rows());
        }
        self.q.ensure_symmetric()?;
        if self.x0.len() != n {
            return mismatch("x0 length", n, self.x0.len());
        }
        if self.x_ref.len() != n {
            return mismatch("x_ref length", n, self.x_ref.len());
        }
        if self.u_prev.len() != self.controls() {
            return mismatch("u_prev length", self.controls(), self.u_prev.len());
        }
        if self.horizon == 0 || n == 0 || self.controls() == 0 {
            return Err(Error::InvalidParameter("mpc needs H >= 1 and nonempty A, B".into()));
        }
        for (m, what) in [(&self.a, "A"), (&self.b, "B"), (&self.q, "Q")] {
            m.ensure_finite(what)?;
        }
        Ok(())
    }

    /// States `x₀, …, x_H` under the input sequence.
    pub fn simulate(&self, u: &[f64]) -> Vec<DenseVector> {
        let m = self.controls();
        let mut xs = vec![self.x0.clone()];
        for i in 0..self.horizon {
            let next = self.a.matvec(&xs[i]).add(&self.b.matvec(&u[i * m..(i + 1) * m]));
            xs.push(next);
        }
        xs
    }

    /// `Σ_{i=0}^{H} ‖x_i − x_ref‖²_Q` by direct simulation.
    pub fn rollout_cost(&self, u: &[f64]) -> f64 {
        self.simulate(u)
            .iter()
            .map(|x| {
                let e = x.sub(&self.x_ref);
                self.q.matvec(&e).dot(&e)
            })
            .sum()
    }

    /// `Σ ‖Δu_i‖₁` with `Δu₀ = u₀ − u_prev`.
    pub fn activity(&self, u: &[f64]) -> f64 {
        let m = self.controls();
        (0..u.len())
            .map(|k| {
                let prev = if k < m { self.u_prev[k] } else { u[k - m] };
                (u[k] - prev).abs()
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    /// State matrix; the double integrator when absent.
    #[serde(default)]
    pub a: Option<DenseMatrix>,
    #[serde(default)]
    pub b: Option<DenseMatrix>,
    /// Tracking weight; identity when absent.
    #[serde(default)]
    pub q: Option<DenseMatrix>,
    pub lambda: f64,
    pub horizon: usize,
    /// Per-control bounds, repeated along the horizon.
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub x_ref: Option<Vec<f64>>,
    #[serde(default)]
    pub u_prev: Option<Vec<f64>>,
    /// Sampling time of the default double integrator.
    pub dt: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            a: None,
            b: None,
            q: None,
            lambda: 1.0,
            horizon: 30,
            u_min: vec![-1.0],
            u_max: vec![1.0],
            x0: None,
            x_ref: None,
            u_prev: None,
            dt: 0.2,
        }
    }
}

impl MpcConfig {
    fn data(&self) -> Result<MpcData> {
        let dt = self.dt;
        let a = self
            .a
            .clone()
            .unwrap_or_else(|| DenseMatrix::from_rows(&[vec![1.0, dt], vec![0.0, 1.0]]).expect("2x2"));
        let b = self
            .b
            .clone()
            .unwrap_or_else(|| DenseMatrix::from_rows(&[vec![0.5 * dt * dt], vec![dt]]).expect("2x1"));
        let n = a.rows();
        let data = MpcData {
            q: self.q.clone().unwrap_or_else(|| DenseMatrix::identity(n)),
            x0: self.x0.clone().map(DenseVector::from).unwrap_or_else(|| {
                DenseVector::from_fn(n, |i| if i == 0 { 1.0 } else { 0.0 })
            }),
            x_ref: self.x_ref.clone().map(DenseVector::from).unwrap_or_else(|| DenseVector::zeros(n)),
            u_prev: self
                .u_prev
                .clone()
                .map(DenseVector::from)
                .unwrap_or_else(|| DenseVector::zeros(b.cols())),
            horizon: self.horizon,
            a,
            b,
        };
        data.validate()?;
        Ok(data)
    }
}

/// Condensed quadratic `(P, q, r)` of the tracking cost.
pub fn condense(d: &MpcData) -> (DenseMatrix, DenseVector, f64) {
    let (n, m, hz) = (d.states(), d.controls(), d.horizon);
    let k = d.inputs();
    // gamma holds Γ_i (n × k), free the affine part A^i x₀.
    let mut gamma = DenseMatrix::zeros(n, k);
    let mut free = d.x0.clone();
    let mut p = DenseMatrix::zeros(k, k);
    let mut q = DenseVector::zeros(k);
    let mut r = 0.0;
    for i in 0..=hz {
        if i > 0 {
            gamma = d.a.matmul(&gamma).expect("conformable");
            for row in 0..n {
                for c in 0..m {
                    gamma.set(row, (i - 1) * m + c, d.b.get(row, c));
                }
            }
            free = d.a.matvec(&free);
        }
        let e = free.sub(&d.x_ref);
        let qg = d.q.matmul(&gamma).expect("conformable");
        let gtqg = gamma.transpose().matmul(&qg).expect("conformable");
        for (pv, gv) in p.data_mut().iter_mut().zip(gtqg.data()) {
            *pv += 2.0 * gv;
        }
        q.axpy(2.0, &qg.matvec_t(&e));
        r += d.q.matvec(&e).dot(&e);
    }
    // Exact symmetry for the downstream eigensolver.
    let p = DenseMatrix::from_fn(k, k, |i, j| 0.5 * (p.get(i, j) + p.get(j, i)));
    (p, q, r)
}

pub fn gen_mpc(cfg: &MpcConfig) -> Result<ProblemInstance> {
    let data = cfg.data()?;
    let m = data.controls();
    if cfg.u_min.len() != m || cfg.u_max.len() != m {
        return Err(Error::DimensionMismatch {
            context: "input bounds",
            expected: m,
            found: cfg.u_min.len().min(cfg.u_max.len()),
        });
    }
    check_bounds(&cfg.u_min, &cfg.u_max)?;
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {}", cfg.lambda)));
    }
    let k = data.inputs();
    let (p, q, r) = condense(&data);
    let diff = DenseMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0
        } else if i >= m && j == i - m {
            -1.0
        } else {
            0.0
        }
    });
    let offset = DenseVector::from_fn(k, |i| if i < m { data.u_prev[i] } else { 0.0 });
    let lo: Vec<f64> = (0..k).map(|i| cfg.u_min[i % m]).collect();
    let hi: Vec<f64> = (0..k).map(|i| cfg.u_max[i % m]).collect();
    let objective = ObjectiveSpec::new(
        SmoothPart::Quadratic { p, q, r },
        NonsmoothPart::Residual {
            a: diff,
            b: offset,
            norm: ResidualNorm::L1,
            weight: cfg.lambda,
        },
        Regularizer::full(ProxTerm::new(ProxKind::IndicatorBox { lo, hi }, 1.0, k)?),
    )?;
    Ok(ProblemInstance {
        name: format!("mpc-H{}-n{}-m{}", data.horizon, data.states(), m),
        family: Family::L1Mpc,
        seed: 0,
        params: GenParams::Mpc(cfg.clone()),
        objective,
        planted: None,
        mpc: Some(data),
    })
}
