#![allow(dead_code)]

use nsopt_core::problems::{gen_lasso, ProblemInstance, DEFAULT_START_SEED};
use nsopt_core::smoothing::ResidualNorm;
use nsopt_core::solvers::{run_reference, ReferenceOptions, ReferenceSolution};
use nsopt_core::problems::{gen_mpc, MpcConfig};
use nsopt_core::{DenseMatrix, DenseVector};

// Optimal values of the seed-42 uncorrelated LASSO instances (m = n) and the
// seed-42 MaxCut instances (n = 50), computed outside this crate:
// ℓ1-ℓ1 by HiGHS on the LP epigraph form, the others by SCS at eps 1e-10/1e-12.
pub const L1L1_N20_FSTAR: f64 = 13.04338351352444;
pub const L1L1_N100_FSTAR: f64 = 82.22567437176176;
pub const L2L1_N100_FSTAR: f64 = 61.90937808136259;
pub const MAXCUT_SQ005_FSTAR: f64 = -239.16933582162187;
pub const MAXCUT_L1_FSTAR: f64 = 1.0;

pub fn lasso(n: usize, norm: ResidualNorm) -> ProblemInstance {
    gen_lasso(n, n, false, 42, norm).unwrap()
}

pub fn start(inst: &ProblemInstance) -> DenseVector {
    inst.start_point(DEFAULT_START_SEED)
}

pub fn reference(inst: &ProblemInstance) -> ReferenceSolution {
    run_reference(&inst.objective, &start(inst), 1e-10, &ReferenceOptions::default()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/libsvm").join(name)
}

/// Well-formed fixtures with their dense rows, targets, and whether lenient
/// mode is needed.
pub fn libsvm_accepted() -> Vec<(&'static str, Vec<Vec<f64>>, Vec<f64>, bool)> {
    vec![
        (
            "basic.txt",
            vec![vec![2.0, 0.0, -1.0, 0.0], vec![0.0, 0.1, 0.0, 0.0], vec![1e-3, -250.0, 0.0, 7.0]],
            vec![1.5, -0.25, 3.0],
            false,
        ),
        ("comments.txt", vec![vec![1.0, 0.0], vec![0.5, 0.25]], vec![0.0, 2.5], false),
        ("crlf.txt", vec![vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]], vec![1.0, 2.0], false),
        (
            "unordered.txt",
            vec![vec![2.0, 0.0, 1.0, 0.0], vec![1.0, 5.0, 0.0, 4.0]],
            vec![10.0, 11.0],
            true,
        ),
    ]
}

/// Malformed fixtures with the line number the parser must report.
pub fn libsvm_rejected() -> Vec<(&'static str, usize)> {
    vec![
        ("bad_target.txt", 2),
        ("bad_index_zero.txt", 4),
        ("bad_repeat.txt", 1),
        ("bad_order.txt", 3),
        ("bad_value.txt", 2),
        ("bad_empty.txt", 0),
        ("bad_pair.txt", 2),
        ("bad_nan.txt", 2),
        ("unordered.txt", 1),
    ]
}

/// Double-integrator MPC with no activity penalty and unbounded inputs.
pub fn mpc_unconstrained() -> ProblemInstance {
    gen_mpc(&MpcConfig {
        lambda: 0.0,
        horizon: 20,
        u_min: vec![f64::NEG_INFINITY],
        u_max: vec![f64::INFINITY],
        x0: Some(vec![1.0, -0.5]),
        x_ref: Some(vec![0.2, 0.0]),
        ..MpcConfig::default()
    })
    .unwrap()
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}
