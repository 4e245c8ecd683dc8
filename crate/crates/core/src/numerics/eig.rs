//! Dense symmetric eigensolvers: Householder tridiagonalization followed by
//! implicit QL, and cyclic Jacobi as a slower independent cross-check.

use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = Q diag(values) Qᵀ`, values sorted descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: DenseVector,
    /// Orthonormal eigenvectors stored as columns, aligned with `values`.
    pub vectors: DenseMatrix,
}

fn check_input(a: &DenseMatrix) -> Result<()> {
    a.ensure_finite("sym_eig input")?;
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch {
            context: "sym_eig requires a non-empty square matrix",
            expected: a.rows().max(1),
            found: a.cols(),
        });
    }
    a.ensure_symmetric()
}

fn sorted(values: Vec<f64>, vectors: impl Fn(usize, usize) -> f64, n: usize) -> SymEig {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    SymEig {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: DenseMatrix::from_fn(n, n, |r, c| vectors(r, order[c])),
    }
}

/// Symmetric eigen-decomposition by Householder reduction to tridiagonal
/// form and the implicit QL algorithm with Wilkinson-type shifts.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEig> {
    check_input(a)?;
    let n = a.rows();
    // Column-major working copy: v[j][i] = V(i, j).
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| 0.5 * (a.get(i, j) + a.get(j, i))).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    Ok(sorted(d, |r, c| v[c][r], n))
}

// Householder reduction (tred2). On exit `v` holds the orthogonal transform,
// `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[j][n - 1];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[j][i - 1];
                v[j][i] = 0.0;
                v[i][j] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[i][j] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[j][k] * d[k];
                    e[k] += v[j][k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[j][k] -= f * e[k] + g * d[k];
                }
                d[j] = v[j][i - 1];
                v[j][i] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[i][n - 1] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[i + 1][k] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[i + 1][k] * v[j][k];
                }
                for k in 0..=i {
                    v[j][k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[i + 1][k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[j][n - 1];
        v[j][n - 1] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (tql2), accumulating rotations into `v`.
fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 * n.max(1) {
                    return Err(Error::InvalidParameter(
                        "tridiagonal QL did not converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[i + 1][k];
                        v[i + 1][k] = s * v[i][k] + c * h;
                        v[i][k] = c * v[i][k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Each sweep visits every off-diagonal pair `(p, q)` once and applies the
/// rotation that annihilates `a_pq`. Iteration stops when the off-diagonal
/// mass drops below machine precision relative to `‖A‖_F`.
pub fn sym_eig_jacobi(a: &DenseMatrix) -> Result<SymEig> {
    check_input(a)?;
    let n = a.rows();
    // Symmetrize exactly so rotations act on a truly symmetric array.
    let mut m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
    let mut v = DenseMatrix::identity(n);
    let scale = m.frobenius_norm();
    let mut sweeps = 0;

    if scale > 0.0 {
        let stop = (f64::EPSILON * scale) * (f64::EPSILON * scale);
        loop {
            let off = off_diagonal_sq(&m);
            if off <= stop || sweeps >= MAX_SWEEPS {
                break;
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let values = (0..n).map(|i| m.get(i, i)).collect();
    Ok(sorted(values, |r, c| v.get(r, c), n))
}

fn off_diagonal_sq(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = m.get(i, j);
            s += 2.0 * x * x;
        }
    }
    s
}

fn rotate(m: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    // Smaller root of t² + 2θt − 1 = 0 keeps the rotation angle ≤ π/4.
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    if t == 0.0 {
        m.set(p, q, 0.0);
        m.set(q, p, 0.0);
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows();

    // A ← Jᵀ A J with J the Givens rotation in the (p, q) plane.
    for k in 0..n {
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        m.set(k, p, c * akp - s * akq);
        m.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let apk = m.get(p, k);
        let aqk = m.get(q, k);
        m.set(p, k, c * apk - s * aqk);
        m.set(q, k, s * apk + c * aqk);
    }
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
    m.set(p, p, app - t * apq);
    m.set(q, q, aqq + t * apq);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian, SeededRng};

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let g = gaussian(&mut SeededRng::new(seed), n, n);
        DenseMatrix::from_fn(n, n, |i, j| 0.5 * (g.get(i, j) + g.get(j, i)))
    }

    fn residuals(a: &DenseMatrix, e: &SymEig) -> (f64, f64) {
        let n = a.rows();
        let aq = a.matmul(&e.vectors).unwrap();
        let ql = DenseMatrix::from_fn(n, n, |i, j| e.vectors.get(i, j) * e.values[j]);
        let qtq = e.vectors.transpose().matmul(&e.vectors).unwrap();
        (
            aq.sub(&ql).frobenius_norm(),
            qtq.sub(&DenseMatrix::identity(n)).frobenius_norm(),
        )
    }

    #[test]
    fn diagonal_input() {
        let e = sym_eig(&DenseMatrix::from_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(e.values.0, vec![2.0, 1.0]);
        assert_eq!(e.vectors.get(1, 0).abs(), 1.0);
        assert_eq!(e.vectors.get(0, 1).abs(), 1.0);
    }

    #[test]
    fn swap_matrix() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q0 = e.vectors.column(0);
        let q1 = e.vectors.column(1);
        assert!((q0[0].abs() - h).abs() < 1e-15 && (q0[0] - q0[1]).abs() < 1e-15);
        assert!((q1[0].abs() - h).abs() < 1e-15 && (q1[0] + q1[1]).abs() < 1e-15);
    }

    #[test]
    fn random_8x8_seed_7() {
        let a = random_symmetric(8, 7);
        let e = sym_eig(&a).unwrap();
        let (rec, orth) = residuals(&a, &e);
        assert!(rec <= 1e-9 * a.frobenius_norm().max(1.0), "{rec}");
        assert!(orth <= 1e-9, "{orth}");
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn hundred_random_matrices_up_to_50() {
        for trial in 0..100u64 {
            let n = 1 + (trial as usize * 7) % 50;
            let a = random_symmetric(n, 1000 + trial);
            let e = sym_eig(&a).unwrap();
            let j = sym_eig_jacobi(&a).unwrap();
            for solved in [&e, &j] {
                let (rec, orth) = residuals(&a, solved);
                assert!(rec <= 1e-9 * a.frobenius_norm().max(1.0), "n={n} rec={rec}");
                assert!(orth <= 1e-9, "n={n} orth={orth}");
            }
            let diff = e.values.dist(&j.values);
            assert!(diff <= 1e-10 * a.frobenius_norm().max(1.0), "n={n} diff={diff}");
        }
    }

    #[test]
    fn repeated_and_zero_spectra() {
        for a in [
            DenseMatrix::zeros(4, 4),
            DenseMatrix::identity(5).scaled(3.0),
            DenseMatrix::from_fn(6, 6, |_, _| 1.0),
            DenseMatrix::from_rows(&[vec![2.0]]).unwrap(),
        ] {
            let e = sym_eig(&a).unwrap();
            let (rec, orth) = residuals(&a, &e);
            assert!(rec <= 1e-12 && orth <= 1e-12, "{rec} {orth}");
        }
        let ones = sym_eig(&DenseMatrix::from_fn(6, 6, |_, _| 1.0)).unwrap();
        assert!((ones.values[0] - 6.0).abs() < 1e-13);
        assert!(ones.values[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn rejects_asymmetric_and_non_finite() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0 + 1e-9, 0.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NonSymmetric { .. })));
        let b = DenseMatrix::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&b), Err(Error::NonFinite(_))));
        // Asymmetry under tolerance is absorbed.
        let c = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0 + 1e-12, 0.0]]).unwrap();
        assert!(sym_eig(&c).is_ok());
    }
}
