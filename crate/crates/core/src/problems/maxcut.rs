//! Regularized dual of the MaxCut relaxation:
//! `min_y λ_max(C + Diag(y)) − ⟨1, y⟩ + ηR(y)`.

use serde::{Deserialize, Serialize};

use super::{Family, GenParams, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{gaussian, spectral_norm_sq, DenseVector, SeededRng};
use crate::prox::{ProxKind, ProxTerm};
use crate::solvers::{NonsmoothPart, ObjectiveSpec, Regularizer, SmoothPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxCutReg {
    L1,
    SquaredL2,
}

/// `C = GᵀG/‖G‖₂²` with `G` an `n × n` standard Gaussian matrix.
pub fn gen_maxcut(n: usize, seed: u64, reg: MaxCutReg, eta: f64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter("maxcut needs n >= 2".into()));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    let g = gaussian(&mut SeededRng::new(seed), n, n);
    let c = g.gram().scaled(1.0 / spectral_norm_sq(&g)?);
    let kind = match reg {
        MaxCutReg::L1 => ProxKind::L1,
        MaxCutReg::SquaredL2 => ProxKind::SquaredL2,
    };
    let objective = ObjectiveSpec::new(
        SmoothPart::Linear {
            c: DenseVector::filled(n, -1.0),
        },
        NonsmoothPart::SpectralMax { c },
        Regularizer::full(ProxTerm::new(kind, eta, n)?),
    )?;
    Ok(ProblemInstance {
        name: format!(
            "maxcut-n{n}-{}-s{seed}",
            match reg {
                MaxCutReg::L1 => "l1",
                MaxCutReg::SquaredL2 => "sql2",
            }
        ),
        family: Family::MaxCutDual,
        seed,
        params: GenParams::MaxCut { n, reg, eta },
        objective,
        planted: None,
        mpc: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sym_eig, DenseMatrix};
    use crate::solvers::NonsmoothPart;

    fn base(inst: &ProblemInstance) -> &DenseMatrix {
        match &inst.objective.nonsmooth {
            NonsmoothPart::SpectralMax { c } => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn wishart_construction() {
        let inst = gen_maxcut(30, 7, MaxCutReg::L1, 1.0).unwrap();
        let c = base(&inst);
        let e = sym_eig(c).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!(e.values.iter().all(|v| *v >= -1e-12));
        // tr C = ‖G‖_F² / ‖G‖₂² ≥ 1.
        assert!(c.trace() >= 1.0);
        assert_eq!(inst.objective.curvature, 1.0);
        assert!((inst.objective.lipschitz_sq - 2.0 * 30f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hand_instance_value() {
        let obj = ObjectiveSpec::new(
            SmoothPart::Linear {
                c: DenseVector::filled(2, -1.0),
            },
            NonsmoothPart::SpectralMax {
                c: DenseMatrix::identity(2).scaled(0.5),
            },
            Regularizer::full(ProxTerm::l1(1.0, 2)),
        )
        .unwrap();
        assert_eq!(obj.value(&[0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = gen_maxcut(8, 3, MaxCutReg::SquaredL2, 0.05).unwrap();
        assert_eq!(a, gen_maxcut(8, 3, MaxCutReg::SquaredL2, 0.05).unwrap());
        a.validate().unwrap();
        assert!(gen_maxcut(1, 3, MaxCutReg::L1, 1.0).is_err());
    }
}
