//! Seeded instance generators for the four experiment families and a reader
//! for LIBSVM regression files.

mod fault;
mod lasso;
mod libsvm;
mod maxcut;
mod mpc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DenseVector, SeededRng};
use crate::solvers::ObjectiveSpec;

pub use fault::{fault_partition, gen_fault_diag, gen_fault_diag_with, FaultConfig};
pub use lasso::{gen_lasso, gen_lasso_with, lasso_from_data, LassoConfig};
pub use libsvm::{parse_libsvm, parse_libsvm_str};
pub use maxcut::{gen_maxcut, MaxCutReg};
pub use mpc::{gen_mpc, MpcConfig, MpcData};

/// Which experiment an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LassoL1,
    LassoL2,
    MaxCutDual,
    FaultDiag,
    L1Mpc,
}

/// Generator inputs, kept so every instance can be regenerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GenParams {
    Lasso(LassoConfig),
    MaxCut {
        n: usize,
        reg: MaxCutReg,
        eta: f64,
    },
    FaultDiag(FaultConfig),
    Mpc(MpcConfig),
    /// Regression data read from a LIBSVM file.
    Libsvm {
        source: String,
        rows: usize,
        cols: usize,
        eta: f64,
    },
}

/// Seed of the default starting point.
pub const DEFAULT_START_SEED: u64 = 1000;

/// A generated problem: the objective plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub name: String,
    pub family: Family,
    pub seed: u64,
    pub params: GenParams,
    pub objective: ObjectiveSpec,
    /// Planted signal, when the generator has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<DenseVector>,
    /// Dynamics needed to roll out an MPC input sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mpc: Option<MpcData>,
}

impl ProblemInstance {
    /// Dimension and constant checks; every solver entry point in the CLI
    /// runs this first.
    /// Standard Gaussian starting point drawn from its own seed, so that
    /// every solver in a comparison starts from the same `x₀`.
    pub fn start_point(&self, seed: u64) -> DenseVector {
        let mut rng = SeededRng::new(seed);
        DenseVector::from_fn(self.dim(), |_| rng.normal())
    }

    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        if let Some(p) = &self.planted {
            if p.len() != self.objective.dim {
                return Err(Error::DimensionMismatch {
                    context: "planted signal",
                    expected: self.objective.dim,
                    found: p.len(),
                });
            }
        }
        if let Some(m) = &self.mpc {
            m.validate()?;
            if m.inputs() != self.objective.dim {
                return Err(Error::DimensionMismatch {
                    context: "mpc input sequence",
                    expected: self.objective.dim,
                    found: m.inputs(),
                });
            }
        }
        let expected_mpc = self.family == Family::L1Mpc;
        if expected_mpc != self.mpc.is_some() {
            return Err(Error::InvalidParameter(
                "mpc dynamics present exactly for the mpc family".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.objective.dim
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidParameter(format!("serialize instance: {e}")))
    }

    /// Parses and validates an instance.
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: ProblemInstance = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        inst.validate()?;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::ResidualNorm;

    #[test]
    fn json_round_trip_is_bit_identical() {
        let insts = [
            gen_lasso(7, 5, true, 3, ResidualNorm::L1).unwrap(),
            gen_maxcut(6, 4, MaxCutReg::SquaredL2, 0.05).unwrap(),
            gen_fault_diag(30, 6, 2).unwrap(),
            gen_mpc(&MpcConfig::default()).unwrap(),
        ];
        for inst in insts {
            let text = inst.to_json().unwrap();
            let back = ProblemInstance::from_json(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn validator_rejects_inconsistent_instances() {
        let mut inst = gen_lasso(4, 4, false, 1, ResidualNorm::L2).unwrap();
        inst.planted = Some(DenseVector::zeros(3));
        assert!(inst.validate().is_err());
        let mut inst = gen_lasso(4, 4, false, 1, ResidualNorm::L2).unwrap();
        inst.objective.curvature *= 1.01;
        assert!(inst.validate().is_err());
        assert!(matches!(
            ProblemInstance::from_json("{\n\"name\": 3}"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
