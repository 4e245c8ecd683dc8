//! The adaptive accelerated smoothing method, benchmark baselines,
//! reference solves, and runtime inequality audits.

mod accelerated;
mod audit;
mod baselines;
mod objective;
mod reference;
mod trace;

pub use baselines::{run_admm, run_admm_best, run_chambolle_pock, run_subgradient, StepRule, ADMM_PENALTIES};
pub use audit::{audit_bound7, first_within, Bound7Report, AUDIT_SLACK};
pub use accelerated::{auto_mu0, run_alg1, run_nesterov_smoothing, run_tran_dinh, MU_FLOOR};
pub use reference::{run_reference, ReferenceOptions, ReferenceSolution};
pub use objective::{NonsmoothPart, ObjectiveSpec, Regularizer, SmoothPart};
pub use trace::{relative_gap, NullSink, SolverState, Trace, TraceRecord, TraceSink};
