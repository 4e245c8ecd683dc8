//! Per-iteration convergence records and where they go.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::schedule::ScheduleState;

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub elapsed_ms: f64,
    pub objective: f64,
    /// `|F − F_ref| / max(|F_ref|, 1 if |F_ref| < 1e-12)`; NaN without a reference.
    pub gap: f64,
    pub mu: f64,
    pub beta: f64,
    pub stepsize: f64,
    pub grad_map_norm: f64,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str =
        "iter,elapsed_ms,objective,gap,mu,beta,stepsize,grad_map_norm";
}

/// Relative optimality gap against a reference value.
pub fn relative_gap(f: f64, f_ref: f64) -> f64 {
    let scale = if f_ref.abs() < 1e-12 { 1.0 } else { f_ref.abs() };
    (f - f_ref).abs() / scale
}

/// Receives the trace of one run.
pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord);

    /// Reference optimum used for the gap column.
    fn reference(&self) -> Option<f64> {
        None
    }

    /// Iterates `(x_k, y_k)` after iteration `k`; ignored unless overridden.
    fn iterate(&mut self, _iter: usize, _x: &[f64], _y: &[f64]) {}
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _rec: &TraceRecord) {}
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, rec: &TraceRecord) {
        self.push(*rec);
    }
}

/// In-memory trace, optionally keeping every iterate.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub f_ref: Option<f64>,
    pub keep_iterates: bool,
    pub xs: Vec<DenseVector>,
    pub ys: Vec<DenseVector>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn with_reference(f_ref: f64) -> Self {
        Trace {
            f_ref: Some(f_ref),
            ..Trace::default()
        }
    }

    pub fn keeping_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.gap).collect()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

impl TraceSink for Trace {
    fn record(&mut self, rec: &TraceRecord) {
        self.records.push(*rec);
    }

    fn reference(&self) -> Option<f64> {
        self.f_ref
    }

    fn iterate(&mut self, _iter: usize, x: &[f64], y: &[f64]) {
        if self.keep_iterates {
            self.xs.push(x.into());
            self.ys.push(y.into());
        }
    }
}

/// Iterates and scalars at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DenseVector,
    pub y: DenseVector,
    /// Iterations completed.
    pub k: usize,
    pub mu: f64,
    pub beta: f64,
    pub zeta: f64,
    /// Scheduler state, for methods driven by the coupled recursion.
    pub schedule: Option<ScheduleState>,
}

/// Shared bookkeeping: timing, gap computation and the divergence guard.
pub(crate) struct Monitor<'a> {
    sink: &'a mut dyn TraceSink,
    start: Instant,
    f_ref: Option<f64>,
    limit: f64,
}

impl<'a> Monitor<'a> {
    pub(crate) fn new(sink: &'a mut dyn TraceSink, x0: &[f64]) -> Self {
        let f_ref = sink.reference();
        Monitor {
            sink,
            start: Instant::now(),
            f_ref,
            limit: 1e12 * (1.0 + crate::numerics::norm(x0)),
        }
    }

    /// Aborts when `x` is non-finite or has left the `1e12·(1 + ‖x₀‖)` ball.
    pub(crate) fn guard(&self, iter: usize, x: &[f64]) -> Result<()> {
        let norm = crate::numerics::norm(x);
        if !norm.is_finite() || norm > self.limit {
            return Err(Error::NonFiniteIterate { iter, norm });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn emit(
        &mut self,
        iter: usize,
        objective: f64,
        mu: f64,
        beta: f64,
        stepsize: f64,
        grad_map_norm: f64,
        x: &[f64],
        y: &[f64],
    ) {
        let gap = self.f_ref.map_or(f64::NAN, |r| relative_gap(objective, r));
        self.sink.record(&TraceRecord {
            iter,
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
            objective,
            gap,
            mu,
            beta,
            stepsize,
            grad_map_norm,
        });
        self.sink.iterate(iter, x, y);
    }
}
