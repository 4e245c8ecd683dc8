//! Adaptive accelerated smoothing for nonsmooth composite convex problems.
//!
//! Problems have the form `min_x F(x) = f(x) + h(x)` where both terms may be
//! nonsmooth but are prox-friendly. The nonsmooth `f` is replaced by its
//! Moreau envelope (or a spectral log-sum-exp surrogate) whose smoothing
//! level `mu_k` shrinks in lockstep with the momentum sequence `beta_k` of an
//! accelerated proximal-gradient loop.
//!
//! Layout:
//!
//! - [`numerics`]: dense vectors/matrices, symmetric eigensolvers, thin SVD, seeded RNG.
//! - [`prox`]: proximal operators and projections.
//! - [`smoothing`]: Moreau envelopes, smoothed residual norms, spectral max, gradient mapping.
//! - [`schedule`]: the coupled momentum / smoothing recursions and their rate audits.
//! - [`solvers`]: the adaptive method, baselines, reference solves, and inequality audits.
//! - [`problems`]: seeded instance generators and the LIBSVM reader.

pub mod error;
pub mod numerics;
pub mod problems;
pub mod prox;
pub mod schedule;
pub mod smoothing;
pub mod solvers;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector, SeededRng};
