//! Coupled momentum and smoothing-parameter recursions.
//!
//! The momentum follows `β_{k+1} = (1 + √(1 + 4β_k²))/2` and the smoothing
//! level shrinks by a factor tied to the momentum growth:
//!
//! ```text
//! μ_{k+1} = max{ b μ_k / (q (β_{k+1}/β_k)² − 1), c },   q = (b(a−1) + a)/(a−1)
//! ```
//!
//! `(a, b) = (2, 1)` gives `q = 3`. With `c = 0` the ratio `μ_{k+1}/μ_k`
//! starts well below the `O(1/k²)` envelope and tends to
//! `b(a−1)/(b(a−1)+1)`, i.e. the sequence decays geometrically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the smoothing recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub a: f64,
    pub b: f64,
    /// Floor on the smoothing level.
    pub c: f64,
    pub mu0: f64,
    pub beta0: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            a: 2.0,
            b: 1.0,
            c: 0.0,
            mu0: 1.0,
            beta0: 1.0,
        }
    }
}

impl ScheduleParams {
    pub fn with_mu0(self, mu0: f64) -> Self {
        ScheduleParams { mu0, ..self }
    }

    pub fn with_floor(self, c: f64) -> Self {
        ScheduleParams { c, ..self }
    }

    pub fn with_shape(self, a: f64, b: f64) -> Self {
        ScheduleParams { a, b, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 1.0
            && self.b > 0.0
            && self.c >= 0.0
            && self.mu0 > 0.0
            && self.beta0 > 0.0
            && [self.a, self.b, self.c, self.mu0, self.beta0].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "schedule needs a > 1, b > 0, c >= 0, mu0 > 0, beta0 > 0; got {self:?}"
            )))
        }
    }

    /// `q = (b(a−1) + a)/(a−1)`.
    pub fn coupling(&self) -> f64 {
        (self.b * (self.a - 1.0) + self.a) / (self.a - 1.0)
    }

    /// Asymptotic contraction `b(a−1)/(b(a−1)+1)` of the unfloored sequence.
    pub fn limit_ratio(&self) -> f64 {
        let s = self.b * (self.a - 1.0);
        s / (s + 1.0)
    }

    /// First index from which `μ_{i+1}/μ_i ≤ e^{−2/i}` is guaranteed:
    /// `⌈2 / log(1 + 1/(b(a−1)))⌉`.
    pub fn rate_onset(&self) -> usize {
        (2.0 / (1.0 / (self.b * (self.a - 1.0))).ln_1p()).ceil() as usize
    }
}

/// `β_{k+1} = (1 + √(1 + 4β²))/2`.
pub fn momentum_next(beta: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * beta * beta).sqrt())
}

/// `γ_k = (1 − β_k)/β_{k+1}`.
pub fn gamma(beta: f64, beta_next: f64) -> f64 {
    (1.0 - beta) / beta_next
}

/// One step of the smoothing recursion, floored at `params.c`.
pub fn mu_next(mu: f64, beta: f64, beta_next: f64, params: &ScheduleParams) -> Result<f64> {
    let ratio = beta_next / beta;
    let denom = params.coupling() * ratio * ratio - 1.0;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator(denom));
    }
    Ok((params.b * mu / denom).max(params.c))
}

/// Unfloored multiplier `μ_{k+1}/μ_k` implied by `(β_k, β_{k+1})`.
pub fn mu_ratio(beta: f64, beta_next: f64, params: &ScheduleParams) -> Result<f64> {
    mu_next(1.0, beta, beta_next, &params.with_floor(0.0))
}

/// `(k, β_k, μ_k)` together with the previous pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    pub k: usize,
    pub beta_prev: f64,
    pub beta: f64,
    pub mu_prev: f64,
    pub mu: f64,
}

/// Quantities consumed by iteration `k` of the accelerated loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleStep {
    pub k: usize,
    pub beta: f64,
    pub beta_next: f64,
    pub gamma: f64,
    pub mu: f64,
    /// `μ_{k+1}`, the smoothing level used by the gradient step of iteration `k`.
    pub mu_next: f64,
}

impl ScheduleState {
    pub fn initial(params: &ScheduleParams) -> Result<Self> {
        params.validate()?;
        Ok(ScheduleState {
            k: 0,
            beta_prev: params.beta0,
            beta: params.beta0,
            mu_prev: params.mu0,
            mu: params.mu0,
        })
    }

    /// Advances `β` first, then `μ`: returns the step for iteration `k` and
    /// the state at `k + 1`.
    pub fn advance(&self, params: &ScheduleParams) -> Result<(ScheduleStep, ScheduleState)> {
        let beta_next = momentum_next(self.beta);
        let mu_next = mu_next(self.mu, self.beta, beta_next, params)?;
        let step = ScheduleStep {
            k: self.k,
            beta: self.beta,
            beta_next,
            gamma: gamma(self.beta, beta_next),
            mu: self.mu,
            mu_next,
        };
        let next = ScheduleState {
            k: self.k + 1,
            beta_prev: self.beta,
            beta: beta_next,
            mu_prev: self.mu,
            mu: mu_next,
        };
        Ok((step, next))
    }
}

/// `(μ_0..=μ_len, β_0..=β_len)` produced by the recursion.
pub fn schedule_trace(params: &ScheduleParams, len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut state = ScheduleState::initial(params)?;
    let mut mus = vec![state.mu];
    let mut betas = vec![state.beta];
    for _ in 0..len {
        let (_, next) = state.advance(params)?;
        mus.push(next.mu);
        betas.push(next.beta);
        state = next;
    }
    Ok((mus, betas))
}

/// Outcome of [`mu_rate_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct MuRateReport {
    /// Onset index of the `e^{−2/i}` envelope.
    pub rate_onset: usize,
    pub limit_ratio: f64,
    pub max_ratio: f64,
    pub final_ratio: f64,
    pub final_limit_tol: f64,
    /// `C₀ = μ₀ Π_{i<k₀} α_i · k₀²`, so that `μ_{k+1} ≤ C₀/(k+1)²`.
    pub c0: f64,
}

/// Audits an unfloored `(μ_k, β_k)` trace against the smoothing-rate lemma.
///
/// The ratios `α_i = μ_{i+1}/μ_i` are recomputed from the `β` pair (the
/// recorded `μ` underflows after ~10³ steps of halving), and wherever both
/// recorded `μ` values are normal floats the recorded ratio must agree with
/// that multiplier. Checks, in order:
///
/// 1. `α_i ≤ e^{−2/i}` for every `i ≥ k₀`;
/// 2. `α_i ≤ b(a−1)/(b(a−1)+1) + 1e-9` for every `i`;
/// 3. the final ratio is within `4·L·q/((q−1)k)` of the limit `L`, the
///    leading term of `L − α_k` doubled;
/// 4. `log μ_{k+1} ≤ log C₀ − 2 log(k+1)` for every `k ≥ k₀`.
pub fn mu_rate_audit(mus: &[f64], betas: &[f64], params: &ScheduleParams) -> Result<MuRateReport> {
    if params.c != 0.0 {
        return Err(Error::InvalidParameter(
            "rate audit needs the unfloored recursion (c = 0)".into(),
        ));
    }
    params.validate()?;
    if mus.len() != betas.len() {
        return Err(Error::DimensionMismatch {
            context: "mu/beta trace lengths",
            expected: mus.len(),
            found: betas.len(),
        });
    }
    if mus.len() < 51 {
        return Err(Error::InvalidParameter("rate audit needs at least 50 steps".into()));
    }
    let steps = mus.len() - 1;
    let onset = params.rate_onset();
    let limit = params.limit_ratio();
    let ratios: Vec<f64> = (0..steps)
        .map(|i| mu_ratio(betas[i], betas[i + 1], params))
        .collect::<Result<_>>()?;

    for (i, alpha) in ratios.iter().enumerate() {
        let (lo, hi) = (mus[i], mus[i + 1]);
        if lo.is_normal() && hi.is_normal() {
            let recorded = hi / lo;
            if (recorded - alpha).abs() > 1e-12 * alpha {
                return Err(Error::AuditFailure {
                    check: "trace follows the recursion",
                    index: i,
                    detail: format!("recorded ratio {recorded:e} vs recursion {alpha:e}"),
                });
            }
        }
    }
    for (i, alpha) in ratios.iter().enumerate().skip(onset.max(1)) {
        let envelope = (-2.0 / i as f64).exp();
        if *alpha > envelope {
            return Err(Error::AuditFailure {
                check: "ratio below exp(-2/k)",
                index: i,
                detail: format!("ratio {alpha} > {envelope}"),
            });
        }
    }
    for (i, alpha) in ratios.iter().enumerate() {
        if *alpha > limit + 1e-9 {
            return Err(Error::AuditFailure {
                check: "ratio below limit",
                index: i,
                detail: format!("ratio {alpha} > {limit}"),
            });
        }
    }
    let q = params.coupling();
    let last = steps - 1;
    let final_ratio = ratios[last];
    let final_limit_tol = 4.0 * limit * q / ((q - 1.0) * last.max(1) as f64);
    if (final_ratio - limit).abs() > final_limit_tol {
        return Err(Error::AuditFailure {
            check: "ratio approaches limit",
            index: last,
            detail: format!("ratio {final_ratio} vs limit {limit} (tol {final_limit_tol:e})"),
        });
    }

    let mut log_mu = params.mu0.ln();
    let mut log_c0 = log_mu;
    for (i, alpha) in ratios.iter().enumerate() {
        if i < onset {
            log_c0 += alpha.ln();
        }
        log_mu += alpha.ln();
        // log_mu now holds log μ_{i+1}.
        if i >= onset {
            let bound = log_c0 + 2.0 * (onset as f64).ln() - 2.0 * ((i + 1) as f64).ln();
            if log_mu > bound + 1e-12 {
                return Err(Error::AuditFailure {
                    check: "mu below C0/k^2",
                    index: i + 1,
                    detail: format!("log mu {log_mu} > {bound}"),
                });
            }
        }
    }
    Ok(MuRateReport {
        rate_onset: onset,
        limit_ratio: limit,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        final_ratio,
        final_limit_tol,
        c0: (log_c0 + 2.0 * (onset as f64).ln()).exp(),
    })
}
