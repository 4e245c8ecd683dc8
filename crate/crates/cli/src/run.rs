//! Run configuration, instance loading, reference caching, and dispatch to
//! the solvers.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::ValueEnum;
use nsopt_core::problems::{ProblemInstance, DEFAULT_START_SEED};
use nsopt_core::schedule::ScheduleParams;
use nsopt_core::solvers::{
    auto_mu0, run_admm, run_admm_best, run_alg1, run_chambolle_pock, run_nesterov_smoothing,
    run_reference, run_subgradient, run_tran_dinh, ReferenceOptions, StepRule, Trace, ADMM_PENALTIES,
};
use nsopt_core::{DenseVector, Error};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Adaptive accelerated smoothing
    Alg1,
    /// Accelerated loop with harmonic smoothing decay μ₀/(k+1)
    Td,
    /// Nesterov smoothing at fixed μ = ε/L_f²
    Nes,
    /// Subgradient method, stepsize scale/√(k+1)
    Sgd,
    /// Chambolle-Pock primal-dual
    Cp,
    /// Linearized ADMM
    Admm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Alg1,
        Algorithm::Td,
        Algorithm::Nes,
        Algorithm::Sgd,
        Algorithm::Cp,
        Algorithm::Admm,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Td => "td",
            Algorithm::Nes => "nes",
            Algorithm::Sgd => "sgd",
            Algorithm::Cp => "cp",
            Algorithm::Admm => "admm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "adaptive accelerated smoothing",
            Algorithm::Td => "tran-dinh (harmonic stand-in)",
            Algorithm::Nes => "nesterov smoothing",
            Algorithm::Sgd => "subgradient",
            Algorithm::Cp => "chambolle-pock",
            Algorithm::Admm => "linearized admm",
        }
    }
}

/// Initial smoothing level: a number or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mu0 {
    Auto,
    Value(f64),
}

impl FromStr for Mu0 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Mu0::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Mu0::Value(v)),
            _ => Err(format!("mu0 must be `auto` or a positive number, got `{s}`")),
        }
    }
}

impl fmt::Display for Mu0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mu0::Auto => write!(f, "auto"),
            Mu0::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Everything one solver run depends on.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mu0: Mu0,
    pub beta0: f64,
    pub iters: usize,
    /// Seed of the Gaussian starting point.
    pub seed: u64,
    pub problem: PathBuf,
    pub trace: Option<PathBuf>,
    /// Relative certificate the reference optimum must reach.
    pub ref_target: f64,
    pub checkpoints: usize,
    /// Target accuracy of Nesterov smoothing.
    pub eps: f64,
    /// ADMM penalty; the best of the standard three when absent.
    pub rho: Option<f64>,
    pub step_scale: f64,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, problem: PathBuf) -> Self {
        RunConfig {
            algorithm,
            a: 2.0,
            b: 1e4,
            c: 0.0,
            mu0: Mu0::Auto,
            beta0: 1.0,
            iters: 1000,
            seed: DEFAULT_START_SEED,
            problem,
            trace: None,
            ref_target: 1e-10,
            checkpoints: 10,
            eps: 1e-3,
            rho: None,
            step_scale: 0.01,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.iters < 1 {
            return Err(CliError::Invalid("iteration budget must be >= 1".into()));
        }
        if self.checkpoints < 2 {
            return Err(CliError::Invalid("checkpoint count must be >= 2".into()));
        }
        if !(self.eps > 0.0 && self.step_scale > 0.0 && self.ref_target > 0.0) {
            return Err(CliError::Invalid("eps, step scale and reference target must be positive".into()));
        }
        if self.rho.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
            return Err(CliError::Invalid("rho must be positive".into()));
        }
        self.schedule(1.0).validate()?;
        Ok(())
    }

    pub fn schedule(&self, mu0: f64) -> ScheduleParams {
        ScheduleParams {
            a: self.a,
            b: self.b,
            c: self.c,
            mu0,
            beta0: self.beta0,
        }
    }
}

/// Certified optimum cached beside an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub instance: String,
    pub f: f64,
    pub certificate: f64,
    pub mu: f64,
    pub x: DenseVector,
}

pub fn load_instance(path: &Path) -> CliResult<ProblemInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ProblemInstance::from_json(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn write_instance(inst: &ProblemInstance, path: &Path) -> CliResult<()> {
    let text = inst.to_json()?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// `p.json` → `p.ref.json`.
pub fn reference_path(problem: &Path) -> PathBuf {
    let stem = problem.file_stem().map_or_else(|| "problem".into(), |s| s.to_string_lossy().into_owned());
    problem.with_file_name(format!("{stem}.ref.json"))
}

/// Loads the cached reference when it belongs to `inst` and is certified to
/// `target`; otherwise solves for it and refreshes the cache. `Ok(None)` when
/// the reference solver cannot certify the target.
pub fn reference_for(inst: &ProblemInstance, problem: &Path, target: f64) -> CliResult<Option<Reference>> {
    let cache = reference_path(problem);
    if let Ok(text) = std::fs::read_to_string(&cache) {
        if let Ok(r) = serde_json::from_str::<Reference>(&text) {
            if r.instance == inst.name && r.x.len() == inst.dim() && r.certificate <= target {
                return Ok(Some(r));
            }
        }
    }
    let x0 = inst.start_point(DEFAULT_START_SEED);
    let sol = match run_reference(&inst.objective, &x0, target, &ReferenceOptions::default()) {
        Ok(sol) => sol,
        Err(e @ Error::NotCertified { .. }) => {
            eprintln!("warning: no reference optimum for {}: {e}", inst.name);
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let r = Reference {
        instance: inst.name.clone(),
        f: sol.f,
        certificate: sol.certificate,
        mu: sol.mu,
        x: sol.x,
    };
    let text = serde_json::to_string_pretty(&r).expect("reference serializes");
    std::fs::write(&cache, text + "\n").map_err(|e| CliError::io(&cache, e))?;
    Ok(Some(r))
}

/// The resolved initial smoothing level and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Mu0Resolution {
    pub value: f64,
    pub how: String,
}

pub fn resolve_mu0(cfg: &RunConfig, inst: &ProblemInstance, x0: &[f64], reference: Option<&Reference>) -> Mu0Resolution {
    match cfg.mu0 {
        Mu0::Value(v) => Mu0Resolution {
            value: v,
            how: "given".into(),
        },
        Mu0::Auto => match reference.and_then(|r| auto_mu0(&inst.objective, x0, &r.x)) {
            Some(v) => Mu0Resolution {
                value: v,
                how: "auto: sqrt(L_A)·‖x0 − x_ref‖/sqrt(3 L_f²)".into(),
            },
            None => {
                eprintln!("warning: mu0 auto needs a reference point; falling back to 1.0");
                Mu0Resolution {
                    value: 1.0,
                    how: "auto fallback (no reference)".into(),
                }
            }
        },
    }
}

pub struct RunOutput {
    pub trace: Trace,
    pub mu0: Mu0Resolution,
    /// ADMM penalty actually used.
    pub rho: Option<f64>,
    pub wall_ms: f64,
}

pub fn run(cfg: &RunConfig, inst: &ProblemInstance, reference: Option<&Reference>, keep_iterates: bool) -> CliResult<RunOutput> {
    cfg.validate()?;
    let x0 = inst.start_point(cfg.seed);
    let mu0 = resolve_mu0(cfg, inst, &x0, reference);
    let fresh = || {
        let t = reference.map_or_else(Trace::new, |r| Trace::with_reference(r.f));
        if keep_iterates {
            t.keeping_iterates()
        } else {
            t
        }
    };
    let spec = &inst.objective;
    let mut trace = fresh();
    let mut rho = None;
    let start = Instant::now();
    match cfg.algorithm {
        Algorithm::Alg1 => {
            run_alg1(spec, &cfg.schedule(mu0.value), &x0, cfg.iters, &mut trace)?;
        }
        Algorithm::Td => {
            run_tran_dinh(spec, mu0.value, &x0, cfg.iters, &mut trace)?;
        }
        Algorithm::Nes => {
            run_nesterov_smoothing(spec, cfg.eps, &x0, cfg.iters, &mut trace)?;
        }
        Algorithm::Sgd => {
            run_subgradient(spec, &x0, cfg.iters, StepRule::InvSqrt(cfg.step_scale), &mut trace)?;
        }
        Algorithm::Cp => {
            run_chambolle_pock(spec, &x0, cfg.iters, &mut trace)?;
        }
        Algorithm::Admm => match cfg.rho {
            Some(r) => {
                run_admm(spec, r, &x0, cfg.iters, &mut trace)?;
                rho = Some(r);
            }
            None => {
                let (best, _, t) = run_admm_best(spec, &ADMM_PENALTIES, &x0, cfg.iters, fresh)?;
                trace = t;
                rho = Some(best);
            }
        },
    }
    Ok(RunOutput {
        trace,
        mu0,
        rho,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// `key: value` lines recorded at the top of every trace file.
pub fn trace_header(cfg: &RunConfig, inst: &ProblemInstance, out: &RunOutput, reference: Option<&Reference>) -> Vec<(String, String)> {
    let mut h = vec![
        ("nsopt".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("algorithm".into(), format!("{} ({})", cfg.algorithm.id(), cfg.algorithm.label())),
        ("instance".into(), inst.name.clone()),
        ("instance_seed".into(), inst.seed.to_string()),
        ("generator".into(), serde_json::to_string(&inst.params).expect("params serialize")),
        ("config".into(), serde_json::to_string(cfg).expect("config serializes")),
        ("start_seed".into(), cfg.seed.to_string()),
        ("mu0".into(), format!("{} ({})", out.mu0.value, out.mu0.how)),
    ];
    if let Some(first) = out.trace.records.first() {
        h.push(("mu1".into(), first.mu.to_string()));
    }
    h.push((
        "reference_f".into(),
        reference.map_or("none".into(), |r| format!("{} (certificate {:e})", r.f, r.certificate)),
    ));
    if let Some(rho) = out.rho {
        h.push(("rho".into(), rho.to_string()));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu0_parsing() {
        assert_eq!("auto".parse::<Mu0>().unwrap(), Mu0::Auto);
        assert_eq!("0.5".parse::<Mu0>().unwrap(), Mu0::Value(0.5));
        assert!("-1".parse::<Mu0>().is_err());
        assert!("x".parse::<Mu0>().is_err());
    }

    #[test]
    fn cache_sits_beside_the_instance() {
        assert_eq!(reference_path(Path::new("dir/p.json")), PathBuf::from("dir/p.ref.json"));
    }

    #[test]
    fn config_bounds() {
        let mut cfg = RunConfig::new(Algorithm::Alg1, "p.json".into());
        assert!(cfg.validate().is_ok());
        cfg.checkpoints = 1;
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
        cfg.checkpoints = 10;
        cfg.c = -1.0;
        assert!(cfg.validate().is_err());
    }
}
