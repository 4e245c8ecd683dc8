//! Runs a set of algorithms on one seeded instance and assembles the report.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nsopt_core::problems::{
    gen_fault_diag, gen_lasso, gen_maxcut, gen_mpc, lasso_from_data, parse_libsvm, MaxCutReg, MpcConfig,
    ProblemInstance,
};
use nsopt_core::smoothing::ResidualNorm;
use nsopt_core::solvers::audit_bound7;

use crate::error::{CliError, CliResult};
use crate::output::{checkpoint_table, checkpoints, gap_at, gap_plot, num, trace_csv, write_file};
use crate::run::{reference_for, run, trace_header, write_instance, Algorithm, Reference, RunConfig, RunOutput};

#[derive(Debug, Clone, PartialEq)]
pub enum Suite {
    LassoL1,
    LassoL2,
    MaxCut,
    FaultDiag,
    Mpc,
    Libsvm(PathBuf),
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lasso-l1" => Suite::LassoL1,
            "lasso-l2" => Suite::LassoL2,
            "maxcut" => Suite::MaxCut,
            "fault-diag" => Suite::FaultDiag,
            "mpc" => Suite::Mpc,
            _ => match s.strip_prefix("libsvm:") {
                Some(p) if !p.is_empty() => Suite::Libsvm(p.into()),
                _ => {
                    return Err(format!(
                        "unknown suite `{s}` (expected lasso-l1, lasso-l2, maxcut, fault-diag, mpc, libsvm:<path>)"
                    ))
                }
            },
        })
    }
}

impl Suite {
    /// The suite's instance; `n` overrides the default size.
    pub fn instance(&self, n: Option<usize>, seed: u64) -> CliResult<ProblemInstance> {
        let inst = match self {
            Suite::LassoL1 => gen_lasso(n.unwrap_or(100), n.unwrap_or(100), false, seed, ResidualNorm::L1)?,
            Suite::LassoL2 => gen_lasso(n.unwrap_or(100), n.unwrap_or(100), false, seed, ResidualNorm::L2)?,
            Suite::MaxCut => gen_maxcut(n.unwrap_or(50), seed, MaxCutReg::SquaredL2, 0.05)?,
            Suite::FaultDiag => gen_fault_diag(n.unwrap_or(200), 16, seed)?,
            Suite::Mpc => gen_mpc(&MpcConfig {
                horizon: n.unwrap_or(30),
                ..MpcConfig::default()
            })?,
            Suite::Libsvm(path) => {
                let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
                let (x, y) = parse_libsvm(std::io::BufReader::new(file), false)?;
                lasso_from_data(x, y, ResidualNorm::L1, 1.0)?
            }
        };
        Ok(inst)
    }
}

pub struct BenchOptions {
    pub suite: Suite,
    pub algorithms: Vec<Algorithm>,
    pub n: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Shared settings; the algorithm and paths are filled in per run.
    pub template: RunConfig,
}

struct Outcome {
    algorithm: Algorithm,
    result: CliResult<(RunOutput, Option<bool>)>,
}

/// Worker count: `NSOPT_THREADS` when set, else the available parallelism.
pub fn thread_count(jobs: usize) -> usize {
    let cap = std::env::var("NSOPT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    cap.min(jobs).max(1)
}

pub fn bench(opts: &BenchOptions) -> CliResult<()> {
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let inst = opts.suite.instance(opts.n, opts.seed)?;
    let problem = opts.out_dir.join("instance.json");
    write_instance(&inst, &problem)?;
    let reference = reference_for(&inst, &problem, opts.template.ref_target)?;
    println!(
        "{}: dim {}, L_A {:.6e}, L_f^2 {:.6e}, F* {}",
        inst.name,
        inst.dim(),
        inst.objective.curvature,
        inst.objective.lipschitz_sq,
        reference.as_ref().map_or("unknown".into(), |r| format!("{:.15e}", r.f))
    );

    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..thread_count(opts.algorithms.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&alg) = opts.algorithms.get(i) else { break };
                let result = run_one(opts, alg, &inst, &problem, reference.as_ref());
                results.lock().unwrap().push((i, Outcome { algorithm: alg, result }));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    let outcomes: Vec<Outcome> = results.into_iter().map(|(_, o)| o).collect();
    report(opts, &inst, &outcomes)?;

    if outcomes.iter().any(|o| o.result.is_ok()) {
        Ok(())
    } else {
        Err(outcomes
            .into_iter()
            .find_map(|o| o.result.err())
            .unwrap_or_else(|| CliError::Invalid("no algorithms requested".into())))
    }
}

fn run_one(
    opts: &BenchOptions,
    alg: Algorithm,
    inst: &ProblemInstance,
    problem: &Path,
    reference: Option<&Reference>,
) -> CliResult<(RunOutput, Option<bool>)> {
    let mut cfg = opts.template.clone();
    cfg.algorithm = alg;
    cfg.problem = problem.to_path_buf();
    let path = opts.out_dir.join(format!("{}.csv", alg.id()));
    cfg.trace = Some(path.clone());
    let audited = alg == Algorithm::Alg1 && reference.is_some();
    let mut out = run(&cfg, inst, reference, audited)?;
    let audit = match (audited, reference) {
        (true, Some(r)) => {
            let ok = audit_bound7(&out.trace, &inst.objective, &r.x, r.f, &cfg.schedule(out.mu0.value)).is_ok();
            // The iterates were only kept for the audit.
            out.trace.xs = Vec::new();
            out.trace.ys = Vec::new();
            Some(ok)
        }
        _ => None,
    };
    write_file(&path, &trace_csv(&trace_header(&cfg, inst, &out, reference), &out.trace))?;
    Ok((out, audit))
}

fn report(opts: &BenchOptions, inst: &ProblemInstance, outcomes: &[Outcome]) -> CliResult<()> {
    let marks = checkpoints(opts.template.iters, opts.template.checkpoints);
    let mut csv = format!("# instance: {}\n# config: {}\nalgorithm,status,final_gap,wall_ms,audit", inst.name,
        serde_json::to_string(&opts.template).expect("config serializes"));
    for k in &marks {
        csv.push_str(&format!(",gap_{k}"));
    }
    csv.push('\n');
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for o in outcomes {
        let id = o.algorithm.id();
        match &o.result {
            Ok((out, audit)) => {
                let gaps: Vec<f64> = marks.iter().map(|k| gap_at(&out.trace, *k)).collect();
                let audit = audit.map_or("n/a", |ok| if ok { "pass" } else { "fail" });
                let last = out.trace.last().map_or(f64::NAN, |r| r.gap);
                csv.push_str(&format!("{id},ok,{},{},{audit}", num(last), num(out.wall_ms)));
                for g in &gaps {
                    csv.push_str(&format!(",{}", num(*g)));
                }
                csv.push('\n');
                notes.push(format!("{id}: {:.1} ms, bound audit {audit}", out.wall_ms));
                rows.push((id.to_string(), gaps));
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], " ");
                csv.push_str(&format!("{id},failed: {msg},nan,nan,n/a"));
                csv.push_str(&",nan".repeat(marks.len()));
                csv.push('\n');
                notes.push(format!("{id}: failed ({e})"));
            }
        }
    }
    write_file(&opts.out_dir.join("report.csv"), &csv)?;

    let mut text = format!("{}: relative gap at {} checkpoints\n\n", inst.name, marks.len());
    text.push_str(&checkpoint_table(&rows, &marks));
    text.push('\n');
    for n in &notes {
        text.push_str(n);
        text.push('\n');
    }
    write_file(&opts.out_dir.join("report.txt"), &text)?;
    print!("{text}");

    let series: Vec<(String, &nsopt_core::solvers::Trace)> = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok().map(|(out, _)| (o.algorithm.id().to_string(), &out.trace)))
        .collect();
    write_file(&opts.out_dir.join("gaps.svg"), &gap_plot(&inst.name, &series))
}
