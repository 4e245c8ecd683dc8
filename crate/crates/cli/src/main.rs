//! `nsopt`: generate problem instances, run solvers, benchmark, and audit.

mod audit;
mod bench;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nsopt_core::problems::{
    gen_fault_diag_with, gen_lasso_with, gen_maxcut, gen_mpc, lasso_from_data, parse_libsvm, FaultConfig,
    LassoConfig, MaxCutReg, MpcConfig, ProblemInstance,
};
use nsopt_core::smoothing::ResidualNorm;

use audit::AuditSuite;
use bench::{BenchOptions, Suite};
use error::{CliError, CliResult};
use run::{Algorithm, Mu0, RunConfig};

#[derive(Parser)]
#[command(name = "nsopt", version, about = "Adaptive accelerated smoothing: instances, solvers, benchmarks, audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance as JSON
    Gen(GenArgs),
    /// Run one solver on an instance and write its trace
    Solve(SolveArgs),
    /// Run several solvers on a seeded suite instance
    Bench(BenchArgs),
    /// Run the seeded invariant suites
    Audit(AuditArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lasso,
    Maxcut,
    FaultDiag,
    Mpc,
    Libsvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for ResidualNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => ResidualNorm::L1,
            NormArg::L2 => ResidualNorm::L2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    L1,
    Sql2,
}

#[derive(Args)]
struct GenArgs {
    family: FamilyArg,
    /// Unknowns (lasso, maxcut), signal length (fault-diag), or horizon (mpc)
    #[arg(long)]
    n: Option<usize>,
    /// Rows of the data matrix (lasso)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "l1")]
    norm: NormArg,
    /// Correlated columns (lasso)
    #[arg(long)]
    correlated: bool,
    /// Regularization weight (lasso, maxcut, libsvm)
    #[arg(long)]
    eta: Option<f64>,
    /// Regularizer (maxcut)
    #[arg(long, value_enum, default_value = "sql2")]
    reg: RegArg,
    /// Impulse-response length (fault-diag)
    #[arg(long, default_value_t = 16)]
    lag: usize,
    /// Input-activity weight (mpc)
    #[arg(long)]
    lambda: Option<f64>,
    /// Symmetric input bound |u| <= u_max (mpc)
    #[arg(long)]
    u_max: Option<f64>,
    /// LIBSVM file (libsvm)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Accept unordered LIBSVM indices
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    /// Smoothing recursion shape a (> 1)
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Smoothing recursion shape b (> 0); b = 1 freezes unfloored runs
    #[arg(long, default_value_t = 1e4)]
    b: f64,
    /// Floor on the smoothing level
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Initial smoothing level, or `auto`
    #[arg(long, default_value = "auto")]
    mu0: Mu0,
    #[arg(long, default_value_t = 1.0)]
    beta0: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Seed of the Gaussian starting point
    #[arg(long = "start-seed", default_value_t = nsopt_core::problems::DEFAULT_START_SEED)]
    start_seed: u64,
    /// Relative certificate required of the reference optimum
    #[arg(long, default_value_t = 1e-10)]
    ref_target: f64,
    #[arg(long, default_value_t = 10)]
    checkpoints: usize,
    /// Target accuracy of Nesterov smoothing
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// ADMM penalty (default: best of 0.1, 1, 10)
    #[arg(long)]
    rho: Option<f64>,
    /// Subgradient stepsize scale
    #[arg(long, default_value_t = 0.01)]
    step_scale: f64,
}

impl ScheduleArgs {
    fn config(&self, algorithm: Algorithm, problem: PathBuf, trace: Option<PathBuf>) -> RunConfig {
        RunConfig {
            a: self.a,
            b: self.b,
            c: self.c,
            mu0: self.mu0,
            beta0: self.beta0,
            iters: self.iters,
            seed: self.start_seed,
            trace,
            ref_target: self.ref_target,
            checkpoints: self.checkpoints,
            eps: self.eps,
            rho: self.rho,
            step_scale: self.step_scale,
            ..RunConfig::new(algorithm, problem)
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "alg1")]
    alg: Algorithm,
    /// Trace CSV path
    #[arg(long)]
    out: PathBuf,
    /// Skip the reference optimum (gap column is nan, mu0 auto falls back)
    #[arg(long)]
    no_reference: bool,
    #[command(flatten)]
    run: ScheduleArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// lasso-l1, lasso-l2, maxcut, fault-diag, mpc, or libsvm:<path>
    #[arg(long)]
    suite: Suite,
    /// Comma-separated algorithms (default: all)
    #[arg(long, value_enum, value_delimiter = ',')]
    algs: Vec<Algorithm>,
    /// Instance size override
    #[arg(long)]
    n: Option<usize>,
    /// Instance seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: ScheduleArgs,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: AuditSuite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => generate(&args),
        Command::Solve(args) => solve(&args),
        Command::Bench(args) => bench::bench(&BenchOptions {
            suite: args.suite,
            algorithms: if args.algs.is_empty() { Algorithm::ALL.to_vec() } else { args.algs },
            n: args.n,
            seed: args.seed,
            template: args.run.config(Algorithm::Alg1, args.out_dir.join("instance.json"), None),
            out_dir: args.out_dir,
        }),
        Command::Audit(args) => match audit::audit(args.suite, args.seed) {
            0 => Ok(()),
            n => Err(CliError::AuditFailed(format!("{n} invariant(s) failed"))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn build_instance(args: &GenArgs) -> CliResult<ProblemInstance> {
    let inst = match args.family {
        FamilyArg::Lasso => {
            let d = LassoConfig::default();
            gen_lasso_with(&LassoConfig {
                n: args.n.unwrap_or(d.n),
                m: args.m.unwrap_or(d.m),
                correlated: args.correlated,
                norm: args.norm.into(),
                eta: args.eta.unwrap_or(d.eta),
                seed: args.seed,
                ..d
            })?
        }
        FamilyArg::Maxcut => {
            let reg = match args.reg {
                RegArg::L1 => MaxCutReg::L1,
                RegArg::Sql2 => MaxCutReg::SquaredL2,
            };
            gen_maxcut(args.n.unwrap_or(50), args.seed, reg, args.eta.unwrap_or(1.0))?
        }
        FamilyArg::FaultDiag => gen_fault_diag_with(&FaultConfig::new(args.n.unwrap_or(200), args.lag, args.seed))?,
        FamilyArg::Mpc => {
            let d = MpcConfig::default();
            let u = args.u_max.unwrap_or(d.u_max[0]);
            gen_mpc(&MpcConfig {
                horizon: args.n.unwrap_or(d.horizon),
                lambda: args.lambda.unwrap_or(d.lambda),
                u_min: vec![-u],
                u_max: vec![u],
                ..d
            })?
        }
        FamilyArg::Libsvm => {
            let path = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::Invalid("libsvm needs --input".into()))?;
            let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            let (x, y) = parse_libsvm(std::io::BufReader::new(file), args.lenient)?;
            lasso_from_data(x, y, args.norm.into(), args.eta.unwrap_or(1.0))?
        }
    };
    Ok(inst)
}

fn generate(args: &GenArgs) -> CliResult<()> {
    let inst = build_instance(args)?;
    run::write_instance(&inst, &args.out)?;
    println!(
        "{}: dim {}, L_A {:.6e}, L_f^2 {:.6e} -> {}",
        inst.name,
        inst.dim(),
        inst.objective.curvature,
        inst.objective.lipschitz_sq,
        args.out.display()
    );
    Ok(())
}

fn solve(args: &SolveArgs) -> CliResult<()> {
    let cfg = args.run.config(args.alg, args.problem.clone(), Some(args.out.clone()));
    cfg.validate()?;
    let inst = run::load_instance(&args.problem)?;
    let reference = if args.no_reference {
        None
    } else {
        run::reference_for(&inst, &args.problem, cfg.ref_target)?
    };
    let out = run::run(&cfg, &inst, reference.as_ref(), false)?;
    let header = run::trace_header(&cfg, &inst, &out, reference.as_ref());
    output::write_file(&args.out, &output::trace_csv(&header, &out.trace))?;
    let last = out.trace.last().expect("budget >= 1");
    println!(
        "{} on {}: {} iterations, F = {:.15e}, gap {:.3e}, {:.1} ms",
        cfg.algorithm.id(),
        inst.name,
        out.trace.records.len(),
        last.objective,
        last.gap,
        out.wall_ms
    );
    Ok(())
}
