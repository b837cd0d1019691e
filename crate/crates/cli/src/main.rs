use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use asap_bench::config::{Algorithm, Experiment, ExperimentConfig, ScheduleOverride};
use asap_bench::runner::{run_experiment, run_grid};

/// Benchmark harness for the inertial Bregman alternating proximal solvers.
///
/// A single run (`--alg ... --seed ...`) writes one residual trace and
/// appends a row to summary.csv; a sweep (`--seeds a,b,c`) runs the full
/// algorithm × kernel grid and writes table.csv with medians and IQRs.
#[derive(Parser)]
#[command(name = "asap-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball-constrained nonconvex quadratic programming
    Qp(RunArgs),
    /// Capped-l1 sparse logistic regression
    Logreg(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgArg {
    Asap,
    Aasap,
    Alg1,
    Alg1f,
    Alg2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BregmanArg {
    Is,
    Euclid,
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm preset (required for a single run; a grid runs them all)
    #[arg(long, value_enum)]
    alg: Option<AlgArg>,
    /// x-block Bregman kernel (single run only; a grid runs both)
    #[arg(long, value_enum)]
    bregman: Option<BregmanArg>,
    /// Initialize the backtracking stepsize with the BB rule
    #[arg(long)]
    bb: bool,
    /// Sample count (QP dimension)
    #[arg(long)]
    n: Option<usize>,
    /// Feature dimension (logistic regression only)
    #[arg(long)]
    d: Option<usize>,
    /// Seed for a single run
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seed list; triggers the full grid
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Stopping tolerance on the residual
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget
    #[arg(long)]
    max_iter: Option<usize>,
    /// Coupling penalty override
    #[arg(long)]
    mu: Option<f64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Full-size instances (QP n=500; logistic n=500, d=200)
    #[arg(long)]
    paper_scale: bool,
    /// Permit schedules that leave the alpha + beta < 1 region
    #[arg(long)]
    unsafe_schedule: bool,
}

fn build_config(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(experiment, args.out.clone());
    if args.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(max_iter) = args.max_iter {
        cfg.max_iter = max_iter;
    }
    cfg.mu = args.mu;
    cfg.bb = args.bb;
    cfg.unsafe_schedule = args.unsafe_schedule;
    Ok(cfg)
}

fn apply_alg(cfg: &mut ExperimentConfig, alg: AlgArg) {
    let (algorithm, over) = match alg {
        AlgArg::Asap => (Algorithm::Asap, None),
        AlgArg::Aasap => (Algorithm::AAsap, None),
        AlgArg::Alg1 => (Algorithm::Alg1, None),
        AlgArg::Alg1f => (Algorithm::Alg1, Some(ScheduleOverride::Ratio)),
        AlgArg::Alg2 => (Algorithm::Alg2, None),
    };
    cfg.algorithm = algorithm;
    cfg.schedule_override = over;
}

fn dispatch(experiment: Experiment, args: RunArgs) -> Result<u8> {
    let mut cfg = build_config(experiment, &args)?;
    match &args.seeds {
        Some(seeds) => {
            anyhow::ensure!(
                args.alg.is_none() && args.bregman.is_none() && args.seed.is_none(),
                "--seeds runs the full grid; drop --alg/--bregman/--seed"
            );
            run_grid(&cfg, seeds)?;
            println!(
                "grid complete: table.csv and per-cell traces in {}",
                cfg.out_dir.display()
            );
            Ok(0)
        }
        None => {
            let alg = args
                .alg
                .ok_or_else(|| anyhow::anyhow!("--alg is required for a single run"))?;
            apply_alg(&mut cfg, alg);
            cfg.bregman_x = match args.bregman.unwrap_or(BregmanArg::Euclid) {
                BregmanArg::Is => asap_core::Kind::ItakuraSaito,
                BregmanArg::Euclid => asap_core::Kind::SquaredEuclidean,
            };
            cfg.seed = args.seed.unwrap_or(0);
            let out = run_experiment(&cfg)?;
            println!(
                "{}: iter={} extrapolation={} converged={} trace={}",
                cfg.cell_label(),
                out.summary.iterations,
                out.summary.extrapolation,
                out.summary.converged,
                out.trace_path.display()
            );
            Ok(if out.summary.converged { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders its own message (help text or diagnostic)
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Qp(args) => dispatch(Experiment::Qp, args),
        Command::Logreg(args) => dispatch(Experiment::LogReg, args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
