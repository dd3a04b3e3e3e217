//! `mmdbo`: command-line entry point of the experiment harness.
//!
//! Verbs:
//! - `run`: execute a configured optimization study and write its traces;
//! - `bench-inference`: time posterior inference across estimator sizes;
//! - `diagnose`: dump 1D posterior cross-sections per surrogate;
//! - `summarize`: aggregate finished traces per iteration;
//! - `precompute`: evaluate a problem's robust optimum with the oracle.
//!
//! `run` exits with status 0 only if every repeat completed; any failed
//! repeat leaves a machine-readable row in `<output>.errors.csv` and
//! flips the exit status to 1. Other verbs exit 1 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mmdbo_cli::bench::{bench_csv, bench_inference, reference_entries, BenchSettings};
use mmdbo_cli::config::{Algorithm, EstimatorSettings, ExperimentConfig};
use mmdbo_cli::diagnose::{diagnose_posterior, diagnosis_csv};
use mmdbo_cli::runner::{errors_path, execute, write_file};
use mmdbo_cli::summary::{summarize, summary_csv};
use mmdbo_core::problems::BenchmarkProblem;
use mmdbo_core::{InputDistribution, Result};

#[derive(Parser)]
#[command(
    name = "mmdbo",
    about = "Experiment harness for distribution-aware Bayesian optimization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured optimization study.
    Run(RunArgs),
    /// Time posterior inference for the reference estimator settings.
    BenchInference(BenchArgs),
    /// Dump posterior mean and variance over a grid for 1D problems.
    Diagnose(DiagnoseArgs),
    /// Aggregate regret traces into per-iteration statistics.
    Summarize(SummarizeArgs),
    /// Precompute a problem's robust optimum and print it as JSON.
    Precompute(PrecomputeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    config: PathBuf,
    /// Override the configured problem name.
    #[arg(long)]
    problem: Option<String>,
    /// Override the configured algorithm id.
    #[arg(long)]
    algorithm: Option<String>,
    /// Override the estimator sampling size.
    #[arg(long)]
    m: Option<usize>,
    /// Override the landmark count (mmdgp_nystrom only).
    #[arg(long)]
    h: Option<usize>,
    /// Override the UCB exploration weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Override the iteration budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Override the initial design size.
    #[arg(long)]
    init_points: Option<usize>,
    /// Override the repeat count.
    #[arg(long)]
    repeats: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    base_seed: Option<u64>,
    /// Override the regret oracle sample count.
    #[arg(long)]
    n_mc_regret: Option<usize>,
    /// Override the trace output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override timing-column emission (true/false).
    #[arg(long)]
    record_timing: Option<bool>,
}

#[derive(Args)]
struct BenchArgs {
    /// Training-set size per row.
    #[arg(long, default_value_t = 8)]
    n_train: usize,
    /// Query distributions per timed pass.
    #[arg(long, default_value_t = 512)]
    n_test: usize,
    /// Measured passes per row.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Discarded warm-up passes per row.
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Memory budget in bytes for batch sizing.
    #[arg(long, default_value_t = mmdbo_cli::bench::DEFAULT_MEMORY_BUDGET)]
    memory_budget_bytes: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Path to the JSON experiment configuration.
    config: PathBuf,
    /// Algorithms to dump; defaults to the configured one. Repeatable.
    #[arg(long = "algorithm")]
    algorithms: Vec<String>,
    /// Grid resolution over the domain.
    #[arg(long, default_value_t = 201)]
    grid: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Trace CSVs to aggregate.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PrecomputeArgs {
    /// Benchmark problem name.
    #[arg(long)]
    problem: String,
    /// JSON input-law override applied before precomputing.
    #[arg(long)]
    law: Option<String>,
    /// Grid density of the oracle sweep.
    #[arg(long, default_value_t = 801)]
    grid_density: usize,
    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 20_000)]
    n_mc: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run(args) => run(args),
        Command::BenchInference(args) => bench(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Summarize(args) => do_summarize(args),
        Command::Precompute(args) => precompute(args),
    };
    match status {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::from_json_file(&args.config)?;
    apply_overrides(&mut cfg, &args)?;
    let report = execute(&cfg)?;
    let completed = report.outcomes.len();
    let failed = report.failures.len();
    println!(
        "wrote {} ({completed} repeat(s) complete, {failed} failed)",
        cfg.output.display()
    );
    if failed > 0 {
        eprintln!(
            "failures recorded in {}",
            errors_path(&cfg.output).display()
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<()> {
    if let Some(problem) = &args.problem {
        cfg.problem = problem.clone();
    }
    if let Some(algorithm) = &args.algorithm {
        cfg.algorithm = algorithm.clone();
    }
    let estimator = EstimatorSettings {
        m: args.m.unwrap_or(cfg.estimator.m),
        h: args.h.or(cfg.estimator.h),
    };
    cfg.estimator = estimator;
    if let Some(beta) = args.beta {
        cfg.acquisition.beta = beta;
    }
    if let Some(budget) = args.budget {
        cfg.budget = budget;
    }
    if let Some(init_points) = args.init_points {
        cfg.init_points = init_points;
    }
    if let Some(repeats) = args.repeats {
        cfg.repeats = repeats;
    }
    if let Some(base_seed) = args.base_seed {
        cfg.base_seed = base_seed;
    }
    if let Some(n_mc_regret) = args.n_mc_regret {
        cfg.n_mc_regret = n_mc_regret;
    }
    if let Some(output) = &args.output {
        cfg.output = output.clone();
    }
    if let Some(record_timing) = args.record_timing {
        cfg.record_timing = record_timing;
    }
    cfg.validate()
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let settings = BenchSettings {
        n_train: args.n_train,
        n_test: args.n_test,
        reps: args.reps,
        warmup: args.warmup,
        memory_budget_bytes: args.memory_budget_bytes,
        batch_candidates: Vec::new(),
        seed: args.seed,
    };
    let rows = bench_inference(&reference_entries(), &settings)?;
    emit(args.output.as_deref(), &bench_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn diagnose(args: DiagnoseArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig::from_json_file(&args.config)?;
    let algorithms: Vec<Algorithm> = if args.algorithms.is_empty() {
        vec![cfg.algorithm()?]
    } else {
        args.algorithms
            .iter()
            .map(|id| Algorithm::parse(id))
            .collect::<Result<_>>()?
    };
    let diagnosis = diagnose_posterior(&cfg, &algorithms, args.grid)?;
    emit(args.output.as_deref(), &diagnosis_csv(&diagnosis.rows))?;
    Ok(ExitCode::SUCCESS)
}

fn do_summarize(args: SummarizeArgs) -> Result<ExitCode> {
    let rows = summarize(&args.inputs)?;
    emit(args.output.as_deref(), &summary_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn precompute(args: PrecomputeArgs) -> Result<ExitCode> {
    let mut problem = BenchmarkProblem::by_name(&args.problem)?;
    if let Some(law_text) = &args.law {
        let law: InputDistribution = serde_json::from_str(law_text).map_err(|e| {
            mmdbo_core::Error::Config(format!("invalid input-law JSON: {e}"))
        })?;
        problem = problem.with_input_law(law)?;
    }
    let (optimizer, value) =
        problem.precompute_robust_optimum(args.grid_density, args.n_mc, args.seed)?;
    let robust = problem
        .robust_optimum()
        .expect("robust optimum was just computed");
    let doc = serde_json::json!({
        "problem": problem.name(),
        "input_law": problem.input_law(),
        "optimizer": optimizer.iter().copied().collect::<Vec<f64>>(),
        "value": value,
        "provenance": robust.provenance,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"));
    emit(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn emit(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            write_file(p, text)?;
            println!("wrote {}", p.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
