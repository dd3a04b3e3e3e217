//! The optimization loop and multi-repeat studies.
//!
//! One repeat runs the classic cycle: fit the surrogate, maximize the
//! acquisition, evaluate the chosen design point through the noisy
//! process, recommend the best visited center from the posterior and score
//! that recommendation against the problem's precomputed robust optimum.
//! Every random decision derives from `base_seed + repeat_index` through
//! tagged seed derivation, so a (config, repeat) pair maps to exactly one
//! trace. Repeats are independent jobs; one repeat failing is recorded as
//! a machine-readable row in a sibling `.errors.csv` file while the other
//! repeats proceed.
//!
//! The surrogate only ever sees requested centers and realized objective
//! values. Perturbed inputs stay inside the problem's observation oracle,
//! so no algorithm can condition on where an evaluation actually landed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use mmdbo_core::acquisition::{low_discrepancy_design, maximize_acquisition, outcome};
use mmdbo_core::problems::{BenchmarkProblem, RegretRecord, RegretTrace, Sense};
use mmdbo_core::rng::derive_seed;
use mmdbo_core::surrogate::FitOptions;
use mmdbo_core::{Error, Result};

use crate::config::{build_model, ExperimentConfig};

const INIT_TAG: u64 = 21;
const OBSERVE_TAG: u64 = 22;
const ACQ_TAG: u64 = 23;
const REGRET_TAG: u64 = 24;
const MODEL_TAG: u64 = 25;

/// Floor applied to the standard deviation when standardizing targets, so
/// constant observations do not divide by zero.
const STD_FLOOR: f64 = 1e-12;

/// Result of one successful repeat.
#[derive(Debug, Clone)]
pub struct RepeatOutcome {
    pub trace: RegretTrace,
    /// Total objective evaluations spent: `init_points + budget`.
    pub n_observations: usize,
}

/// One failed repeat, kept machine-readable for the error CSV.
#[derive(Debug, Clone)]
pub struct RepeatFailure {
    pub repeat: usize,
    pub seed: u64,
    /// Loop phase that failed: `prepare`, `init`, `fit`, `acquire`,
    /// `observe`, `outcome`, `regret` or `record`.
    pub stage: &'static str,
    pub message: String,
}

/// Everything a study produced: traces in repeat order plus failures.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub outcomes: Vec<RepeatOutcome>,
    pub failures: Vec<RepeatFailure>,
}

impl RunReport {
    pub fn all_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Resolves the configured problem: applies law and noise overrides and
/// guarantees a robust optimum is available, precomputing one with the
/// config's oracle settings when an override invalidated the shipped
/// value.
pub fn prepare_problem(cfg: &ExperimentConfig) -> Result<BenchmarkProblem> {
    let mut problem = BenchmarkProblem::by_name(&cfg.problem)?;
    if let Some(law) = &cfg.input_law {
        problem = problem.with_input_law(law.clone())?;
    }
    if let Some(sd) = cfg.observation_noise_sd {
        problem = problem.with_observation_noise_sd(sd)?;
    }
    if problem.robust_optimum().is_none() {
        let p = cfg.precompute;
        problem.precompute_robust_optimum(p.grid_density, p.n_mc, p.seed)?;
    }
    Ok(problem)
}

fn fail(stage: &'static str) -> impl Fn(Error) -> (&'static str, Error) {
    move |e| (stage, e)
}

fn run_bo_inner(
    cfg: &ExperimentConfig,
    problem: &BenchmarkProblem,
    repeat_index: usize,
) -> std::result::Result<RepeatOutcome, (&'static str, Error)> {
    let algorithm = cfg.algorithm().map_err(fail("prepare"))?;
    let seed = cfg.base_seed + repeat_index as u64;
    let domain = problem.domain();
    let acq_opts = cfg.acquisition.to_options();
    let fit_opts = FitOptions::default();

    let mut model = build_model(
        algorithm,
        cfg.estimator,
        problem.input_law().clone(),
        domain.diameter(),
        derive_seed(seed, &[MODEL_TAG]),
    )
    .map_err(fail("prepare"))?;

    let init = low_discrepancy_design(&domain, cfg.init_points, derive_seed(seed, &[INIT_TAG]))
        .map_err(fail("init"))?;
    let mut centers: Vec<DVector<f64>> = Vec::with_capacity(cfg.init_points + cfg.budget);
    let mut ys: Vec<f64> = Vec::with_capacity(cfg.init_points + cfg.budget);
    for (i, x) in init.into_iter().enumerate() {
        let y = problem
            .observe(&x, derive_seed(seed, &[OBSERVE_TAG, i as u64]))
            .map_err(fail("init"))?;
        centers.push(x);
        ys.push(y);
    }

    let run_id = format!("{}-r{repeat_index}", algorithm.id());
    let mut trace = RegretTrace::new(run_id, algorithm.id(), problem.name(), seed);

    for iter in 0..cfg.budget {
        let oriented = orient_and_standardize(&ys, problem.sense());
        model.set_data(&centers, &oriented).map_err(fail("fit"))?;
        let t_fit = Instant::now();
        model.fit(&fit_opts).map_err(fail("fit"))?;
        let inference_ms = t_fit.elapsed().as_secs_f64() * 1e3;

        let t_acq = Instant::now();
        let picked = maximize_acquisition(
            &model,
            &domain,
            &acq_opts,
            derive_seed(seed, &[ACQ_TAG, iter as u64]),
        )
        .map_err(fail("acquire"))?;
        let acquisition_ms = t_acq.elapsed().as_secs_f64() * 1e3;

        let obs_index = (cfg.init_points + iter) as u64;
        let y_new = problem
            .observe(&picked.x, derive_seed(seed, &[OBSERVE_TAG, obs_index]))
            .map_err(fail("observe"))?;

        let best = outcome(&model).map_err(fail("outcome"))?;
        let regret = problem
            .robust_regret(
                &best.center,
                cfg.n_mc_regret,
                derive_seed(seed, &[REGRET_TAG, iter as u64]),
            )
            .map_err(fail("regret"))?;

        trace
            .push(RegretRecord {
                iter,
                x_query: picked.x.iter().copied().collect(),
                y_observed: y_new,
                x_outcome: best.center.iter().copied().collect(),
                robust_regret: regret,
                inference_ms,
                acquisition_ms,
            })
            .map_err(fail("record"))?;

        centers.push(picked.x);
        ys.push(y_new);
    }

    Ok(RepeatOutcome {
        n_observations: centers.len(),
        trace,
    })
}

/// Runs one repeat of the configured study. The model always maximizes
/// internally: minimization problems are negated, and targets are
/// standardized against the current observation set before each fit.
pub fn run_bo(
    cfg: &ExperimentConfig,
    problem: &BenchmarkProblem,
    repeat_index: usize,
) -> std::result::Result<RepeatOutcome, RepeatFailure> {
    run_bo_inner(cfg, problem, repeat_index).map_err(|(stage, error)| RepeatFailure {
        repeat: repeat_index,
        seed: cfg.base_seed + repeat_index as u64,
        stage,
        message: error.to_string(),
    })
}

fn orient_and_standardize(ys: &[f64], sense: Sense) -> Vec<f64> {
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    let sd = var.sqrt().max(STD_FLOOR);
    ys.iter().map(|y| sign * (y - mean) / sd).collect()
}

/// Runs every repeat of the study (in parallel; each repeat is seeded
/// independently, so scheduling cannot change any result) and writes the
/// trace CSV plus, when needed, the error CSV. Returns the report so
/// callers can decide the exit status.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let problem = prepare_problem(cfg)?;
    let results: Vec<std::result::Result<RepeatOutcome, RepeatFailure>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| run_bo(cfg, &problem, r))
        .collect();

    let mut report = RunReport::default();
    for res in results {
        match res {
            Ok(outcome) => report.outcomes.push(outcome),
            Err(failure) => report.failures.push(failure),
        }
    }

    write_trace_csv(&cfg.output, cfg, &problem, &report.outcomes)?;
    let error_path = errors_path(&cfg.output);
    if report.failures.is_empty() {
        let _ = std::fs::remove_file(&error_path);
    } else {
        write_error_csv(&error_path, &report.failures)?;
    }
    Ok(report)
}

/// Sibling path holding machine-readable failure rows.
pub fn errors_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    name.push_str(".errors.csv");
    output.with_file_name(name)
}

fn write_trace_csv(
    path: &Path,
    cfg: &ExperimentConfig,
    problem: &BenchmarkProblem,
    outcomes: &[RepeatOutcome],
) -> Result<()> {
    let mut text = String::new();
    let dim = problem.dim();
    writeln!(
        text,
        "{}",
        RegretTrace::csv_header(dim, dim, cfg.record_timing)
    )
    .expect("string write");
    for outcome in outcomes {
        for row in outcome.trace.csv_rows(cfg.record_timing) {
            writeln!(text, "{row}").expect("string write");
        }
    }
    write_file(path, &text)
}

fn write_error_csv(path: &Path, failures: &[RepeatFailure]) -> Result<()> {
    let mut text = String::from("repeat,seed,stage,error\n");
    for f in failures {
        writeln!(
            text,
            "{},{},{},{}",
            f.repeat,
            f.seed,
            f.stage,
            csv_escape(&f.message)
        )
        .expect("string write");
    }
    write_file(path, &text)
}

/// Quotes a CSV field if it contains a delimiter, quote or line break.
pub fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes `text` to `path`, creating parent directories as needed.
pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                Error::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
