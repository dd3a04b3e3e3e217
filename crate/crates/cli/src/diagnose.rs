//! Posterior cross-sections for visual comparison of surrogates.
//!
//! For a one-dimensional problem, every requested algorithm is fitted on
//! the same seeded 10-point design and its posterior mean and variance
//! are dumped over a uniform grid. The rows regenerate the side-by-side
//! posterior plots that motivate the distribution-aware kernel: a point
//! GP interpolating noise-free observations, the distribution GP reacting
//! asymmetrically to a one-sided input law, and the moment-matching
//! baselines smoothing that structure away.
//!
//! Unlike the optimization loop, targets are fitted raw (no
//! standardization and no sign flip), so the dumped means live on the
//! observed scale and can be compared against the raw observations.

use std::fmt::Write as _;

use nalgebra::DVector;

use mmdbo_core::acquisition::low_discrepancy_design;
use mmdbo_core::rng::derive_seed;
use mmdbo_core::surrogate::FitOptions;
use mmdbo_core::{Error, Result};

use crate::config::{build_model, Algorithm, ExperimentConfig};
use crate::runner::prepare_problem;

const INIT_TAG: u64 = 21;
const OBSERVE_TAG: u64 = 22;
const MODEL_TAG: u64 = 25;

/// Number of design points every diagnosis fits on.
pub const DESIGN_POINTS: usize = 10;

/// One grid evaluation of one model's posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisRow {
    pub model: &'static str,
    pub x: f64,
    pub mean: f64,
    pub var: f64,
}

/// The fitted design behind a diagnosis, exposed so tests can compare
/// posterior means against the actual observations.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    pub design: Vec<f64>,
    pub observations: Vec<f64>,
    /// Fitted observation-noise variance per requested algorithm, in
    /// argument order; the scale against which mean residuals at the
    /// design points should be judged.
    pub fitted_noise: Vec<f64>,
    pub rows: Vec<DiagnosisRow>,
}

/// Fits each algorithm on the shared design and dumps posteriors over a
/// `grid`-point uniform sweep of the domain.
pub fn diagnose_posterior(
    cfg: &ExperimentConfig,
    algorithms: &[Algorithm],
    grid: usize,
) -> Result<Diagnosis> {
    cfg.validate()?;
    if algorithms.is_empty() {
        return Err(Error::Config("diagnosis needs at least one algorithm".into()));
    }
    if grid < 2 {
        return Err(Error::Config("grid must have at least 2 points".into()));
    }
    let problem = prepare_problem(cfg)?;
    if problem.dim() != 1 {
        return Err(Error::Config(format!(
            "posterior diagnosis is one-dimensional; {} has dim {}",
            problem.name(),
            problem.dim()
        )));
    }
    let domain = problem.domain();
    let seed = cfg.base_seed;
    let design = low_discrepancy_design(&domain, DESIGN_POINTS, derive_seed(seed, &[INIT_TAG]))?;
    let mut ys = Vec::with_capacity(design.len());
    for (i, x) in design.iter().enumerate() {
        ys.push(problem.observe(x, derive_seed(seed, &[OBSERVE_TAG, i as u64]))?);
    }

    let lo = domain.lower[0];
    let hi = domain.upper[0];
    let grid_points: Vec<DVector<f64>> = (0..grid)
        .map(|i| {
            let t = i as f64 / (grid - 1) as f64;
            DVector::from_element(1, lo + t * (hi - lo))
        })
        .collect();

    let mut rows = Vec::with_capacity(algorithms.len() * grid);
    let mut fitted_noise = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let mut model = build_model(
            algorithm,
            cfg.estimator,
            problem.input_law().clone(),
            domain.diameter(),
            derive_seed(seed, &[MODEL_TAG]),
        )?;
        model.set_data(&design, &ys)?;
        model.fit(&FitOptions::default())?;
        fitted_noise.push(model.noise_var());
        let posts = model.posterior(&grid_points)?;
        for (x, p) in grid_points.iter().zip(posts) {
            rows.push(DiagnosisRow {
                model: algorithm.id(),
                x: x[0],
                mean: p.mean,
                var: p.var,
            });
        }
    }
    Ok(Diagnosis {
        design: design.iter().map(|x| x[0]).collect(),
        observations: ys,
        fitted_noise,
        rows,
    })
}

/// Renders rows as `model,x,mean,var`.
pub fn diagnosis_csv(rows: &[DiagnosisRow]) -> String {
    let mut text = String::from("model,x,mean,var\n");
    for r in rows {
        writeln!(text, "{},{},{},{}", r.model, r.x, r.mean, r.var).expect("string write");
    }
    text
}
