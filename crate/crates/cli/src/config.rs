//! Experiment configuration: a single JSON document describing one study.
//!
//! A configuration names a benchmark problem (with optional input-law and
//! noise overrides), picks one of the six surrogate algorithms, and fixes
//! every knob that affects the run: estimator sizes, acquisition controls,
//! budget, initial design size, repeat count, seeds, the regret oracle's
//! sample count and the output path. Unknown keys are rejected so typos
//! fail fast instead of silently running a different experiment.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mmdbo_core::acquisition::AcquisitionOptions;
use mmdbo_core::kernel::BaseKernelParams;
use mmdbo_core::problems::{BenchmarkProblem, ORACLE_MIN_MC};
use mmdbo_core::surrogate::{SurrogateKind, SurrogateModel};
use mmdbo_core::{EstimatorConfig, Error, InputDistribution, Result};

/// The six supported optimizer configurations. Each pairs a surrogate with
/// the UCB acquisition; the id doubles as the `algo` column in trace CSVs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MmdgpEmpirical,
    MmdgpNystrom,
    GpUcb,
    SklUcb,
    ErbfUcb,
    UgpUcb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::MmdgpEmpirical,
        Algorithm::MmdgpNystrom,
        Algorithm::GpUcb,
        Algorithm::SklUcb,
        Algorithm::ErbfUcb,
        Algorithm::UgpUcb,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::MmdgpEmpirical => "mmdgp_empirical",
            Algorithm::MmdgpNystrom => "mmdgp_nystrom",
            Algorithm::GpUcb => "gp_ucb",
            Algorithm::SklUcb => "skl_ucb",
            Algorithm::ErbfUcb => "erbf_ucb",
            Algorithm::UgpUcb => "ugp_ucb",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == id)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm {id:?}; expected one of {}",
                    Algorithm::ALL.map(|a| a.id()).join(", ")
                ))
            })
    }

    fn needs_landmarks(&self) -> bool {
        matches!(self, Algorithm::MmdgpNystrom)
    }
}

/// Sampling sizes for the distribution-distance estimators. `m` is the
/// batch size per distribution; `h` is the landmark count and is only
/// meaningful (and only accepted) for `mmdgp_nystrom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub h: Option<usize>,
}

fn default_m() -> usize {
    64
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            m: default_m(),
            h: None,
        }
    }
}

/// Acquisition-search controls, mirroring [`AcquisitionOptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionSettings {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_prescan_grid")]
    pub prescan_grid: usize,
    #[serde(default = "default_max_local_steps")]
    pub max_local_steps: usize,
}

fn default_beta() -> f64 {
    2.0
}
fn default_restarts() -> usize {
    4
}
fn default_prescan_grid() -> usize {
    64
}
fn default_max_local_steps() -> usize {
    30
}

impl Default for AcquisitionSettings {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            restarts: default_restarts(),
            prescan_grid: default_prescan_grid(),
            max_local_steps: default_max_local_steps(),
        }
    }
}

impl AcquisitionSettings {
    pub fn to_options(self) -> AcquisitionOptions {
        AcquisitionOptions {
            beta: self.beta,
            prescan_grid: self.prescan_grid,
            restarts: self.restarts,
            max_local_steps: self.max_local_steps,
        }
    }
}

/// Oracle settings used to fill in a problem's robust optimum when a
/// configuration overrides the input law and the shipped value no longer
/// applies. The defaults match the provenance of the bundled problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecomputeSettings {
    #[serde(default = "default_grid_density")]
    pub grid_density: usize,
    #[serde(default = "default_precompute_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_precompute_seed")]
    pub seed: u64,
}

fn default_grid_density() -> usize {
    801
}
fn default_precompute_n_mc() -> usize {
    20_000
}
fn default_precompute_seed() -> u64 {
    2024
}

impl Default for PrecomputeSettings {
    fn default() -> Self {
        Self {
            grid_density: default_grid_density(),
            n_mc: default_precompute_n_mc(),
            seed: default_precompute_seed(),
        }
    }
}

/// One experiment: a problem, an algorithm and every knob of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of a bundled benchmark problem.
    pub problem: String,
    /// Replaces the problem's input law; triggers a robust-optimum
    /// precomputation because the shipped one is law-specific.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_law: Option<InputDistribution>,
    /// Replaces the problem's observation noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation_noise_sd: Option<f64>,
    /// One of `mmdgp_empirical`, `mmdgp_nystrom`, `gp_ucb`, `skl_ucb`,
    /// `erbf_ucb`, `ugp_ucb`.
    pub algorithm: String,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub acquisition: AcquisitionSettings,
    /// Number of optimization iterations after the initial design.
    pub budget: usize,
    /// Size of the low-discrepancy initial design.
    pub init_points: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Repeat `r` runs with seed `base_seed + r`.
    pub base_seed: u64,
    /// Monte Carlo draws per robust-regret oracle call.
    #[serde(default = "default_n_mc_regret")]
    pub n_mc_regret: usize,
    /// Trace CSV path; failures go to `<output>.errors.csv`.
    pub output: PathBuf,
    /// Include per-phase wall-clock columns in the CSV. Off by default so
    /// that rerunning a configuration reproduces the artifact byte for
    /// byte.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub precompute: PrecomputeSettings,
}

fn default_repeats() -> usize {
    1
}

fn default_n_mc_regret() -> usize {
    2_000
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::parse(&self.algorithm)
    }

    pub fn validate(&self) -> Result<()> {
        BenchmarkProblem::by_name(&self.problem)?;
        let algorithm = self.algorithm()?;
        if self.budget < 1 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.init_points < 2 {
            return Err(Error::Config("init_points must be at least 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.n_mc_regret < ORACLE_MIN_MC {
            return Err(Error::Config(format!(
                "n_mc_regret must be at least {ORACLE_MIN_MC}, got {}",
                self.n_mc_regret
            )));
        }
        if self.estimator.m < 2 {
            return Err(Error::Config(format!(
                "estimator.m must be at least 2, got {}",
                self.estimator.m
            )));
        }
        match (algorithm.needs_landmarks(), self.estimator.h) {
            (true, None) => {
                return Err(Error::Config(
                    "mmdgp_nystrom requires estimator.h (the landmark count)".into(),
                ));
            }
            (false, Some(_)) => {
                return Err(Error::Config(format!(
                    "estimator.h only applies to mmdgp_nystrom, not {}",
                    self.algorithm
                )));
            }
            _ => {}
        }
        if let Some(sd) = self.observation_noise_sd {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(Error::Config(format!(
                    "observation_noise_sd must be finite and nonnegative, got {sd}"
                )));
            }
        }
        self.acquisition.to_options().validate()?;
        Ok(())
    }
}

/// Builds the surrogate model an algorithm id maps to. The base kernel is
/// the rational-quadratic mixture everywhere except `erbf_ucb`, whose
/// expected-kernel closed form exists for the RBF base; initial
/// lengthscales are placeholders that fitting replaces through the median
/// heuristic.
pub fn build_model(
    algorithm: Algorithm,
    estimator: EstimatorSettings,
    law: InputDistribution,
    domain_diameter: f64,
    seed: u64,
) -> Result<SurrogateModel> {
    let ls0 = 0.2 * domain_diameter;
    let base = match algorithm {
        Algorithm::ErbfUcb => BaseKernelParams::rbf(ls0),
        _ => BaseKernelParams::rq_mixture(ls0),
    };
    let kind = match algorithm {
        Algorithm::MmdgpEmpirical | Algorithm::MmdgpNystrom => SurrogateKind::MmdGp,
        Algorithm::GpUcb => SurrogateKind::VanillaGp,
        Algorithm::SklUcb => SurrogateKind::Skl,
        Algorithm::ErbfUcb => SurrogateKind::Erbf,
        Algorithm::UgpUcb => SurrogateKind::Ugp { m: estimator.m },
    };
    let est = match algorithm {
        Algorithm::MmdgpNystrom => {
            let h = estimator.h.ok_or_else(|| {
                Error::Config("mmdgp_nystrom requires estimator.h".into())
            })?;
            EstimatorConfig::nystrom(estimator.m, h)
        }
        _ => EstimatorConfig::empirical(estimator.m),
    };
    SurrogateModel::new(kind, base, est, law, domain_diameter, seed)
}
