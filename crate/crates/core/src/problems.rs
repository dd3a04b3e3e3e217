//! Benchmark problems, the robust-expectation oracle, regret, and
//! diagnostics.
//!
//! Each problem couples a deterministic objective `f` with an input law:
//! querying a design point `x` evaluates `f` at a perturbed point drawn
//! from that law and adds observation noise. The quantity an optimizer is
//! judged on is therefore not `f(x)` but the robust expectation
//! `E[f(x')]`, and regret is measured against the precomputed maximizer
//! (or minimizer) of that expectation.
//!
//! Problem definitions are data, not code: coefficients, the input law,
//! the stored robust optimum and its basin decomposition live in JSON
//! assets embedded in the crate, together with the `(grid_density, n_mc,
//! seed)` triple that regenerates the optimum via
//! [`BenchmarkProblem::precompute_robust_optimum`]. The Monte-Carlo
//! expectation oracle here is deliberately independent of the surrogate
//! stack so it can serve as the reference implementation everything else
//! is checked against.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::acquisition::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::ln_det_i_plus_scaled;
use crate::rng::{derive_seed, stream};
use crate::udist::{self, InputDistribution};

/// Minimum Monte-Carlo draw count accepted by the expectation oracle.
pub const ORACLE_MIN_MC: usize = 1000;
/// Minimum grid density accepted by robust-optimum precomputation.
pub const PRECOMPUTE_MIN_GRID: usize = 9;
/// Interval width (in x) at which precompute refinement stops.
pub const REFINE_TOL: f64 = 1e-3;
/// Most negative robust regret a trace record may carry.
pub const REGRET_TOLERANCE: f64 = 1e-6;
/// Relative eigenvalue tolerance for the information-gain Gram check.
const INFO_GAIN_EIG_TOL: f64 = 1e-8;

const OBSERVE_DRAW_TAG: u64 = 11;
const OBSERVE_NOISE_TAG: u64 = 12;
const PRECOMPUTE_VALUE_TAG: u64 = 13;

const RKHS_1D_JSON: &str = include_str!("../assets/rkhs_1d.json");
const DOUBLE_PEAK_1D_JSON: &str = include_str!("../assets/double_peak_1d.json");
const BUMPED_BOWL_10D_JSON: &str = include_str!("../assets/bumped_bowl_10d.json");

/// Whether the robust expectation is to be maximized or minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// `true` if `a` is a strictly better objective value than `b`.
    pub fn is_improvement(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

/// One radial-basis bump of a [`ObjectiveSpec::BumpSum`] objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Parametric objective families. Coefficients come from the problem
/// assets; the evaluation itself is exact and noiseless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// One-dimensional weighted sum of Gaussian bumps.
    BumpSum { bumps: Vec<Bump> },
    /// Affine function, mostly useful for oracle sanity checks.
    Linear { weights: Vec<f64>, intercept: f64 },
    /// `g(x_{1:2}) * h(x_{3:})` with a log-shaped radial bowl
    /// `g(x) = 2 ln(slope * ||x||^2 + exp(-decay * ||x||^2)) + offset`
    /// over the first two coordinates and a quadratic
    /// `h(x) = 1 + tail_weight * sum x_i^2` over the rest.
    BumpedBowl {
        slope: f64,
        decay: f64,
        offset: f64,
        tail_weight: f64,
    },
}

impl ObjectiveSpec {
    /// Evaluates the objective without any domain bookkeeping. Perturbed
    /// draws may legitimately leave the search box, so this must accept
    /// any finite point of the right dimension.
    fn eval_raw(&self, x: &[f64]) -> f64 {
        match self {
            ObjectiveSpec::BumpSum { bumps } => {
                let t = x[0];
                bumps
                    .iter()
                    .map(|b| {
                        let d = t - b.center;
                        b.amplitude * (-d * d / (2.0 * b.width * b.width)).exp()
                    })
                    .sum()
            }
            ObjectiveSpec::Linear { weights, intercept } => {
                intercept + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            }
            ObjectiveSpec::BumpedBowl {
                slope,
                decay,
                offset,
                tail_weight,
            } => {
                let s = x[0] * x[0] + x[1] * x[1];
                let g = 2.0 * (slope * s + (-decay * s).exp()).ln() + offset;
                let tail: f64 = x[2..].iter().map(|v| v * v).sum();
                g * (1.0 + tail_weight * tail)
            }
        }
    }

    fn validate_for_dim(&self, dim: usize) -> Result<()> {
        match self {
            ObjectiveSpec::BumpSum { bumps } => {
                if dim != 1 {
                    return Err(Error::InvalidDistribution(
                        "bump_sum objectives are one-dimensional".into(),
                    ));
                }
                if bumps.is_empty() {
                    return Err(Error::Config("bump_sum needs at least one bump".into()));
                }
                for (i, b) in bumps.iter().enumerate() {
                    if !(b.amplitude.is_finite() && b.center.is_finite()) || !(b.width > 0.0) {
                        return Err(Error::Config(format!(
                            "bump {i} must have finite amplitude/center and positive width"
                        )));
                    }
                }
            }
            ObjectiveSpec::Linear { weights, intercept } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: weights.len(),
                    });
                }
                if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::NonFinite("linear objective coefficients"));
                }
            }
            ObjectiveSpec::BumpedBowl {
                slope,
                decay,
                offset,
                tail_weight,
            } => {
                if dim < 2 {
                    return Err(Error::Config(
                        "bumped_bowl needs at least 2 dimensions for the radial block".into(),
                    ));
                }
                if !(slope > &0.0 && decay > &0.0) || !offset.is_finite() || !(*tail_weight >= 0.0) {
                    return Err(Error::Config(
                        "bumped_bowl needs positive slope/decay, finite offset, non-negative tail_weight"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A labeled interval of a one-dimensional domain, used to report which
/// attraction basin of the robust surface a recommended point fell into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basin {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// Parameters the stored robust optimum was generated with, kept so the
/// numbers in an asset can be reproduced by rerunning precomputation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub grid_density: usize,
    pub n_mc: usize,
    pub seed: u64,
}

/// The precomputed robust optimum of a problem under its input law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustOptimum {
    /// Argmax (or argmin) of the robust expectation.
    pub optimizer: Vec<f64>,
    /// Robust expectation at the optimizer.
    pub value: f64,
    /// Basin decomposition of the robust surface; empty when the problem
    /// is not one-dimensional or basins were not computed.
    pub basins: Vec<Basin>,
    pub provenance: Provenance,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRepr {
    name: String,
    dim: usize,
    domain_lower: Vec<f64>,
    domain_upper: Vec<f64>,
    sense: Sense,
    objective: ObjectiveSpec,
    input_law: InputDistribution,
    observation_noise_sd: f64,
    #[serde(default)]
    robust: Option<RobustOptimum>,
}

/// A benchmark objective with its input law, observation noise, search
/// box and (optionally) precomputed robust optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr")]
pub struct BenchmarkProblem {
    name: String,
    dim: usize,
    domain_lower: Vec<f64>,
    domain_upper: Vec<f64>,
    sense: Sense,
    objective: ObjectiveSpec,
    input_law: InputDistribution,
    observation_noise_sd: f64,
    robust: Option<RobustOptimum>,
}

impl TryFrom<ProblemRepr> for BenchmarkProblem {
    type Error = Error;

    fn try_from(repr: ProblemRepr) -> Result<Self> {
        let problem = BenchmarkProblem {
            name: repr.name,
            dim: repr.dim,
            domain_lower: repr.domain_lower,
            domain_upper: repr.domain_upper,
            sense: repr.sense,
            objective: repr.objective,
            input_law: repr.input_law,
            observation_noise_sd: repr.observation_noise_sd,
            robust: repr.robust,
        };
        problem.validate()?;
        Ok(problem)
    }
}

impl BenchmarkProblem {
    /// Names of the problems shipped as crate assets.
    pub fn builtin_names() -> [&'static str; 3] {
        ["rkhs_1d", "double_peak_1d", "bumped_bowl_10d"]
    }

    /// Loads one of the built-in problems by name.
    pub fn by_name(name: &str) -> Result<Self> {
        let doc = match name {
            "rkhs_1d" => RKHS_1D_JSON,
            "double_peak_1d" => DOUBLE_PEAK_1D_JSON,
            "bumped_bowl_10d" => BUMPED_BOWL_10D_JSON,
            _ => {
                return Err(Error::Config(format!(
                    "unknown problem '{name}'; available: rkhs_1d, double_peak_1d, bumped_bowl_10d"
                )))
            }
        };
        let problem = Self::from_json_str(doc)?;
        if problem.name != name {
            return Err(Error::Config(format!(
                "asset for '{name}' declares name '{}'",
                problem.name
            )));
        }
        Ok(problem)
    }

    /// Parses and validates a problem from its JSON representation.
    pub fn from_json_str(doc: &str) -> Result<Self> {
        serde_json::from_str(doc).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("problem name must not be empty".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("problem dimension must be at least 1".into()));
        }
        if self.domain_lower.len() != self.dim || self.domain_upper.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.domain_lower.len().min(self.domain_upper.len()),
            });
        }
        for i in 0..self.dim {
            let (lo, hi) = (self.domain_lower[i], self.domain_upper[i]);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "domain bounds in coordinate {i} must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        self.objective.validate_for_dim(self.dim)?;
        if self.input_law.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.input_law.dim(),
            });
        }
        if !(self.observation_noise_sd.is_finite() && self.observation_noise_sd >= 0.0) {
            return Err(Error::Config(format!(
                "observation_noise_sd must be finite and non-negative, got {}",
                self.observation_noise_sd
            )));
        }
        if let Some(rob) = &self.robust {
            if rob.optimizer.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: rob.optimizer.len(),
                });
            }
            let x = DVector::from_column_slice(&rob.optimizer);
            self.check_domain(&x)?;
            if !rob.value.is_finite() {
                return Err(Error::NonFinite("robust optimum value"));
            }
            if !rob.basins.is_empty() && self.dim != 1 {
                return Err(Error::Config(
                    "basin decompositions are only defined for one-dimensional problems".into(),
                ));
            }
            for basin in &rob.basins {
                if !(basin.lower.is_finite() && basin.upper.is_finite() && basin.lower < basin.upper) {
                    return Err(Error::Config(format!(
                        "basin '{}' must have finite bounds with lower < upper",
                        basin.name
                    )));
                }
            }
            if rob.provenance.grid_density < 2 || rob.provenance.n_mc == 0 {
                return Err(Error::Config(
                    "robust optimum provenance must record a real grid and draw count".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn input_law(&self) -> &InputDistribution {
        &self.input_law
    }

    pub fn observation_noise_sd(&self) -> f64 {
        self.observation_noise_sd
    }

    pub fn robust_optimum(&self) -> Option<&RobustOptimum> {
        self.robust.as_ref()
    }

    pub fn robust_optimum_value(&self) -> Option<f64> {
        self.robust.as_ref().map(|r| r.value)
    }

    /// The search box as an acquisition-ready domain.
    pub fn domain(&self) -> BoxDomain {
        BoxDomain::new(
            DVector::from_column_slice(&self.domain_lower),
            DVector::from_column_slice(&self.domain_upper),
        )
        .expect("domain bounds validated at construction")
    }

    /// Replaces the input law, which invalidates any stored robust
    /// optimum: the robust surface depends on the law.
    pub fn with_input_law(mut self, law: InputDistribution) -> Result<Self> {
        if law.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: law.dim(),
            });
        }
        self.input_law = law;
        self.robust = None;
        Ok(self)
    }

    /// Replaces the observation noise level. The robust optimum is kept:
    /// it is a property of the noiseless expectation.
    pub fn with_observation_noise_sd(mut self, sd: f64) -> Result<Self> {
        if !(sd.is_finite() && sd >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "observation_noise_sd",
                message: format!("must be finite and non-negative, got {sd}"),
            });
        }
        self.observation_noise_sd = sd;
        Ok(self)
    }

    fn check_domain(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for i in 0..self.dim {
            let (lo, hi) = (self.domain_lower[i], self.domain_upper[i]);
            if !(x[i] >= lo && x[i] <= hi) {
                return Err(Error::OutOfDomain {
                    coord: i,
                    value: x[i],
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Exact, noiseless objective value at an in-domain point.
    pub fn eval_objective(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.objective.eval_raw(x.as_slice()))
    }

    /// One noisy observation at the design point `x`: a single perturbed
    /// point is drawn from the input law, the objective is evaluated
    /// there, and Gaussian observation noise is added. The realized
    /// perturbed point is intentionally not returned.
    pub fn observe(&self, x: &DVector<f64>, seed: u64) -> Result<f64> {
        self.check_domain(x)?;
        let batch = udist::sample(&self.input_law, x, 2, derive_seed(seed, &[OBSERVE_DRAW_TAG]))?;
        let mut point = vec![0.0; self.dim];
        for j in 0..self.dim {
            point[j] = batch.points[(0, j)];
        }
        let noise: f64 = stream(derive_seed(seed, &[OBSERVE_NOISE_TAG])).sample(StandardNormal);
        Ok(self.objective.eval_raw(&point) + self.observation_noise_sd * noise)
    }

    /// Monte-Carlo estimate of the robust expectation `E[f(x')]` with its
    /// standard error. This is the brute-force reference every derived
    /// quantity is checked against, so it stays independent of the
    /// surrogate machinery. A point-mass law returns `(f(x), 0)` exactly.
    pub fn expected_value_oracle(&self, x: &DVector<f64>, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
        self.check_domain(x)?;
        if n_mc < ORACLE_MIN_MC {
            return Err(Error::McSampleCount {
                got: n_mc,
                min: ORACLE_MIN_MC,
            });
        }
        if self.input_law.is_dirac() {
            return Ok((self.objective.eval_raw(x.as_slice()), 0.0));
        }
        let batch = udist::sample(&self.input_law, x, n_mc, seed)?;
        let mut values = Vec::with_capacity(n_mc);
        let mut point = vec![0.0; self.dim];
        for i in 0..n_mc {
            for j in 0..self.dim {
                point[j] = batch.points[(i, j)];
            }
            values.push(self.objective.eval_raw(&point));
        }
        let mean = values.iter().sum::<f64>() / n_mc as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_mc as f64 - 1.0);
        Ok((mean, (var / n_mc as f64).sqrt()))
    }

    /// Robust regret of recommending `x`: the gap between the stored
    /// robust optimum value and the oracle expectation at `x`, oriented
    /// by the problem sense and clamped at zero (small negatives are
    /// Monte-Carlo noise, not negative regret).
    pub fn robust_regret(&self, x: &DVector<f64>, n_mc: usize, seed: u64) -> Result<f64> {
        let rob = self.robust.as_ref().ok_or(Error::MissingPrecompute)?;
        let (est, _) = self.expected_value_oracle(x, n_mc, seed)?;
        let raw = match self.sense {
            Sense::Maximize => rob.value - est,
            Sense::Minimize => est - rob.value,
        };
        Ok(raw.max(0.0))
    }

    /// Grid-plus-refinement search for the robust optimum, stored on the
    /// problem and returned.
    ///
    /// One-dimensional problems sweep the domain directly. The bumped
    /// bowl is radially symmetric in its first two coordinates and
    /// separable in the rest, so its search runs over the 1D radial
    /// profile `(t, 0, ..., 0)` with tail coordinates pinned at zero.
    /// All grid evaluations share one oracle seed, so the sweep compares
    /// candidates under common random numbers; the final value is
    /// re-estimated with independent draws to avoid the selection bias
    /// of reporting the winning candidate's own estimate.
    ///
    /// Fails with [`Error::PrecomputeUnstable`] when the top two separated
    /// candidates differ by less than twice their combined standard
    /// errors, i.e. when `n_mc` is too small to rank them.
    pub fn precompute_robust_optimum(
        &mut self,
        grid_density: usize,
        n_mc: usize,
        seed: u64,
    ) -> Result<(DVector<f64>, f64)> {
        if grid_density < PRECOMPUTE_MIN_GRID {
            return Err(Error::InvalidParameter {
                name: "grid_density",
                message: format!("need at least {PRECOMPUTE_MIN_GRID} grid points, got {grid_density}"),
            });
        }
        let radial = matches!(self.objective, ObjectiveSpec::BumpedBowl { .. }) && self.dim > 1;
        if self.dim != 1 && !radial {
            return Err(Error::InvalidParameter {
                name: "problem",
                message: "precomputation supports one-dimensional problems and the bumped bowl's radial profile"
                    .into(),
            });
        }
        let (lo, hi) = if radial {
            (0.0, self.domain_upper[0])
        } else {
            (self.domain_lower[0], self.domain_upper[0])
        };
        let step = (hi - lo) / (grid_density as f64 - 1.0);

        let mut estimates = Vec::with_capacity(grid_density);
        let mut errors = Vec::with_capacity(grid_density);
        for i in 0..grid_density {
            let center = profile_center(self.dim, lo + step * i as f64);
            let (est, se) = self.expected_value_oracle(&center, n_mc, seed)?;
            estimates.push(est);
            errors.push(se);
        }
        let mut best = 0;
        for i in 1..grid_density {
            if self.sense.is_improvement(estimates[i], estimates[best]) {
                best = i;
            }
        }
        let window = (grid_density / 50).max(2);
        let mut runner: Option<usize> = None;
        for i in 0..grid_density {
            if i.abs_diff(best) <= window {
                continue;
            }
            if runner.is_none_or(|r| self.sense.is_improvement(estimates[i], estimates[r])) {
                runner = Some(i);
            }
        }
        if let Some(r) = runner {
            let gap = (estimates[best] - estimates[r]).abs();
            let combined = errors[best] + errors[r];
            if gap < 2.0 * combined {
                return Err(Error::PrecomputeUnstable(format!(
                    "candidates at t={:.6} and t={:.6} differ by {:.3e} against a combined oracle standard error of {:.3e}",
                    lo + step * best as f64,
                    lo + step * r as f64,
                    gap,
                    combined
                )));
            }
        }

        // Ternary refinement on the common-random-number surface, which is
        // a deterministic smooth function of t for a fixed seed.
        let mut a = (lo + step * (best as f64 - 1.0)).max(lo);
        let mut b = (lo + step * (best as f64 + 1.0)).min(hi);
        let mut iterations = 0;
        while b - a > REFINE_TOL && iterations < 64 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            let (e1, _) = self.expected_value_oracle(&profile_center(self.dim, m1), n_mc, seed)?;
            let (e2, _) = self.expected_value_oracle(&profile_center(self.dim, m2), n_mc, seed)?;
            if self.sense.is_improvement(e1, e2) {
                b = m2;
            } else {
                a = m1;
            }
            iterations += 1;
        }
        let x_star = profile_center(self.dim, 0.5 * (a + b));
        let (value, _) = self.expected_value_oracle(&x_star, n_mc, derive_seed(seed, &[PRECOMPUTE_VALUE_TAG]))?;
        self.robust = Some(RobustOptimum {
            optimizer: x_star.iter().copied().collect(),
            value,
            basins: Vec::new(),
            provenance: Provenance {
                grid_density,
                n_mc,
                seed,
            },
        });
        Ok((x_star, value))
    }

    /// Name of the stored basin containing the scalar point `t`, for
    /// one-dimensional problems with a basin decomposition.
    pub fn basin_of(&self, t: f64) -> Option<&str> {
        let rob = self.robust.as_ref()?;
        let last = rob.basins.len().checked_sub(1)?;
        rob.basins
            .iter()
            .enumerate()
            .find(|(i, b)| t >= b.lower && (t < b.upper || (*i == last && t == b.upper)))
            .map(|(_, b)| b.name.as_str())
    }
}

fn profile_center(dim: usize, t: f64) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[0] = t;
    v
}

/// Information gain `1/2 ln det(I + K / noise_var)` of a PSD Gram matrix,
/// computed through a factorization rather than a raw determinant.
pub fn information_gain(gram: &DMatrix<f64>, noise_var: f64) -> Result<f64> {
    if gram.nrows() != gram.ncols() {
        return Err(Error::DimensionMismatch {
            expected: gram.nrows(),
            got: gram.ncols(),
        });
    }
    if gram.is_empty() {
        return Ok(0.0);
    }
    let scale = 1.0 + gram.amax();
    for i in 0..gram.nrows() {
        for j in (i + 1)..gram.ncols() {
            if (gram[(i, j)] - gram[(j, i)]).abs() > INFO_GAIN_EIG_TOL * scale {
                return Err(Error::InvalidParameter {
                    name: "gram",
                    message: format!(
                        "matrix must be symmetric; entries ({i},{j}) and ({j},{i}) differ by {:.3e}",
                        (gram[(i, j)] - gram[(j, i)]).abs()
                    ),
                });
            }
        }
    }
    Ok(0.5 * ln_det_i_plus_scaled(gram, noise_var, INFO_GAIN_EIG_TOL)?)
}

/// One per-iteration record of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub iter: usize,
    pub x_query: Vec<f64>,
    pub y_observed: f64,
    pub x_outcome: Vec<f64>,
    pub robust_regret: f64,
    pub inference_ms: f64,
    pub acquisition_ms: f64,
}

/// A full per-run regret trace with its metadata, the unit the CLI
/// serializes to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub run_id: String,
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    records: Vec<RegretRecord>,
}

impl RegretTrace {
    pub fn new(run_id: impl Into<String>, algorithm: impl Into<String>, problem: impl Into<String>, seed: u64) -> Self {
        Self {
            run_id: run_id.into(),
            algorithm: algorithm.into(),
            problem: problem.into(),
            seed,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[RegretRecord] {
        &self.records
    }

    /// Appends a record, enforcing strictly increasing iteration numbers,
    /// near-nonnegative regret, finite values and consistent dimensions.
    pub fn push(&mut self, record: RegretRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.iter <= last.iter {
                return Err(Error::InvalidParameter {
                    name: "iter",
                    message: format!(
                        "iterations must be strictly increasing, got {} after {}",
                        record.iter, last.iter
                    ),
                });
            }
            if record.x_query.len() != last.x_query.len() || record.x_outcome.len() != last.x_outcome.len() {
                return Err(Error::DimensionMismatch {
                    expected: last.x_query.len(),
                    got: record.x_query.len(),
                });
            }
        }
        if record.robust_regret < -REGRET_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "robust_regret",
                message: format!("must be at least -{REGRET_TOLERANCE:e}, got {}", record.robust_regret),
            });
        }
        let finite = record.y_observed.is_finite()
            && record.robust_regret.is_finite()
            && record.inference_ms.is_finite()
            && record.acquisition_ms.is_finite()
            && record.x_query.iter().all(|v| v.is_finite())
            && record.x_outcome.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("trace record"));
        }
        self.records.push(record);
        Ok(())
    }

    /// CSV header matching [`RegretTrace::csv_rows`]. Timing columns are
    /// optional so deterministic runs can produce byte-identical files.
    pub fn csv_header(dim_query: usize, dim_outcome: usize, with_timing: bool) -> String {
        let mut cols: Vec<String> = ["run_id", "algo", "problem", "seed", "iter"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend((0..dim_query).map(|i| format!("x{i}")));
        cols.push("y".into());
        cols.extend((0..dim_outcome).map(|i| format!("xout{i}")));
        cols.push("regret".into());
        if with_timing {
            cols.push("inference_ms".into());
            cols.push("acquisition_ms".into());
        }
        cols.join(",")
    }

    /// One CSV line per record, in push order.
    pub fn csv_rows(&self, with_timing: bool) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                let mut fields: Vec<String> = vec![
                    self.run_id.clone(),
                    self.algorithm.clone(),
                    self.problem.clone(),
                    self.seed.to_string(),
                    r.iter.to_string(),
                ];
                fields.extend(r.x_query.iter().map(|v| v.to_string()));
                fields.push(r.y_observed.to_string());
                fields.extend(r.x_outcome.iter().map(|v| v.to_string()));
                fields.push(r.robust_regret.to_string());
                if with_timing {
                    fields.push(r.inference_ms.to_string());
                    fields.push(r.acquisition_ms.to_string());
                }
                fields.join(",")
            })
            .collect()
    }
}
