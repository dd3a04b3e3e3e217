//! Input distribution descriptors and batch sampling.
//!
//! A design point `x` is never evaluated exactly: the environment perturbs
//! it according to a parametric law, and the optimizer reasons about the
//! whole distribution `P_x`. This module holds the declarative descriptors
//! for the supported families and draws reproducible sample batches from
//! them. The convention throughout is `x' = center + scale * z`, where `z`
//! is the family's canonical variate, so descriptors are translation
//! templates: the same descriptor serves every design point.
//!
//! Draws are keyed by `(seed, m, dim, family)` only. Two centers sampled
//! with the same seed therefore share their underlying variates, which is
//! deliberate: grid sweeps (e.g. robust-optimum precomputation) become
//! common-random-number comparisons and need far fewer draws to rank
//! candidates stably.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, ChiSquared, Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

/// Supported perturbation families with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Point mass at the center: every draw is exactly `x`.
    Dirac,
    /// Isotropic Gaussian: `x' = x + sigma * z`, `z ~ N(0, I)`.
    GaussianIso { sigma: f64 },
    /// Shifted beta: `x' = x + scale * z` per coordinate, `z ~ Beta(alpha, beta)`.
    ///
    /// The beta variate lives on `[0, 1]`, so this family is one-sided: it
    /// never perturbs below the center. That asymmetry is the point.
    BetaShift { alpha: f64, beta: f64, scale: f64 },
    /// Beta with center-dependent scale `sigma(x) = scale * (sin(4 pi x) + 1)`.
    ///
    /// One-dimensional. Near the zeros of `sin(4 pi x) + 1` the law
    /// degenerates towards a point mass, which heteroscedastic baselines
    /// must cope with.
    BetaVarying { alpha: f64, beta: f64, scale: f64 },
    /// Chi-squared with a step in the degrees of freedom:
    /// `x' = x + scale * z`, `z ~ chi2(g(x))` with `g(x) = dof_low` for
    /// `x < threshold` and `dof_high` otherwise. One-dimensional.
    Chi2Step {
        dof_low: f64,
        dof_high: f64,
        threshold: f64,
        scale: f64,
    },
    /// First two coordinates perturbed uniformly on a circle of fixed
    /// radius, remaining coordinates by independent Gaussians with
    /// variance `tail_var`.
    CircularConcat { radius: f64, tail_var: f64 },
    /// Gaussian mixture offset: a component is drawn by weight, then
    /// `x' = x + mean_c + L_c * z` with `z ~ N(0, I)` and `L_c` a factor of
    /// the component covariance.
    Gmm {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Vec<Vec<Vec<f64>>>,
    },
}

impl Family {
    /// Stable name used in JSON and error messages.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Dirac => "dirac",
            Family::GaussianIso { .. } => "gaussian_iso",
            Family::BetaShift { .. } => "beta_shift",
            Family::BetaVarying { .. } => "beta_varying",
            Family::Chi2Step { .. } => "chi2_step",
            Family::CircularConcat { .. } => "circular_concat",
            Family::Gmm { .. } => "gmm",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Family::Dirac => 0,
            Family::GaussianIso { .. } => 1,
            Family::BetaShift { .. } => 2,
            Family::BetaVarying { .. } => 3,
            Family::Chi2Step { .. } => 4,
            Family::CircularConcat { .. } => 5,
            Family::Gmm { .. } => 6,
        }
    }
}

/// A validated input distribution over `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    family: Family,
    dim: usize,
}

/// An input distribution attached to a concrete design point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedDistribution {
    pub dist: InputDistribution,
    pub center: DVector<f64>,
}

impl LocatedDistribution {
    pub fn new(dist: InputDistribution, center: DVector<f64>) -> Result<Self> {
        if center.len() != dist.dim() {
            return Err(Error::DimensionMismatch {
                expected: dist.dim(),
                got: center.len(),
            });
        }
        Ok(Self { dist, center })
    }
}

/// A reproducible batch of draws from one located distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// `m x dim` matrix, one draw per row.
    pub points: DMatrix<f64>,
    /// The design point the batch was drawn around.
    pub center: DVector<f64>,
    /// Seed the batch was drawn with, kept for provenance.
    pub seed_tag: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must be a positive finite number, got {v}"),
        });
    }
    Ok(())
}

impl InputDistribution {
    /// Validates the family parameters against the dimension and builds the
    /// descriptor.
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDistribution("dimension must be at least 1".into()));
        }
        match &family {
            Family::Dirac => {}
            Family::GaussianIso { sigma } => require_positive("sigma", *sigma)?,
            Family::BetaShift { alpha, beta, scale } => {
                require_positive("alpha", *alpha)?;
                require_positive("beta", *beta)?;
                require_positive("scale", *scale)?;
            }
            Family::BetaVarying { alpha, beta, scale } => {
                require_positive("alpha", *alpha)?;
                require_positive("beta", *beta)?;
                require_positive("scale", *scale)?;
                if dim != 1 {
                    return Err(Error::InvalidDistribution(
                        "beta_varying is one-dimensional (its scale depends on the scalar center)".into(),
                    ));
                }
            }
            Family::Chi2Step {
                dof_low,
                dof_high,
                threshold,
                scale,
            } => {
                require_positive("dof_low", *dof_low)?;
                require_positive("dof_high", *dof_high)?;
                require_positive("scale", *scale)?;
                if !threshold.is_finite() {
                    return Err(Error::NonFinite("chi2_step threshold"));
                }
                if dim != 1 {
                    return Err(Error::InvalidDistribution(
                        "chi2_step is one-dimensional (its dof depend on the scalar center)".into(),
                    ));
                }
            }
            Family::CircularConcat { radius, tail_var } => {
                require_positive("radius", *radius)?;
                if !tail_var.is_finite() || *tail_var < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "tail_var",
                        message: format!("must be a non-negative finite number, got {tail_var}"),
                    });
                }
                if dim < 2 {
                    return Err(Error::InvalidDistribution(
                        "circular_concat needs at least 2 dimensions for the circular block".into(),
                    ));
                }
            }
            Family::Gmm {
                weights,
                means,
                covariances,
            } => {
                if weights.is_empty() {
                    return Err(Error::InvalidDistribution("gmm needs at least one component".into()));
                }
                if means.len() != weights.len() || covariances.len() != weights.len() {
                    return Err(Error::InvalidDistribution(format!(
                        "gmm component counts disagree: {} weights, {} means, {} covariances",
                        weights.len(),
                        means.len(),
                        covariances.len()
                    )));
                }
                let sum: f64 = weights.iter().sum();
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidDistribution("gmm weights must be non-negative".into()));
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "gmm weights must sum to 1 within 1e-12, got {sum}"
                    )));
                }
                for (c, mean) in means.iter().enumerate() {
                    if mean.len() != dim {
                        return Err(Error::InvalidDistribution(format!(
                            "gmm mean {c} has length {}, expected {dim}",
                            mean.len()
                        )));
                    }
                }
                for (c, cov) in covariances.iter().enumerate() {
                    if cov.len() != dim || cov.iter().any(|row| row.len() != dim) {
                        return Err(Error::InvalidDistribution(format!(
                            "gmm covariance {c} is not {dim}x{dim}"
                        )));
                    }
                    // Factorize once here so sampling can assume validity.
                    psd_factor(cov).map_err(|e| {
                        Error::InvalidDistribution(format!("gmm covariance {c}: {e}"))
                    })?;
                }
            }
        }
        Ok(Self { family, dim })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when every draw equals the center exactly.
    pub fn is_dirac(&self) -> bool {
        matches!(self.family, Family::Dirac)
    }

    /// Shorthand for the common isotropic Gaussian law.
    pub fn gaussian_iso(sigma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::GaussianIso { sigma }, dim)
    }

    /// Shorthand for the point-mass law.
    pub fn dirac(dim: usize) -> Result<Self> {
        Self::new(Family::Dirac, dim)
    }

    /// Attaches the descriptor to a design point.
    pub fn at(&self, center: DVector<f64>) -> Result<LocatedDistribution> {
        LocatedDistribution::new(self.clone(), center)
    }
}

/// Factor of a symmetric PSD matrix suitable for sampling (`F * z` with
/// standard normal `z` has the requested covariance). Tolerates zero
/// eigenvalues; rejects clearly indefinite input.
fn psd_factor(cov: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = cov.len();
    let mut mat = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v = cov[i][j];
            if !v.is_finite() {
                return Err(Error::NonFinite("covariance entry"));
            }
            mat[(i, j)] = v;
        }
    }
    let asym = (&mat - mat.transpose()).abs().max();
    let scale = mat.abs().max().max(1e-300);
    if asym > 1e-8 * scale {
        return Err(Error::InvalidParameter {
            name: "covariance",
            message: "matrix is not symmetric".into(),
        });
    }
    let sym = (&mat + mat.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let floor = -1e-10 * max_eig.max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return Err(Error::InvalidParameter {
            name: "covariance",
            message: format!(
                "matrix is not positive semi-definite (eigenvalue {:.3e})",
                eig.eigenvalues.min()
            ),
        });
    }
    let mut factor = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        for i in 0..d {
            factor[(i, j)] *= s;
        }
    }
    Ok(factor)
}

/// Draws `m` points from the located distribution.
///
/// The batch is a pure function of `(dist, center, m, seed)`; repeated calls
/// return bit-identical matrices. `m` must be at least 2 so downstream
/// U-statistics are defined.
pub fn sample(dist: &InputDistribution, center: &DVector<f64>, m: usize, seed: u64) -> Result<SampleBatch> {
    if m < 2 {
        return Err(Error::SampleSize(m));
    }
    let d = dist.dim();
    if center.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: center.len(),
        });
    }
    if center.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("center"));
    }
    let mut rng = stream(derive_seed(seed, &[m as u64, d as u64, dist.family.tag()]));
    let mut points = DMatrix::zeros(m, d);

    match &dist.family {
        Family::Dirac => {
            for i in 0..m {
                for j in 0..d {
                    points[(i, j)] = center[j];
                }
            }
        }
        Family::GaussianIso { sigma } => {
            for i in 0..m {
                for j in 0..d {
                    let z: f64 = rng.sample(StandardNormal);
                    points[(i, j)] = center[j] + sigma * z;
                }
            }
        }
        Family::BetaShift { alpha, beta, scale } => {
            let law = Beta::new(*alpha, *beta).expect("validated parameters");
            for i in 0..m {
                for j in 0..d {
                    let z = law.sample(&mut rng);
                    points[(i, j)] = center[j] + scale * z;
                }
            }
        }
        Family::BetaVarying { alpha, beta, scale } => {
            let law = Beta::new(*alpha, *beta).expect("validated parameters");
            let local_scale = scale * ((4.0 * std::f64::consts::PI * center[0]).sin() + 1.0);
            for i in 0..m {
                let z = law.sample(&mut rng);
                points[(i, 0)] = center[0] + local_scale * z;
            }
        }
        Family::Chi2Step {
            dof_low,
            dof_high,
            threshold,
            scale,
        } => {
            let dof = if center[0] < *threshold { *dof_low } else { *dof_high };
            let law = ChiSquared::new(dof).expect("validated parameters");
            for i in 0..m {
                let z = law.sample(&mut rng);
                points[(i, 0)] = center[0] + scale * z;
            }
        }
        Family::CircularConcat { radius, tail_var } => {
            let tail_sd = tail_var.sqrt();
            for i in 0..m {
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                points[(i, 0)] = center[0] + radius * theta.cos();
                points[(i, 1)] = center[1] + radius * theta.sin();
                for j in 2..d {
                    let z: f64 = rng.sample(StandardNormal);
                    points[(i, j)] = center[j] + tail_sd * z;
                }
            }
        }
        Family::Gmm {
            weights,
            means,
            covariances,
        } => {
            let factors: Vec<DMatrix<f64>> = covariances
                .iter()
                .map(|c| psd_factor(c).expect("validated covariance"))
                .collect();
            let mut z = DVector::zeros(d);
            for i in 0..m {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                let mut comp = weights.len() - 1;
                for (c, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        comp = c;
                        break;
                    }
                }
                for j in 0..d {
                    z[j] = rng.sample(StandardNormal);
                }
                let offset = &factors[comp] * &z;
                for j in 0..d {
                    points[(i, j)] = center[j] + means[comp][j] + offset[j];
                }
            }
        }
    }

    Ok(SampleBatch {
        points,
        center: center.clone(),
        seed_tag: seed,
    })
}

// ----- JSON representation -----
//
// Descriptors travel as `{"family": ..., "params": {...}, "dim": n}`.
// Unknown families and unknown parameter keys are rejected so a typo in a
// config fails loudly instead of silently falling back to defaults.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr {
    family: String,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianIsoParams {
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaParams {
    alpha: f64,
    beta: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Chi2StepParams {
    dof_low: f64,
    dof_high: f64,
    threshold: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircularConcatParams {
    radius: f64,
    tail_var: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GmmParams {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
}

fn to_map<T: Serialize>(params: &T) -> serde_json::Map<String, serde_json::Value> {
    match serde_json::to_value(params) {
        Ok(serde_json::Value::Object(map)) => map,
        _ => serde_json::Map::new(),
    }
}

impl Serialize for InputDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let params = match &self.family {
            Family::Dirac => serde_json::Map::new(),
            Family::GaussianIso { sigma } => to_map(&GaussianIsoParams { sigma: *sigma }),
            Family::BetaShift { alpha, beta, scale } => to_map(&BetaParams {
                alpha: *alpha,
                beta: *beta,
                scale: *scale,
            }),
            Family::BetaVarying { alpha, beta, scale } => to_map(&BetaParams {
                alpha: *alpha,
                beta: *beta,
                scale: *scale,
            }),
            Family::Chi2Step {
                dof_low,
                dof_high,
                threshold,
                scale,
            } => to_map(&Chi2StepParams {
                dof_low: *dof_low,
                dof_high: *dof_high,
                threshold: *threshold,
                scale: *scale,
            }),
            Family::CircularConcat { radius, tail_var } => to_map(&CircularConcatParams {
                radius: *radius,
                tail_var: *tail_var,
            }),
            Family::Gmm {
                weights,
                means,
                covariances,
            } => to_map(&GmmParams {
                weights: weights.clone(),
                means: means.clone(),
                covariances: covariances.clone(),
            }),
        };
        Repr {
            family: self.family.name().to_string(),
            params,
            dim: self.dim,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for InputDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = Repr::deserialize(deserializer)?;
        let params = serde_json::Value::Object(repr.params);
        let family = match repr.family.as_str() {
            "dirac" => {
                let obj = params.as_object().expect("object by construction");
                if !obj.is_empty() {
                    return Err(D::Error::custom("dirac takes no parameters"));
                }
                Family::Dirac
            }
            "gaussian_iso" => {
                let p: GaussianIsoParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::GaussianIso { sigma: p.sigma }
            }
            "beta_shift" => {
                let p: BetaParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::BetaShift {
                    alpha: p.alpha,
                    beta: p.beta,
                    scale: p.scale,
                }
            }
            "beta_varying" => {
                let p: BetaParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::BetaVarying {
                    alpha: p.alpha,
                    beta: p.beta,
                    scale: p.scale,
                }
            }
            "chi2_step" => {
                let p: Chi2StepParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::Chi2Step {
                    dof_low: p.dof_low,
                    dof_high: p.dof_high,
                    threshold: p.threshold,
                    scale: p.scale,
                }
            }
            "circular_concat" => {
                let p: CircularConcatParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::CircularConcat {
                    radius: p.radius,
                    tail_var: p.tail_var,
                }
            }
            "gmm" => {
                let p: GmmParams = serde_json::from_value(params).map_err(D::Error::custom)?;
                Family::Gmm {
                    weights: p.weights,
                    means: p.means,
                    covariances: p.covariances,
                }
            }
            other => {
                return Err(D::Error::custom(format!("unknown distribution family `{other}`")));
            }
        };
        InputDistribution::new(family, repr.dim).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    #[test]
    fn dirac_batch_repeats_center() {
        let dist = InputDistribution::dirac(1).unwrap();
        let batch = sample(&dist, &vec1(0.4), 5, 3).unwrap();
        assert_eq!(batch.len(), 5);
        for i in 0..5 {
            assert_eq!(batch.points[(i, 0)], 0.4);
        }
    }

    #[test]
    fn gaussian_mean_matches_center() {
        let dist = InputDistribution::gaussian_iso(0.01, 1).unwrap();
        let m = 10_000;
        let batch = sample(&dist, &vec1(0.3), m, 7).unwrap();
        let mean = batch.points.column(0).sum() / m as f64;
        // 4 standard errors of the sample mean.
        assert!((mean - 0.3).abs() <= 4.0 * 0.01 / (m as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn sampling_is_bit_identical() {
        let dist = InputDistribution::new(
            Family::BetaShift {
                alpha: 0.4,
                beta: 0.2,
                scale: 0.1,
            },
            1,
        )
        .unwrap();
        let a = sample(&dist, &vec1(0.25), 64, 11).unwrap();
        let b = sample(&dist, &vec1(0.25), 64, 11).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample(&dist, &vec1(0.25), 64, 12).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn circular_block_has_exact_radius() {
        let dist = InputDistribution::new(
            Family::CircularConcat {
                radius: 0.5,
                tail_var: 0.01,
            },
            10,
        )
        .unwrap();
        let center = DVector::zeros(10);
        let batch = sample(&dist, &center, 100, 5).unwrap();
        for i in 0..100 {
            let r = (batch.points[(i, 0)].powi(2) + batch.points[(i, 1)].powi(2)).sqrt();
            assert_abs_diff_eq!(r, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn beta_varying_scale_follows_center() {
        let dist = InputDistribution::new(
            Family::BetaVarying {
                alpha: 0.5,
                beta: 0.5,
                scale: 0.9,
            },
            1,
        )
        .unwrap();
        // sin(4 pi x) + 1 = 0 at x = 3/8: the law degenerates to the center.
        let batch = sample(&dist, &vec1(0.375), 50, 1).unwrap();
        for i in 0..50 {
            assert_abs_diff_eq!(batch.points[(i, 0)], 0.375, epsilon = 1e-12);
        }
        // At x = 1/8 the scale is maximal (2 * 0.9); draws stay in [x, x + 1.8].
        let batch = sample(&dist, &vec1(0.125), 200, 1).unwrap();
        for i in 0..200 {
            let v = batch.points[(i, 0)];
            assert!(v >= 0.125 && v <= 0.125 + 1.8);
        }
    }

    #[test]
    fn chi2_step_switches_dof_at_threshold() {
        let dist = InputDistribution::new(
            Family::Chi2Step {
                dof_low: 0.5,
                dof_high: 7.0,
                threshold: 0.6,
                scale: 0.01,
            },
            1,
        )
        .unwrap();
        let m = 20_000;
        let low = sample(&dist, &vec1(0.55), m, 2).unwrap();
        let high = sample(&dist, &vec1(0.6), m, 2).unwrap();
        let mean_low = low.points.column(0).sum() / m as f64 - 0.55;
        let mean_high = high.points.column(0).sum() / m as f64 - 0.6;
        // E[chi2(g)] = g, so the offsets should straddle scale * g.
        assert_abs_diff_eq!(mean_low, 0.01 * 0.5, epsilon = 4.0 * 0.01 * 1.0 / (m as f64).sqrt());
        assert_abs_diff_eq!(mean_high, 0.01 * 7.0, epsilon = 4.0 * 0.01 * 3.8 / (m as f64).sqrt());
    }

    #[test]
    fn gmm_component_selection_respects_weights() {
        let dist = InputDistribution::new(
            Family::Gmm {
                weights: vec![0.25, 0.75],
                means: vec![vec![-10.0], vec![10.0]],
                covariances: vec![vec![vec![0.01]], vec![vec![0.01]]],
            },
            1,
        )
        .unwrap();
        let m = 8000;
        let batch = sample(&dist, &vec1(0.0), m, 9).unwrap();
        let right = (0..m).filter(|&i| batch.points[(i, 0)] > 0.0).count();
        let frac = right as f64 / m as f64;
        assert!((frac - 0.75).abs() < 4.0 * (0.25 * 0.75 / m as f64).sqrt(), "fraction {frac}");
    }

    #[test]
    fn too_small_batches_are_rejected() {
        let dist = InputDistribution::dirac(1).unwrap();
        assert!(matches!(sample(&dist, &vec1(0.0), 1, 0), Err(Error::SampleSize(1))));
    }

    #[test]
    fn center_dimension_is_checked() {
        let dist = InputDistribution::gaussian_iso(0.1, 2).unwrap();
        let err = sample(&dist, &vec1(0.0), 4, 0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(InputDistribution::gaussian_iso(-0.1, 1).is_err());
        assert!(InputDistribution::gaussian_iso(f64::NAN, 1).is_err());
        assert!(InputDistribution::new(
            Family::Gmm {
                weights: vec![0.5, 0.4],
                means: vec![vec![0.0], vec![0.0]],
                covariances: vec![vec![vec![1.0]], vec![vec![1.0]]],
            },
            1
        )
        .is_err());
        assert!(InputDistribution::new(
            Family::BetaVarying {
                alpha: 0.5,
                beta: 0.5,
                scale: 0.9
            },
            2
        )
        .is_err());
        assert!(InputDistribution::new(
            Family::CircularConcat {
                radius: 0.5,
                tail_var: 0.01
            },
            1
        )
        .is_err());
    }

    #[test]
    fn json_round_trip_keeps_shape() {
        let dist = InputDistribution::gaussian_iso(0.01, 1).unwrap();
        let json = serde_json::to_value(&dist).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"family": "gaussian_iso", "params": {"sigma": 0.01}, "dim": 1})
        );
        let back: InputDistribution = serde_json::from_value(json).unwrap();
        assert_eq!(back, dist);

        let dirac: InputDistribution =
            serde_json::from_value(serde_json::json!({"family": "dirac", "params": {}, "dim": 3})).unwrap();
        assert!(dirac.is_dirac());
        assert_eq!(dirac.dim(), 3);
    }

    #[test]
    fn json_rejects_unknown_family_and_keys() {
        let bad_family = serde_json::json!({"family": "cauchy", "params": {}, "dim": 1});
        assert!(serde_json::from_value::<InputDistribution>(bad_family).is_err());
        let bad_key = serde_json::json!({"family": "gaussian_iso", "params": {"sigma": 0.1, "mu": 0.0}, "dim": 1});
        assert!(serde_json::from_value::<InputDistribution>(bad_key).is_err());
        let stray = serde_json::json!({"family": "dirac", "params": {}, "dim": 1, "extra": 1});
        assert!(serde_json::from_value::<InputDistribution>(stray).is_err());
    }
}
