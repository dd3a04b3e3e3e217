//! Moment matching and closed-form kernels on Gaussian approximations.
//!
//! Two of the baseline surrogates replace an input distribution by the
//! Gaussian with the same first two moments, estimated from a fixed number of
//! draws. On top of that approximation we provide the symmetric
//! Kullback-Leibler divergence between two Gaussians and the expected value of
//! an RBF kernel under a pair of Gaussian inputs, both in closed form.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::udist::{InputDistribution, SampleBatch};

/// Variance threshold below which a moment-matched Gaussian is treated as a
/// point mass. Draws from a degenerate distribution repeat the center
/// exactly, so the sample covariance is identically zero; the threshold only
/// needs to absorb rounding from the mean subtraction.
const DEGENERATE_VAR: f64 = 1e-18;

/// First two moments of an input distribution, with the derived quantities
/// needed by the divergence and expected-kernel formulas.
#[derive(Debug, Clone)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    /// True when the covariance is numerically zero and the distribution is
    /// treated as a point mass at `mean`.
    pub degenerate: bool,
    inv: Option<DMatrix<f64>>,
    logdet: f64,
}

impl GaussianMoments {
    /// Builds the derived inverse and log-determinant from raw moments.
    pub fn from_raw(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.nrows(),
            });
        }
        let max_var = (0..dim).map(|i| cov[(i, i)]).fold(0.0_f64, f64::max);
        if !max_var.is_finite() || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moment estimate"));
        }
        if max_var <= DEGENERATE_VAR {
            return Ok(Self {
                mean,
                cov: DMatrix::zeros(dim, dim),
                degenerate: true,
                inv: None,
                logdet: f64::NEG_INFINITY,
            });
        }
        let (chol, _) = factor_with_ridge(&cov, max_var)?;
        let logdet = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let inv = chol.inverse();
        Ok(Self {
            mean,
            cov,
            degenerate: false,
            inv: Some(inv),
            logdet,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Cholesky factorization with an escalating diagonal ridge proportional to
/// `scale`, for sample covariances that are positive semidefinite but rank
/// deficient (for example a distribution supported on a curve).
fn factor_with_ridge(cov: &DMatrix<f64>, scale: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok((chol, 0.0));
    }
    let mut ridge = scale * 1e-12;
    while ridge <= scale * 1e-6 {
        let mut bumped = cov.clone();
        for i in 0..cov.nrows() {
            bumped[(i, i)] += ridge;
        }
        if let Some(chol) = Cholesky::new(bumped) {
            return Ok((chol, ridge));
        }
        ridge *= 10.0;
    }
    Err(Error::NotPositiveDefinite {
        min_eig: crate::linalg::min_symmetric_eigenvalue(cov),
        max_jitter: scale * 1e-6,
    })
}

/// Sample mean and covariance of the offset `u - center` at the given center.
pub fn offset_moments(
    dist: &InputDistribution,
    center: &DVector<f64>,
    n_draws: usize,
    seed: u64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if n_draws < 2 {
        return Err(Error::SampleSize(n_draws));
    }
    let batch = crate::udist::sample(dist, center, n_draws, seed)?;
    Ok(batch_offset_moments(&batch, center))
}

fn batch_offset_moments(batch: &SampleBatch, center: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (m, d) = batch.points.shape();
    let mut mean = DVector::zeros(d);
    for i in 0..m {
        for j in 0..d {
            mean[j] += batch.points[(i, j)] - center[j];
        }
    }
    mean /= m as f64;
    let mut cov = DMatrix::zeros(d, d);
    let mut row = vec![0.0_f64; d];
    for i in 0..m {
        for j in 0..d {
            row[j] = batch.points[(i, j)] - center[j] - mean[j];
        }
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    cov /= (m - 1) as f64;
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    (mean, cov)
}

/// Moment-matched Gaussian for the distribution placed at `center`.
pub fn moment_match(
    dist: &InputDistribution,
    center: &DVector<f64>,
    n_draws: usize,
    seed: u64,
) -> Result<GaussianMoments> {
    let (offset, cov) = offset_moments(dist, center, n_draws, seed)?;
    GaussianMoments::from_raw(center + offset, cov)
}

/// Recenters shared offset moments at a specific location.
pub fn recenter(
    offset_mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    center: &DVector<f64>,
) -> Result<GaussianMoments> {
    GaussianMoments::from_raw(center + offset_mean, cov.clone())
}

/// Symmetric Kullback-Leibler divergence `KL(a || b) + KL(b || a)` between
/// two Gaussians. Returns `None` when either side is a point mass, in which
/// case the divergence is unbounded and callers fall back to a kernel on the
/// means.
pub fn symmetric_kl(a: &GaussianMoments, b: &GaussianMoments) -> Result<Option<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.degenerate || b.degenerate {
        return Ok(None);
    }
    let d = a.dim() as f64;
    let delta = &a.mean - &b.mean;
    let inv_a = a.inv.as_ref().expect("non-degenerate moments carry inverse");
    let inv_b = b.inv.as_ref().expect("non-degenerate moments carry inverse");
    let kl_ab = 0.5
        * ((inv_b * &a.cov).trace() + (inv_b * &delta).dot(&delta) - d + b.logdet - a.logdet);
    let kl_ba = 0.5
        * ((inv_a * &b.cov).trace() + (inv_a * &delta).dot(&delta) - d + a.logdet - b.logdet);
    let skl = kl_ab + kl_ba;
    if !skl.is_finite() {
        return Err(Error::NonFinite("symmetric KL divergence"));
    }
    // Both terms are nonnegative for valid Gaussians; tiny negative values can
    // still arise from finite-precision traces.
    Ok(Some(skl.max(0.0)))
}

/// Expected value of the unit-amplitude RBF kernel with lengthscale `l` when
/// both inputs are Gaussian:
///
/// ```text
/// E[k(u, v)] = |I + (S_a + S_b) / l^2|^{-1/2}
///              * exp(-0.5 (mu_a - mu_b)^T (l^2 I + S_a + S_b)^{-1} (mu_a - mu_b))
/// ```
///
/// With both covariances zero this reduces to the plain RBF evaluated at the
/// means.
pub fn expected_rbf(a: &GaussianMoments, b: &GaussianMoments, lengthscale: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if !(lengthscale.is_finite() && lengthscale > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lengthscale",
            message: format!("must be finite and positive, got {lengthscale}"),
        });
    }
    let d = a.dim();
    let l2 = lengthscale * lengthscale;
    let mut m = &a.cov + &b.cov;
    for i in 0..d {
        m[(i, i)] += l2;
    }
    let chol = Cholesky::new(m).ok_or_else(|| Error::NotPositiveDefinite {
        min_eig: f64::NAN,
        max_jitter: 0.0,
    })?;
    let logdet: f64 = chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    let delta = &a.mean - &b.mean;
    let quad = chol.solve(&delta).dot(&delta);
    let value = (d as f64 * lengthscale.ln() - 0.5 * logdet - 0.5 * quad).exp();
    if !value.is_finite() {
        return Err(Error::NonFinite("expected RBF kernel"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udist::InputDistribution;
    use approx::assert_relative_eq;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    #[test]
    fn dirac_moments_are_degenerate_at_center() {
        let dist = InputDistribution::dirac(2).unwrap();
        let center = DVector::from_vec(vec![0.3, -0.7]);
        let g = moment_match(&dist, &center, 100, 9).unwrap();
        assert!(g.degenerate);
        assert_relative_eq!(g.mean[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(g.mean[1], -0.7, epsilon = 1e-15);
        assert_eq!(g.cov[(0, 0)], 0.0);
    }

    #[test]
    fn gaussian_moments_recover_sigma() {
        let dist = InputDistribution::gaussian_iso(0.05, 1).unwrap();
        let g = moment_match(&dist, &vec1(0.4), 10_000, 3).unwrap();
        assert!(!g.degenerate);
        assert_relative_eq!(g.mean[0], 0.4, epsilon = 3.0 * 0.05 / 100.0);
        assert_relative_eq!(g.cov[(0, 0)], 0.0025, epsilon = 3e-4);
    }

    #[test]
    fn symmetric_kl_matches_closed_form_for_gaussians() {
        // Two 1-d Gaussians with variances v1, v2 and mean gap dm:
        // SKL = 0.5 (v1/v2 + v2/v1 - 2) + 0.5 dm^2 (1/v1 + 1/v2).
        let a = GaussianMoments::from_raw(vec1(0.0), DMatrix::from_element(1, 1, 0.04)).unwrap();
        let b = GaussianMoments::from_raw(vec1(0.3), DMatrix::from_element(1, 1, 0.01)).unwrap();
        let want = 0.5 * (0.04 / 0.01 + 0.01 / 0.04 - 2.0) + 0.5 * 0.09 * (1.0 / 0.04 + 1.0 / 0.01);
        let got = symmetric_kl(&a, &b).unwrap().unwrap();
        assert_relative_eq!(got, want, epsilon = 1e-12);
        let flipped = symmetric_kl(&b, &a).unwrap().unwrap();
        assert_relative_eq!(got, flipped, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_kl_is_zero_for_identical_moments() {
        let a = GaussianMoments::from_raw(vec1(0.2), DMatrix::from_element(1, 1, 0.02)).unwrap();
        let got = symmetric_kl(&a, &a.clone()).unwrap().unwrap();
        assert!(got.abs() < 1e-12, "got {got}");
    }

    #[test]
    fn symmetric_kl_flags_degenerate_pairs() {
        let a = GaussianMoments::from_raw(vec1(0.2), DMatrix::zeros(1, 1)).unwrap();
        let b = GaussianMoments::from_raw(vec1(0.5), DMatrix::from_element(1, 1, 0.01)).unwrap();
        assert!(symmetric_kl(&a, &b).unwrap().is_none());
    }

    #[test]
    fn expected_rbf_reduces_to_rbf_for_point_masses() {
        let a = GaussianMoments::from_raw(vec1(0.1), DMatrix::zeros(1, 1)).unwrap();
        let b = GaussianMoments::from_raw(vec1(0.4), DMatrix::zeros(1, 1)).unwrap();
        let got = expected_rbf(&a, &b, 0.2).unwrap();
        let want = (-0.09_f64 / (2.0 * 0.04)).exp();
        assert!((got - want).abs() <= 1e-9, "got {got}, want {want}");
    }

    #[test]
    fn expected_rbf_matches_monte_carlo() {
        // Independent check: average the RBF kernel over fresh Gaussian draws
        // and compare against the closed form.
        let dist = InputDistribution::gaussian_iso(0.08, 1).unwrap();
        let a = moment_match(&dist, &vec1(0.2), 10_000, 11).unwrap();
        let b = moment_match(&dist, &vec1(0.45), 10_000, 12).unwrap();
        let closed = expected_rbf(&a, &b, 0.15).unwrap();

        let ba = crate::udist::sample(&dist, &vec1(0.2), 2000, 101).unwrap();
        let bb = crate::udist::sample(&dist, &vec1(0.45), 2000, 202).unwrap();
        let mut acc = 0.0;
        for i in 0..2000 {
            let diff = ba.points[(i, 0)] - bb.points[(i, 0)];
            acc += (-diff * diff / (2.0 * 0.15 * 0.15)).exp();
        }
        let mc = acc / 2000.0;
        assert!(
            (closed - mc).abs() < 0.02,
            "closed form {closed} vs Monte Carlo {mc}"
        );
    }

    #[test]
    fn expected_rbf_penalizes_spread() {
        let tight = GaussianMoments::from_raw(vec1(0.0), DMatrix::from_element(1, 1, 1e-6)).unwrap();
        let wide = GaussianMoments::from_raw(vec1(0.0), DMatrix::from_element(1, 1, 0.09)).unwrap();
        let kt = expected_rbf(&tight, &tight.clone(), 0.1).unwrap();
        let kw = expected_rbf(&wide, &wide.clone(), 0.1).unwrap();
        assert!(kt > kw, "self-similarity should shrink with spread");
        assert!(kw < 1.0 && kw > 0.0);
    }

    #[test]
    fn shared_offsets_recenter_exactly() {
        let dist = InputDistribution::gaussian_iso(0.1, 2).unwrap();
        let zero = DVector::zeros(2);
        let (off, cov) = offset_moments(&dist, &zero, 5000, 7).unwrap();
        let g = recenter(&off, &cov, &DVector::from_vec(vec![1.0, -2.0])).unwrap();
        assert_relative_eq!(g.mean[0], 1.0 + off[0], epsilon = 1e-15);
        assert_relative_eq!(g.mean[1], -2.0 + off[1], epsilon = 1e-15);
        assert_eq!(g.cov, cov);
    }
}
