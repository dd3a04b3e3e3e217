//! Maximum mean discrepancy estimators between sample batches.
//!
//! Two estimators of the squared MMD are provided. The empirical one is
//! the unbiased U-statistic
//!
//! ```text
//! MMD^2(U, V) = 1/(m(m-1)) * sum_{i != j} [k(u_i, u_j) + k(v_i, v_j)]
//!             - 2/m^2     * sum_{i, j}   k(u_i, v_j)
//! ```
//!
//! and may be slightly negative when the two distributions coincide; that
//! is inherent to unbiasedness and left intact.
//!
//! The Nystrom estimator replaces each batch's mean embedding by its
//! projection onto `h` landmarks drawn uniformly with replacement from
//! that batch. Writing `Z` for the landmarks, `K_Z` for their kernel
//! block and `b = (1/m) K(Z, U) 1`, the batch is summarized by the weight
//! vector `w = K_Z^+ b` and the estimate becomes
//!
//! ```text
//! MMD^2(U, V) ~= b_U' w_U + b_V' w_V - 2 w_U' K(Z_U, Z_V) w_V ,
//! ```
//!
//! the squared RKHS distance between the two projected embeddings. It is
//! a V-statistic (diagonal terms included), so it is clamped at zero, and
//! with `h = m` and distinct samples it reproduces the full biased
//! V-statistic exactly. Cost per pair drops from `O(m^2)` kernel
//! evaluations to `O(m h)` for the one-off embeddings plus `O(h^2)` per
//! pair, which is what makes batched posterior inference affordable.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::BaseKernelParams;
use crate::linalg::psd_pinv;
use crate::rng::{derive_seed, stream};
use crate::udist::SampleBatch;

fn default_pinv_tolerance() -> f64 {
    1e-10
}

/// Which MMD estimator to use, with its sampling sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    /// Unbiased U-statistic over full `m x m` kernel blocks.
    Empirical { m: usize },
    /// Landmark-projected V-statistic with `h` landmarks per batch.
    Nystrom {
        m: usize,
        h: usize,
        #[serde(default = "default_pinv_tolerance")]
        pinv_tolerance: f64,
    },
}

impl EstimatorConfig {
    pub fn empirical(m: usize) -> Self {
        EstimatorConfig::Empirical { m }
    }

    pub fn nystrom(m: usize, h: usize) -> Self {
        EstimatorConfig::Nystrom {
            m,
            h,
            pinv_tolerance: default_pinv_tolerance(),
        }
    }

    pub fn sample_size(&self) -> usize {
        match self {
            EstimatorConfig::Empirical { m } => *m,
            EstimatorConfig::Nystrom { m, .. } => *m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.sample_size();
        if m < 2 {
            return Err(Error::SampleSize(m));
        }
        if let EstimatorConfig::Nystrom { m, h, pinv_tolerance } = self {
            if *h == 0 || h > m {
                return Err(Error::LandmarkCount { h: *h, m: *m });
            }
            if !pinv_tolerance.is_finite() || *pinv_tolerance <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "pinv_tolerance",
                    message: format!("must be a positive finite number, got {pinv_tolerance}"),
                });
            }
        }
        Ok(())
    }
}

fn check_pair(u: &SampleBatch, v: &SampleBatch) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::BatchSizeMismatch(u.len(), v.len()));
    }
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    if u.len() < 2 {
        return Err(Error::SampleSize(u.len()));
    }
    Ok(())
}

fn row_sqnorms(points: &DMatrix<f64>) -> Vec<f64> {
    (0..points.nrows())
        .map(|i| points.row(i).iter().map(|x| x * x).sum())
        .collect()
}

fn sqdist(a: &DMatrix<f64>, i: usize, an: &[f64], b: &DMatrix<f64>, j: usize, bn: &[f64]) -> f64 {
    let mut dot = 0.0;
    for k in 0..a.ncols() {
        dot += a[(i, k)] * b[(j, k)];
    }
    (an[i] + bn[j] - 2.0 * dot).max(0.0)
}

/// Mean of `k(u_i, u_j)` over ordered pairs with `i != j`: the self term
/// of the U-statistic. Cached per batch by the surrogate so each pair only
/// pays for its cross block.
pub fn empirical_self_term(kernel: &BaseKernelParams, batch: &SampleBatch) -> Result<f64> {
    if batch.len() < 2 {
        return Err(Error::SampleSize(batch.len()));
    }
    kernel.validate()?;
    let m = batch.len();
    let pts = &batch.points;
    let norms = row_sqnorms(pts);
    let mut acc = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            acc += kernel.eval_sqdist(sqdist(pts, i, &norms, pts, j, &norms));
        }
    }
    Ok(2.0 * acc / (m * (m - 1)) as f64)
}

/// Mean of `k(u_i, v_j)` over all `m^2` cross pairs.
pub fn empirical_cross_term(kernel: &BaseKernelParams, u: &SampleBatch, v: &SampleBatch) -> Result<f64> {
    check_pair(u, v)?;
    kernel.validate()?;
    let m = u.len();
    let un = row_sqnorms(&u.points);
    let vn = row_sqnorms(&v.points);
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            acc += kernel.eval_sqdist(sqdist(&u.points, i, &un, &v.points, j, &vn));
        }
    }
    Ok(acc / (m * m) as f64)
}

/// Unbiased U-statistic estimate of the squared MMD between two batches of
/// equal size. May be slightly negative.
pub fn mmd2_empirical(kernel: &BaseKernelParams, u: &SampleBatch, v: &SampleBatch) -> Result<f64> {
    let self_u = empirical_self_term(kernel, u)?;
    let self_v = empirical_self_term(kernel, v)?;
    let cross = empirical_cross_term(kernel, u, v)?;
    Ok(self_u + self_v - 2.0 * cross)
}

/// Landmark summary of one batch for the Nystrom estimator.
#[derive(Debug, Clone)]
pub struct NystromEmbedding {
    /// Landmark points, `h x d`.
    pub landmarks: DMatrix<f64>,
    /// `K_Z^+ b` weights over the landmarks.
    pub weights: DVector<f64>,
    /// `b' K_Z^+ b`, the projected self term.
    pub self_term: f64,
}

/// Builds the landmark projection of one batch.
///
/// Landmarks are drawn uniformly with replacement from the batch rows,
/// except that `h = m` keeps every row once: subsampling `m` of `m` would
/// only lose landmarks to duplication, and the full set makes the
/// estimator agree with the plain V-statistic whenever the landmark block
/// is invertible.
pub fn nystrom_embed(
    kernel: &BaseKernelParams,
    batch: &SampleBatch,
    h: usize,
    pinv_tolerance: f64,
    seed: u64,
) -> Result<NystromEmbedding> {
    let m = batch.len();
    if m < 2 {
        return Err(Error::SampleSize(m));
    }
    if h == 0 || h > m {
        return Err(Error::LandmarkCount { h, m });
    }
    kernel.validate()?;

    let d = batch.dim();
    let mut landmarks = DMatrix::zeros(h, d);
    if h == m {
        landmarks.copy_from(&batch.points);
    } else {
        let mut rng = stream(seed);
        for r in 0..h {
            let idx = rng.random_range(0..m);
            for c in 0..d {
                landmarks[(r, c)] = batch.points[(idx, c)];
            }
        }
    }

    let block = kernel.eval_base(&landmarks, &landmarks)?;
    let pinv = psd_pinv(&block, pinv_tolerance)?;

    let ln = row_sqnorms(&landmarks);
    let bn = row_sqnorms(&batch.points);
    let mut b = DVector::zeros(h);
    for r in 0..h {
        let mut acc = 0.0;
        for i in 0..m {
            acc += kernel.eval_sqdist(sqdist(&landmarks, r, &ln, &batch.points, i, &bn));
        }
        b[r] = acc / m as f64;
    }

    let weights = &pinv * &b;
    let self_term = b.dot(&weights);
    Ok(NystromEmbedding {
        landmarks,
        weights,
        self_term,
    })
}

/// Inner product of two landmark-projected embeddings.
pub fn nystrom_cross(kernel: &BaseKernelParams, a: &NystromEmbedding, b: &NystromEmbedding) -> Result<f64> {
    let block = kernel.eval_base(&a.landmarks, &b.landmarks)?;
    Ok((a.weights.transpose() * block * &b.weights)[(0, 0)])
}

/// Nystrom estimate of the squared MMD between two equal-size batches,
/// clamped at zero. Landmark draws for the two batches are derived from
/// `seed`.
pub fn mmd2_nystrom(
    kernel: &BaseKernelParams,
    u: &SampleBatch,
    v: &SampleBatch,
    h: usize,
    pinv_tolerance: f64,
    seed: u64,
) -> Result<f64> {
    check_pair(u, v)?;
    let eu = nystrom_embed(kernel, u, h, pinv_tolerance, derive_seed(seed, &[0]))?;
    let ev = nystrom_embed(kernel, v, h, pinv_tolerance, derive_seed(seed, &[1]))?;
    let cross = nystrom_cross(kernel, &eu, &ev)?;
    Ok((eu.self_term + ev.self_term - 2.0 * cross).max(0.0))
}

/// Squared-MMD estimate under the given estimator configuration.
pub fn mmd2(
    kernel: &BaseKernelParams,
    cfg: &EstimatorConfig,
    u: &SampleBatch,
    v: &SampleBatch,
    seed: u64,
) -> Result<f64> {
    cfg.validate()?;
    match cfg {
        EstimatorConfig::Empirical { .. } => mmd2_empirical(kernel, u, v),
        EstimatorConfig::Nystrom { h, pinv_tolerance, .. } => {
            mmd2_nystrom(kernel, u, v, *h, *pinv_tolerance, seed)
        }
    }
}

/// Pairwise squared-MMD matrix over a list of batches.
///
/// The diagonal is identically zero (a distribution is at distance zero
/// from itself) and each unordered pair is computed once, so the result is
/// exactly symmetric. Per-batch work (self terms, landmark embeddings) is
/// done once; Nystrom landmark seeds derive from `(seed, batch index)` so
/// the matrix does not depend on evaluation order.
pub fn mmd_gram(
    kernel: &BaseKernelParams,
    cfg: &EstimatorConfig,
    batches: &[SampleBatch],
    seed: u64,
) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let n = batches.len();
    let mut gram = DMatrix::zeros(n, n);
    if n == 0 {
        return Ok(gram);
    }
    for w in batches.windows(2) {
        check_pair(&w[0], &w[1])?;
    }
    match cfg {
        EstimatorConfig::Empirical { .. } => {
            let selfs: Vec<f64> = batches
                .iter()
                .map(|b| empirical_self_term(kernel, b))
                .collect::<Result<_>>()?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let cross = empirical_cross_term(kernel, &batches[i], &batches[j])?;
                    let v = selfs[i] + selfs[j] - 2.0 * cross;
                    gram[(i, j)] = v;
                    gram[(j, i)] = v;
                }
            }
        }
        EstimatorConfig::Nystrom { h, pinv_tolerance, .. } => {
            let embeddings: Vec<NystromEmbedding> = batches
                .iter()
                .enumerate()
                .map(|(i, b)| nystrom_embed(kernel, b, *h, *pinv_tolerance, derive_seed(seed, &[i as u64])))
                .collect::<Result<_>>()?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let cross = nystrom_cross(kernel, &embeddings[i], &embeddings[j])?;
                    let v = (embeddings[i].self_term + embeddings[j].self_term - 2.0 * cross).max(0.0);
                    gram[(i, j)] = v;
                    gram[(j, i)] = v;
                }
            }
        }
    }
    Ok(gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udist::{sample, Family, InputDistribution};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn constant_batch(value: f64, m: usize) -> SampleBatch {
        SampleBatch {
            points: DMatrix::from_element(m, 1, value),
            center: DVector::from_vec(vec![value]),
            seed_tag: 0,
        }
    }

    fn gaussian_batch(center: f64, sigma: f64, m: usize, seed: u64) -> SampleBatch {
        let dist = InputDistribution::gaussian_iso(sigma, 1).unwrap();
        sample(&dist, &DVector::from_vec(vec![center]), m, seed).unwrap()
    }

    fn beta_batch(center: f64, m: usize, seed: u64) -> SampleBatch {
        let dist = InputDistribution::new(
            Family::BetaShift {
                alpha: 0.4,
                beta: 0.2,
                scale: 0.1,
            },
            1,
        )
        .unwrap();
        sample(&dist, &DVector::from_vec(vec![center]), m, seed).unwrap()
    }

    /// V-statistic over full kernel blocks: the slow reference for the
    /// Nystrom estimator at full landmark rank.
    fn v_statistic(kernel: &BaseKernelParams, u: &SampleBatch, v: &SampleBatch) -> f64 {
        let m = u.len() as f64;
        let kuu = kernel.eval_base(&u.points, &u.points).unwrap();
        let kvv = kernel.eval_base(&v.points, &v.points).unwrap();
        let kuv = kernel.eval_base(&u.points, &v.points).unwrap();
        kuu.sum() / (m * m) + kvv.sum() / (m * m) - 2.0 * kuv.sum() / (m * m)
    }

    /// Population MMD^2 between two laws, estimated from independent draw
    /// pairs; returns (estimate, standard error).
    fn population_mmd2(
        kernel: &BaseKernelParams,
        a: &SampleBatch,
        b: &SampleBatch,
    ) -> (f64, f64) {
        let n = a.len() / 2;
        let mut terms = Vec::with_capacity(n);
        for i in 0..n {
            let u1 = a.points[(2 * i, 0)];
            let u2 = a.points[(2 * i + 1, 0)];
            let v1 = b.points[(2 * i, 0)];
            let v2 = b.points[(2 * i + 1, 0)];
            let t = kernel.eval_sqdist((u1 - u2) * (u1 - u2))
                + kernel.eval_sqdist((v1 - v2) * (v1 - v2))
                - kernel.eval_sqdist((u1 - v1) * (u1 - v1))
                - kernel.eval_sqdist((u2 - v2) * (u2 - v2));
            terms.push(t);
        }
        let mean = terms.iter().sum::<f64>() / n as f64;
        let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn duplicated_point_batches_have_closed_form() {
        let kernel = BaseKernelParams::rbf(1.0);
        let u = constant_batch(0.0, 8);
        let v = constant_batch(1.0, 8);
        let want = 2.0 - 2.0 * (-0.5_f64).exp();
        assert_abs_diff_eq!(mmd2_empirical(&kernel, &u, &v).unwrap(), want, epsilon = 1e-12);
        // Same duplicated batch on both sides: exactly zero.
        assert_eq!(mmd2_empirical(&kernel, &u, &u.clone()).unwrap(), 0.0);
        // Nystrom agrees for any h, including rank-one landmark blocks.
        for h in [1, 3, 8] {
            let got = mmd2_nystrom(&kernel, &u, &v, h, 1e-10, 5).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn unbiased_estimate_is_small_for_iid_batches() {
        let kernel = BaseKernelParams::rq_mixture(0.5);
        let mut estimates = Vec::new();
        for seed in 0..10 {
            let u = gaussian_batch(0.3, 0.2, 400, 100 + seed);
            let v = gaussian_batch(0.3, 0.2, 400, 200 + seed);
            estimates.push(mmd2_empirical(&kernel, &u, &v).unwrap());
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let sd = (estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (estimates.len() - 1) as f64)
            .sqrt();
        // Mean over seeds should sit within 3 standard errors of zero.
        assert!(
            mean.abs() <= 3.0 * sd / (estimates.len() as f64).sqrt() + 1e-12,
            "mean {mean}, sd {sd}"
        );
        // And individual estimates are allowed to be negative.
        assert!(estimates.iter().any(|e| *e != 0.0));
    }

    #[test]
    fn empirical_estimate_approaches_population_value() {
        let kernel = BaseKernelParams::rq_mixture(0.3);
        let (reference, se_ref) = {
            let a = beta_batch(0.0, 400_000, 777);
            let b = beta_batch(0.06, 400_000, 778);
            population_mmd2(&kernel, &a, &b)
        };
        let mut estimates = Vec::new();
        for seed in 0..8 {
            let u = beta_batch(0.0, 2000, 300 + seed);
            let v = beta_batch(0.06, 2000, 400 + seed);
            estimates.push(mmd2_empirical(&kernel, &u, &v).unwrap());
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let sd = (estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (estimates.len() - 1) as f64)
            .sqrt();
        let tol = 2.0 * (sd / (estimates.len() as f64).sqrt() + se_ref);
        assert!(
            (mean - reference).abs() <= tol,
            "mean {mean} vs reference {reference} (tol {tol})"
        );
    }

    #[test]
    fn full_landmark_rank_reproduces_v_statistic() {
        // Distinct, well-separated samples relative to the lengthscale, so
        // the landmark block is genuinely invertible and no pseudo-inverse
        // truncation occurs.
        let kernel = BaseKernelParams::rbf(0.03);
        let m = 24;
        let grid = |offset: f64| SampleBatch {
            points: DMatrix::from_fn(m, 1, |i, _| offset + i as f64 / (m - 1) as f64),
            center: DVector::from_vec(vec![offset]),
            seed_tag: 0,
        };
        let u = grid(0.0);
        let v = grid(0.13);
        let got = mmd2_nystrom(&kernel, &u, &v, m, 1e-10, 3).unwrap();
        let want = v_statistic(&kernel, &u, &v).max(0.0);
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
    }

    #[test]
    fn nystrom_tracks_empirical_across_offsets() {
        let kernel = BaseKernelParams::rq_mixture(0.3);
        for (i, offset) in [0.01, 0.05, 0.1, 0.2].iter().enumerate() {
            let u = beta_batch(0.0, 100, 50 + i as u64);
            let v = beta_batch(*offset, 100, 90 + i as u64);
            let emp = mmd2_empirical(&kernel, &u, &v).unwrap();
            let nys = mmd2_nystrom(&kernel, &u, &v, 10, 1e-10, 7).unwrap();
            assert!(
                (emp - nys).abs() <= 0.05,
                "offset {offset}: empirical {emp} vs nystrom {nys}"
            );
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let kernel = BaseKernelParams::rq_mixture(0.3);
        let u = gaussian_batch(0.0, 0.1, 60, 1);
        let v = gaussian_batch(0.2, 0.1, 60, 2);
        let a = mmd2_nystrom(&kernel, &u, &v, 12, 1e-10, 9).unwrap();
        let b = mmd2_nystrom(&kernel, &u, &v, 12, 1e-10, 9).unwrap();
        assert_eq!(a, b);
        assert!(a >= 0.0);
    }

    #[test]
    fn gram_is_symmetric_with_zero_diagonal() {
        let kernel = BaseKernelParams::rq_mixture(0.3);
        let batches: Vec<SampleBatch> = (0..5)
            .map(|i| gaussian_batch(0.1 * i as f64, 0.05, 30, 500 + i as u64))
            .collect();
        for cfg in [EstimatorConfig::empirical(30), EstimatorConfig::nystrom(30, 6)] {
            let gram = mmd_gram(&kernel, &cfg, &batches, 13).unwrap();
            assert_eq!(gram, gram.transpose());
            for i in 0..5 {
                assert_eq!(gram[(i, i)], 0.0);
            }
        }
    }

    #[test]
    fn gram_of_identical_point_masses_is_zero() {
        let kernel = BaseKernelParams::rq_mixture(0.3);
        let batches: Vec<SampleBatch> = (0..4).map(|_| constant_batch(0.7, 10)).collect();
        let gram = mmd_gram(&kernel, &EstimatorConfig::empirical(10), &batches, 0).unwrap();
        assert_eq!(gram.abs().max(), 0.0);
    }

    #[test]
    fn gram_grows_with_center_offset() {
        let kernel = BaseKernelParams::rq_mixture(0.5);
        let batches: Vec<SampleBatch> = (0..8)
            .map(|i| gaussian_batch(0.25 * i as f64, 0.05, 80, 40 + i as u64))
            .collect();
        let gram = mmd_gram(&kernel, &EstimatorConfig::empirical(80), &batches, 0).unwrap();
        for j in 2..8 {
            assert!(
                gram[(0, j)] > gram[(0, j - 1)],
                "row 0 not increasing at {j}: {} vs {}",
                gram[(0, j)],
                gram[(0, j - 1)]
            );
        }
    }

    #[test]
    fn gram_matches_single_pair_estimates() {
        let kernel = BaseKernelParams::rq_mixture(0.4);
        let batches = vec![gaussian_batch(0.0, 0.1, 25, 1), gaussian_batch(0.3, 0.1, 25, 2)];
        let cfg = EstimatorConfig::nystrom(25, 5);
        let gram = mmd_gram(&kernel, &cfg, &batches, 99).unwrap();
        // Same per-batch landmark seeds as the gram assembly uses.
        let eu = nystrom_embed(&kernel, &batches[0], 5, 1e-10, derive_seed(99, &[0])).unwrap();
        let ev = nystrom_embed(&kernel, &batches[1], 5, 1e-10, derive_seed(99, &[1])).unwrap();
        let cross = nystrom_cross(&kernel, &eu, &ev).unwrap();
        let direct = (eu.self_term + ev.self_term - 2.0 * cross).max(0.0);
        assert_eq!(gram[(0, 1)], direct);
    }

    #[test]
    fn mismatched_batches_are_rejected() {
        let kernel = BaseKernelParams::rbf(1.0);
        let u = constant_batch(0.0, 8);
        let v = constant_batch(0.0, 9);
        assert!(matches!(
            mmd2_empirical(&kernel, &u, &v),
            Err(Error::BatchSizeMismatch(8, 9))
        ));
        let w = SampleBatch {
            points: DMatrix::zeros(8, 2),
            center: DVector::zeros(2),
            seed_tag: 0,
        };
        assert!(matches!(
            mmd2_empirical(&kernel, &u, &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn landmark_counts_are_checked() {
        let kernel = BaseKernelParams::rbf(1.0);
        let u = gaussian_batch(0.0, 0.1, 10, 1);
        assert!(matches!(
            nystrom_embed(&kernel, &u, 0, 1e-10, 0),
            Err(Error::LandmarkCount { h: 0, m: 10 })
        ));
        assert!(matches!(
            nystrom_embed(&kernel, &u, 11, 1e-10, 0),
            Err(Error::LandmarkCount { h: 11, m: 10 })
        ));
        assert!(EstimatorConfig::nystrom(10, 11).validate().is_err());
        assert!(EstimatorConfig::empirical(1).validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = EstimatorConfig::nystrom(100, 10);
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "nystrom", "m": 100, "h": 10, "pinv_tolerance": 1e-10})
        );
        let default_tol: EstimatorConfig =
            serde_json::from_value(serde_json::json!({"kind": "nystrom", "m": 50, "h": 5})).unwrap();
        assert_eq!(default_tol, EstimatorConfig::nystrom(50, 5));
        let bad = serde_json::json!({"kind": "empirical", "m": 20, "h": 5});
        assert!(serde_json::from_value::<EstimatorConfig>(bad).is_err());
    }
}
