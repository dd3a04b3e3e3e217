//! Base kernels on sample points.
//!
//! Everything downstream (MMD estimates, surrogate kernels) reduces to
//! evaluating a positive-definite kernel on pairs of sample points. Two
//! kinds are supported: a rational-quadratic mixture with five fixed
//! exponents and per-component learnable lengthscales, and a plain RBF.
//!
//! The mixture sums `(1 + d^2 / (2 a l_a^2))^(-a)` over
//! `a in {0.2, 0.5, 1, 2, 5}`, so its value at zero distance is exactly 5
//! and each component contributes at most 1. Mixing several tail
//! behaviours keeps the kernel sensitive across the range of MMD scales
//! met during optimization without retuning a single exponent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed exponents of the rational-quadratic mixture.
pub const RQ_EXPONENTS: [f64; 5] = [0.2, 0.5, 1.0, 2.0, 5.0];

/// Base kernel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseKernelParams {
    /// Rational-quadratic mixture with one lengthscale per exponent.
    RqMixture { lengthscales: [f64; 5] },
    /// Squared-exponential kernel with a single lengthscale.
    Rbf { lengthscale: f64 },
}

impl BaseKernelParams {
    /// Mixture with all five lengthscales equal.
    pub fn rq_mixture(lengthscale: f64) -> Self {
        BaseKernelParams::RqMixture {
            lengthscales: [lengthscale; 5],
        }
    }

    pub fn rbf(lengthscale: f64) -> Self {
        BaseKernelParams::Rbf { lengthscale }
    }

    pub fn validate(&self) -> Result<()> {
        let ls: &[f64] = match self {
            BaseKernelParams::RqMixture { lengthscales } => lengthscales,
            BaseKernelParams::Rbf { lengthscale } => std::slice::from_ref(lengthscale),
        };
        for &l in ls {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "lengthscale",
                    message: format!("must be a positive finite number, got {l}"),
                });
            }
        }
        Ok(())
    }

    /// Kernel value at zero distance: the upper bound of the kernel.
    pub fn k_zero(&self) -> f64 {
        match self {
            BaseKernelParams::RqMixture { .. } => RQ_EXPONENTS.len() as f64,
            BaseKernelParams::Rbf { .. } => 1.0,
        }
    }

    /// Learnable lengthscales as a flat slice.
    pub fn lengthscales(&self) -> &[f64] {
        match self {
            BaseKernelParams::RqMixture { lengthscales } => lengthscales,
            BaseKernelParams::Rbf { lengthscale } => std::slice::from_ref(lengthscale),
        }
    }

    /// Replaces the lengthscales from a flat slice of matching length.
    pub fn set_lengthscales(&mut self, values: &[f64]) -> Result<()> {
        match self {
            BaseKernelParams::RqMixture { lengthscales } => {
                if values.len() != lengthscales.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lengthscales.len(),
                        got: values.len(),
                    });
                }
                lengthscales.copy_from_slice(values);
            }
            BaseKernelParams::Rbf { lengthscale } => {
                if values.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: values.len(),
                    });
                }
                *lengthscale = values[0];
            }
        }
        self.validate()
    }

    /// Kernel value for one squared distance.
    pub fn eval_sqdist(&self, d2: f64) -> f64 {
        match self {
            BaseKernelParams::RqMixture { lengthscales } => {
                let l = lengthscales;
                // One powf for the a = 0.2 term; the others reduce to
                // sqrt, divisions and multiplications. This path dominates
                // inference cost, so it is kept branch-free and cheap.
                let t0 = (1.0 + d2 / (0.4 * l[0] * l[0])).powf(-0.2);
                let t1 = 1.0 / (1.0 + d2 / (l[1] * l[1])).sqrt();
                let t2 = 1.0 / (1.0 + d2 / (2.0 * l[2] * l[2]));
                let b3 = 1.0 + d2 / (4.0 * l[3] * l[3]);
                let t3 = 1.0 / (b3 * b3);
                let b4 = 1.0 + d2 / (10.0 * l[4] * l[4]);
                let b4sq = b4 * b4;
                let t4 = 1.0 / (b4sq * b4sq * b4);
                t0 + t1 + t2 + t3 + t4
            }
            BaseKernelParams::Rbf { lengthscale } => (-d2 / (2.0 * lengthscale * lengthscale)).exp(),
        }
    }

    /// Cross kernel matrix between the rows of `u` (m x d) and `v` (p x d).
    pub fn eval_base(&self, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.validate()?;
        let mut out = pairwise_sqdist(u, v)?;
        out.apply(|d2| *d2 = self.eval_sqdist(*d2));
        Ok(out)
    }
}

/// Pairwise squared distances between the rows of `u` and `v`, computed as
/// `|u|^2 + |v|^2 - 2 u.v` and clamped at zero so round-off can never
/// produce a negative squared distance.
pub fn pairwise_sqdist(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u.ncols() != v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            got: v.ncols(),
        });
    }
    if u.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kernel input"));
    }
    let d = u.ncols();
    let m = u.nrows();
    let p = v.nrows();
    let un: Vec<f64> = (0..m).map(|i| u.row(i).iter().map(|x| x * x).sum()).collect();
    let vn: Vec<f64> = (0..p).map(|j| v.row(j).iter().map(|x| x * x).sum()).collect();
    let mut out = DMatrix::zeros(m, p);
    for i in 0..m {
        for j in 0..p {
            let mut dot = 0.0;
            for k in 0..d {
                dot += u[(i, k)] * v[(j, k)];
            }
            out[(i, j)] = (un[i] + vn[j] - 2.0 * dot).max(0.0);
        }
    }
    Ok(out)
}

/// Median pairwise distance over the rows of the given matrices, pooled.
///
/// The usual initialization for kernel lengthscales: pick the scale at
/// which typical point pairs sit. At most `cap` points are pooled (taken
/// round-robin from the inputs) to bound the quadratic pair count. Returns
/// a small positive fallback when every pair coincides.
pub fn median_pairwise_distance(point_sets: &[&DMatrix<f64>], cap: usize) -> f64 {
    let mut pooled: Vec<Vec<f64>> = Vec::new();
    let mut exhausted = false;
    let mut row = 0;
    while pooled.len() < cap && !exhausted {
        exhausted = true;
        for set in point_sets {
            if row < set.nrows() && pooled.len() < cap {
                pooled.push(set.row(row).iter().cloned().collect());
                exhausted = false;
            }
        }
        row += 1;
    }
    let n = pooled.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = pooled[i]
                .iter()
                .zip(&pooled[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 > 0.0 {
                dists.push(d2.sqrt());
            }
        }
    }
    if dists.is_empty() {
        return 1e-3;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[dists.len() / 2]
}
