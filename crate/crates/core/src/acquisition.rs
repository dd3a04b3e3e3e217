//! Acquisition functions and their maximization over the design box.
//!
//! Candidate selection uses an upper confidence bound on the surrogate
//! posterior. Because the distributional surrogates evaluate their posterior
//! through fresh sample batches, the acquisition surface is itself noisy;
//! the maximizer therefore avoids gradients entirely and combines a
//! low-discrepancy prescan of the box with greedy coordinate refinement of
//! the best prescan candidates. Every candidate evaluation draws its query
//! batch from a seed derived from the search seed and a running counter, so
//! a search is reproducible point for point.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::surrogate::{Posterior, SurrogateModel};
use rand::Rng;

/// Hard cap on prescan candidates regardless of dimension.
pub const PRESCAN_CAP: usize = 4096;

const DESIGN_TAG: u64 = 1;
const CANDIDATE_TAG: u64 = 2;

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl BoxDomain {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// Unit box `[0, 1]^d`.
    pub fn unit(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                message: "domain dimension must be at least one".into(),
            });
        }
        Self::new(DVector::zeros(dim), DVector::from_element(dim, 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        if self.lower.is_empty() {
            return Err(Error::InvalidParameter {
                name: "domain",
                message: "domain dimension must be at least one".into(),
            });
        }
        for i in 0..self.lower.len() {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("domain bound"));
            }
            if lo > hi {
                return Err(Error::InvalidParameter {
                    name: "domain",
                    message: format!("lower bound {lo} exceeds upper bound {hi} in coordinate {i}"),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Euclidean length of the box diagonal; degenerate boxes report zero.
    pub fn diameter(&self) -> f64 {
        (&self.upper - &self.lower).norm()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && (0..x.len()).all(|i| x[i] >= self.lower[i] && x[i] <= self.upper[i])
    }

    pub fn clamp(&self, x: &mut DVector<f64>) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Whether every coordinate range collapses to a point.
    pub fn is_degenerate(&self) -> bool {
        (0..self.dim()).all(|i| self.upper[i] == self.lower[i])
    }

    /// Center of the box.
    pub fn midpoint(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }
}

/// Search controls for `maximize_acquisition`.
#[derive(Debug, Clone)]
pub struct AcquisitionOptions {
    /// Exploration weight in the upper confidence bound.
    pub beta: f64,
    /// Prescan resolution per axis; the total candidate count is
    /// `prescan_grid^d` capped at `PRESCAN_CAP`.
    pub prescan_grid: usize,
    /// How many of the best prescan candidates receive local refinement.
    pub restarts: usize,
    /// Maximum refinement sweeps per restart; each sweep tries a step up
    /// and down along every coordinate.
    pub max_local_steps: usize,
}

impl Default for AcquisitionOptions {
    fn default() -> Self {
        Self {
            beta: 2.0,
            prescan_grid: 64,
            restarts: 4,
            max_local_steps: 30,
        }
    }
}

impl AcquisitionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                message: format!("must be finite and nonnegative, got {}", self.beta),
            });
        }
        if self.prescan_grid == 0 {
            return Err(Error::InvalidParameter {
                name: "prescan_grid",
                message: "must be at least one".into(),
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                message: "must be at least one".into(),
            });
        }
        Ok(())
    }
}

/// Result of one acquisition maximization.
#[derive(Debug, Clone)]
pub struct Maximized {
    pub x: DVector<f64>,
    pub value: f64,
    /// Posterior evaluations spent on the search.
    pub evaluations: usize,
}

/// Recommended incumbent after an iteration.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Index into the model's observation list.
    pub index: usize,
    pub center: DVector<f64>,
    /// Posterior mean at that center.
    pub mean: f64,
}

/// Upper confidence bound `mean + beta * sqrt(var)`.
pub fn ucb(post: &Posterior, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("must be finite and nonnegative, got {beta}"),
        });
    }
    if !post.mean.is_finite() || !post.var.is_finite() {
        return Err(Error::NonFinite("posterior"));
    }
    if post.var < 0.0 {
        return Err(Error::InvalidParameter {
            name: "variance",
            message: format!("negative predictive variance {}", post.var),
        });
    }
    Ok(post.mean + beta * post.var.sqrt())
}

/// Smallest `d` primes, for the Halton bases.
fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().all(|p| candidate % p != 0) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Van der Corput radical inverse of `n` in the given base.
fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while n > 0 {
        r += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    r
}

/// `n` points of a randomized Halton sequence scaled into the box: the
/// standard sequence (indices starting at one) shifted per coordinate by a
/// seeded rotation modulo one, which breaks the correlation artifacts of
/// plain Halton in higher dimensions while keeping low discrepancy and full
/// determinism.
pub fn low_discrepancy_design(domain: &BoxDomain, n: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    domain.validate()?;
    let d = domain.dim();
    let bases = primes(d);
    let mut rng = stream(seed);
    let rot: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(n);
    for i in 1..=n as u64 {
        let x = DVector::from_fn(d, |j, _| {
            let u = (radical_inverse(i, bases[j]) + rot[j]).fract();
            domain.lower[j] + u * (domain.upper[j] - domain.lower[j])
        });
        out.push(x);
    }
    Ok(out)
}

/// Maximizes the UCB of the model posterior over the box.
///
/// A low-discrepancy prescan (seeded from `seed`) scores up to `PRESCAN_CAP`
/// candidates; the best `restarts` of them are refined by greedy coordinate
/// search with shrinking steps. Candidate `k` of the whole search draws its
/// posterior query batch from `(seed, k)`, so results are reproducible and
/// independent across candidates. Ties prefer the earlier candidate.
pub fn maximize_acquisition(
    model: &SurrogateModel,
    domain: &BoxDomain,
    opts: &AcquisitionOptions,
    seed: u64,
) -> Result<Maximized> {
    domain.validate()?;
    opts.validate()?;
    let d = domain.dim();

    let mut counter = 0u64;
    let mut evaluate = |x: &DVector<f64>| -> Result<f64> {
        let post = model.posterior_seeded(
            std::slice::from_ref(x),
            derive_seed(seed, &[CANDIDATE_TAG, counter]),
        )?;
        counter += 1;
        ucb(&post[0], opts.beta)
    };

    if domain.is_degenerate() {
        let x = domain.lower.clone();
        let value = evaluate(&x)?;
        return Ok(Maximized {
            x,
            value,
            evaluations: counter as usize,
        });
    }

    let total = opts
        .prescan_grid
        .saturating_pow(d as u32)
        .min(PRESCAN_CAP)
        .max(opts.restarts);
    let points = low_discrepancy_design(domain, total, derive_seed(seed, &[DESIGN_TAG]))?;
    let mut scored: Vec<(f64, DVector<f64>)> = Vec::with_capacity(points.len());
    for p in points {
        let v = evaluate(&p)?;
        scored.push((v, p));
    }
    // Stable sort keeps earlier candidates first among exact ties.
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let per_axis = (total as f64).powf(1.0 / d as f64).round().max(2.0);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for (start_val, start) in scored.into_iter().take(opts.restarts) {
        let mut x = start;
        let mut fx = start_val;
        let mut steps: Vec<f64> = (0..d)
            .map(|i| (domain.upper[i] - domain.lower[i]) / per_axis)
            .collect();
        for _ in 0..opts.max_local_steps {
            let mut improved = false;
            for dim in 0..d {
                if steps[dim] == 0.0 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    let mut cand = x.clone();
                    cand[dim] = (cand[dim] + sign * steps[dim])
                        .clamp(domain.lower[dim], domain.upper[dim]);
                    if cand[dim] == x[dim] {
                        continue;
                    }
                    let fc = evaluate(&cand)?;
                    if fc > fx {
                        x = cand;
                        fx = fc;
                        improved = true;
                    }
                }
            }
            if !improved {
                for s in steps.iter_mut() {
                    *s *= 0.5;
                }
                let widest = (0..d)
                    .map(|i| {
                        let range = domain.upper[i] - domain.lower[i];
                        if range > 0.0 {
                            steps[i] / range
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                if widest < 1e-4 {
                    break;
                }
            }
        }
        if best.as_ref().map_or(true, |b| fx > b.0) {
            best = Some((fx, x));
        }
    }

    let (value, x) = best.expect("restarts is at least one");
    Ok(Maximized {
        x,
        value,
        evaluations: counter as usize,
    })
}

/// Recommends the observed center with the highest posterior mean, breaking
/// ties toward the earliest observation.
pub fn outcome(model: &SurrogateModel) -> Result<Outcome> {
    if model.n_train() == 0 {
        return Err(Error::EmptyObservations);
    }
    let centers = model.centers().to_vec();
    let post = model.posterior(&centers)?;
    let mut best = 0usize;
    for (i, p) in post.iter().enumerate() {
        if p.mean > post[best].mean {
            best = i;
        }
    }
    Ok(Outcome {
        index: best,
        center: centers[best].clone(),
        mean: post[best].mean,
    })
}
