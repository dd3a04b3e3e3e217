//! Gaussian-process surrogates over input distributions.
//!
//! The surrogate treats each design point as the distribution the optimizer
//! will actually be evaluated under: a location family placed at the chosen
//! center. Similarity between two such inputs is measured with a squared
//! maximum mean discrepancy estimate `D` and turned into a kernel
//! `exp(-alpha * max(D, 0))`, which stays in `(0, 1]` and equals one exactly
//! for identical inputs. Several reference surrogates share the same
//! regression machinery:
//!
//! * `MmdGp` - the MMD kernel above, with either the unbiased empirical
//!   estimator or the landmark-projected one.
//! * `VanillaGp` - a direct GP on the design centers that ignores the input
//!   distribution entirely, using the induced distance
//!   `2 k(0) - 2 k_base(x, x')`. On point-mass inputs the MMD surrogate must
//!   reproduce it, which the tests use as an exactness oracle.
//! * `Skl` - a kernel `exp(-alpha * SKL)` on moment-matched Gaussians, with
//!   the symmetric Kullback-Leibler divergence; pairs involving a point mass
//!   fall back to the normalized base kernel on the means.
//! * `Erbf` - the closed-form expectation of an RBF kernel under the
//!   moment-matched Gaussians, scaled by a fitted output variance.
//!
//! The two Gaussian baselines summarize the input law once: offset draws
//! taken at the zero center are moment-matched and that single Gaussian is
//! recentered at every design point. Laws whose shape changes with the
//! center are thus flattened to one shape, which is the misspecification
//! these baselines are meant to exhibit.
//! * `Ugp` - the base kernel averaged over sampled input pairs, the
//!   "uncertain inputs by integration" construction, also with an output
//!   scale.
//!
//! All randomness is derived from the model seed: training point `i` draws
//! its batch (or its moment sample) from a seed tagged with `i`, so batches
//! are drawn once per model and reused across refits, while posterior
//! queries draw fresh batches from seeds tagged with the query index.

mod fit;
pub mod gaussian;

pub use fit::{FitOptions, FitReport};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::kernel::BaseKernelParams;
use crate::linalg::cholesky_with_jitter;
use crate::mmd::{
    empirical_cross_term, empirical_self_term, mmd2, nystrom_cross, nystrom_embed,
    EstimatorConfig, NystromEmbedding,
};
use crate::rng::derive_seed;
use crate::udist::{sample, InputDistribution, LocatedDistribution, SampleBatch};
use gaussian::GaussianMoments;

/// Number of draws used to moment-match a distribution for the Gaussian
/// baselines.
pub const MOMENT_DRAWS: usize = 10_000;

const TRAIN_TAG: u64 = 1;
const QUERY_TAG: u64 = 2;
const MOMENT_TAG: u64 = 3;
const LANDMARK_TAG: u64 = 4;

/// Which surrogate family the model implements.
#[derive(Debug, Clone, PartialEq)]
pub enum SurrogateKind {
    MmdGp,
    VanillaGp,
    Skl,
    Erbf,
    /// Base kernel averaged over `m` sampled input pairs.
    Ugp { m: usize },
}

impl SurrogateKind {
    pub fn name(&self) -> &'static str {
        match self {
            SurrogateKind::MmdGp => "mmdgp",
            SurrogateKind::VanillaGp => "vanilla_gp",
            SurrogateKind::Skl => "skl",
            SurrogateKind::Erbf => "erbf",
            SurrogateKind::Ugp { .. } => "ugp",
        }
    }

    fn uses_batches(&self) -> bool {
        matches!(self, SurrogateKind::MmdGp | SurrogateKind::Ugp { .. })
    }

    fn uses_moments(&self) -> bool {
        matches!(self, SurrogateKind::Skl | SurrogateKind::Erbf)
    }
}

/// Predictive mean and variance at one query.
#[derive(Debug, Clone, Copy)]
pub struct Posterior {
    pub mean: f64,
    pub var: f64,
}

/// How a structural similarity matrix is mapped to kernel amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AmpMap {
    /// `K = exp(-alpha * max(M, 0))`, used for divergence-valued matrices.
    ExpNegAlpha,
    /// `K = scale * M`, used when the matrix already holds kernel values.
    Scale,
}

/// Structural part of the Gram matrix, before the cheap amplitude parameters
/// are applied. Divergence-valued matrices carry a zero diagonal; kernel
/// valued ones carry their own diagonal. `overrides` holds entries whose
/// final kernel value is fixed regardless of the amplitude (degenerate
/// moment pairs).
#[derive(Debug, Clone)]
pub(crate) struct PreGram {
    pub(crate) mat: DMatrix<f64>,
    pub(crate) map: AmpMap,
    pub(crate) overrides: Vec<(usize, usize, f64)>,
}

impl PreGram {
    pub(crate) fn apply(&self, amp: f64) -> DMatrix<f64> {
        let n = self.mat.nrows();
        let mut k = match self.map {
            AmpMap::ExpNegAlpha => {
                DMatrix::from_fn(n, n, |i, j| (-amp * self.mat[(i, j)].max(0.0)).exp())
            }
            AmpMap::Scale => &self.mat * amp,
        };
        for &(i, j, v) in &self.overrides {
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k
    }
}

/// Per-training-point structures needed to evaluate query cross-kernels,
/// valid for one set of lengthscales.
#[derive(Debug, Clone, Default)]
pub(crate) struct TrainSupport {
    empirical_selfs: Vec<f64>,
    embeddings: Vec<NystromEmbedding>,
}

/// Factorized state after `refresh` or `fit`.
#[derive(Debug, Clone)]
struct FittedState {
    chol: Cholesky<f64, Dyn>,
    #[allow(dead_code)]
    jitter: f64,
    weights: DVector<f64>,
    lml: f64,
    support: TrainSupport,
}

/// One query, reduced to whatever the active kernel needs.
enum QueryState {
    EmpiricalBatch { batch: SampleBatch, self_term: f64 },
    Embedding(NystromEmbedding),
    Center(DVector<f64>),
    Moments(GaussianMoments),
    UgpBatch(SampleBatch),
}

/// A GP surrogate over input distributions with one shared location family.
#[derive(Debug)]
pub struct SurrogateModel {
    kind: SurrogateKind,
    base: BaseKernelParams,
    estimator: EstimatorConfig,
    law: InputDistribution,
    domain_diameter: f64,
    seed: u64,
    alpha: f64,
    out_scale: f64,
    noise_var: f64,
    centers: Vec<DVector<f64>>,
    y: Vec<f64>,
    train_batches: Vec<SampleBatch>,
    train_moments: Vec<GaussianMoments>,
    shared_offset: Option<(DVector<f64>, DMatrix<f64>)>,
    fitted: Option<FittedState>,
}

impl SurrogateModel {
    /// Creates an empty model. `domain_diameter` scales the lengthscale
    /// bounds used during fitting.
    pub fn new(
        kind: SurrogateKind,
        base: BaseKernelParams,
        estimator: EstimatorConfig,
        law: InputDistribution,
        domain_diameter: f64,
        seed: u64,
    ) -> Result<Self> {
        base.validate()?;
        estimator.validate()?;
        if !(domain_diameter.is_finite() && domain_diameter > 0.0) {
            return Err(Error::InvalidParameter {
                name: "domain_diameter",
                message: format!("must be finite and positive, got {domain_diameter}"),
            });
        }
        if matches!(kind, SurrogateKind::Erbf) && !matches!(base, BaseKernelParams::Rbf { .. }) {
            return Err(Error::InvalidParameter {
                name: "base",
                message: "the expected-RBF surrogate requires an RBF base kernel".into(),
            });
        }
        if let SurrogateKind::Ugp { m } = kind {
            if m < 2 {
                return Err(Error::SampleSize(m));
            }
        }
        let shared_offset = if kind.uses_moments() {
            let zero = DVector::zeros(law.dim());
            Some(gaussian::offset_moments(
                &law,
                &zero,
                MOMENT_DRAWS,
                derive_seed(seed, &[MOMENT_TAG]),
            )?)
        } else {
            None
        };
        Ok(Self {
            kind,
            base,
            estimator,
            law,
            domain_diameter,
            seed,
            alpha: 1.0,
            out_scale: 1.0,
            noise_var: 1e-2,
            centers: Vec::new(),
            y: Vec::new(),
            train_batches: Vec::new(),
            train_moments: Vec::new(),
            shared_offset,
            fitted: None,
        })
    }

    pub fn kind(&self) -> &SurrogateKind {
        &self.kind
    }

    pub fn base(&self) -> &BaseKernelParams {
        &self.base
    }

    pub fn estimator(&self) -> &EstimatorConfig {
        &self.estimator
    }

    pub fn law(&self) -> &InputDistribution {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain_diameter(&self) -> f64 {
        self.domain_diameter
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn out_scale(&self) -> f64 {
        self.out_scale
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn n_train(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    /// Log marginal likelihood from the last `refresh` or `fit`, if any.
    pub fn log_marginal(&self) -> Option<f64> {
        self.fitted.as_ref().map(|s| s.lml)
    }

    /// Overwrites hyperparameters, dropping any factorized state. `None`
    /// leaves a parameter unchanged.
    pub fn set_hyperparameters(
        &mut self,
        lengthscales: Option<&[f64]>,
        alpha: Option<f64>,
        out_scale: Option<f64>,
        noise_var: Option<f64>,
    ) -> Result<()> {
        if let Some(ls) = lengthscales {
            self.base.set_lengthscales(ls)?;
        }
        if let Some(a) = alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    message: format!("must be finite and positive, got {a}"),
                });
            }
            self.alpha = a;
        }
        if let Some(s) = out_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "out_scale",
                    message: format!("must be finite and positive, got {s}"),
                });
            }
            self.out_scale = s;
        }
        if let Some(nv) = noise_var {
            if !(nv.is_finite() && nv > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "noise_var",
                    message: format!("must be finite and positive, got {nv}"),
                });
            }
            self.noise_var = nv;
        }
        self.fitted = None;
        Ok(())
    }

    /// Appends one observation, drawing its per-point sample batch or moment
    /// estimate exactly once.
    pub fn add_observation(&mut self, center: DVector<f64>, y: f64) -> Result<()> {
        if center.len() != self.law.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.law.dim(),
                got: center.len(),
            });
        }
        if center.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(Error::NonFinite("observation"));
        }
        let idx = self.centers.len() as u64;
        if self.kind.uses_batches() {
            let m = self.batch_size();
            let batch = sample(
                &self.law,
                &center,
                m,
                derive_seed(self.seed, &[TRAIN_TAG, idx]),
            )?;
            self.train_batches.push(batch);
        }
        if self.kind.uses_moments() {
            let moments = self.moments_for(&center, derive_seed(self.seed, &[MOMENT_TAG, idx]))?;
            self.train_moments.push(moments);
        }
        self.centers.push(center);
        self.y.push(y);
        self.fitted = None;
        Ok(())
    }

    /// Replaces the full training set.
    pub fn set_data(&mut self, centers: &[DVector<f64>], y: &[f64]) -> Result<()> {
        if centers.len() != y.len() {
            return Err(Error::BatchSizeMismatch(centers.len(), y.len()));
        }
        self.centers.clear();
        self.y.clear();
        self.train_batches.clear();
        self.train_moments.clear();
        self.fitted = None;
        for (c, &v) in centers.iter().zip(y) {
            self.add_observation(c.clone(), v)?;
        }
        Ok(())
    }

    /// Rebuilds the Gram matrix and its factorization at the current
    /// hyperparameters and returns the log marginal likelihood.
    pub fn refresh(&mut self) -> Result<f64> {
        let n = self.centers.len();
        if n == 0 {
            return Err(Error::EmptyObservations);
        }
        let ls = self.base.lengthscales().to_vec();
        let (pre, support) = self.pregram_at(&ls, 0)?;
        let mut ky = pre.apply(self.amp_value());
        for i in 0..n {
            ky[(i, i)] += self.noise_var;
        }
        let (chol, jitter) = cholesky_with_jitter(&ky)?;
        let yv = DVector::from_column_slice(&self.y);
        let weights = chol.solve(&yv);
        let half_logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        let lml = -0.5 * yv.dot(&weights)
            - half_logdet
            - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        if !lml.is_finite() {
            return Err(Error::NonFinite("log marginal likelihood"));
        }
        self.fitted = Some(FittedState {
            chol,
            jitter,
            weights,
            lml,
            support,
        });
        Ok(lml)
    }

    /// Posterior at query centers under the model's input law, with query
    /// batch seeds derived from the model seed.
    pub fn posterior(&self, queries: &[DVector<f64>]) -> Result<Vec<Posterior>> {
        self.posterior_seeded(queries, derive_seed(self.seed, &[QUERY_TAG]))
    }

    /// Posterior with an explicit seed base; query `i` draws from
    /// `(seed_base, i)`. Callers that evaluate candidates one at a time pass
    /// a distinct base per candidate to keep draws independent.
    pub fn posterior_seeded(&self, queries: &[DVector<f64>], seed_base: u64) -> Result<Vec<Posterior>> {
        let n = self.centers.len();
        if n > 0 && self.fitted.is_none() {
            return Err(Error::NotFitted);
        }
        let mut out = Vec::with_capacity(queries.len());
        for (qi, q) in queries.iter().enumerate() {
            if q.len() != self.law.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.law.dim(),
                    got: q.len(),
                });
            }
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("query center"));
            }
            let qs = self.query_state(q, derive_seed(seed_base, &[qi as u64]))?;
            let prior = self.self_value(&qs)?;
            if n == 0 {
                out.push(Posterior {
                    mean: 0.0,
                    var: prior,
                });
                continue;
            }
            let st = self.fitted.as_ref().expect("checked above");
            let kvec = self.cross_vector(&qs, st)?;
            let mean = kvec.dot(&st.weights);
            let var = (prior - kvec.dot(&st.chol.solve(&kvec))).max(0.0);
            if !mean.is_finite() {
                return Err(Error::NonFinite("posterior mean"));
            }
            out.push(Posterior { mean, var });
        }
        Ok(out)
    }

    /// Unit-amplitude kernel value between two located distributions, using
    /// fresh draws derived from `seed`. Identical descriptors are at
    /// distance zero by definition, so divergence-based kernels return
    /// exactly one for them; the expectation-based kernels report their
    /// honest self-similarity instead.
    pub fn kernel_dist(
        &self,
        p: &LocatedDistribution,
        q: &LocatedDistribution,
        seed: u64,
    ) -> Result<f64> {
        if p.dist.dim() != q.dist.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dist.dim(),
                got: q.dist.dim(),
            });
        }
        let same = p == q;
        let seed_p = derive_seed(seed, &[0]);
        let seed_q = if same { seed_p } else { derive_seed(seed, &[1]) };
        match &self.kind {
            SurrogateKind::MmdGp => {
                if same {
                    return Ok(1.0);
                }
                let m = self.estimator.sample_size();
                let bp = sample(&p.dist, &p.center, m, seed_p)?;
                let bq = sample(&q.dist, &q.center, m, seed_q)?;
                let d = mmd2(&self.base, &self.estimator, &bp, &bq, derive_seed(seed, &[2]))?;
                Ok((-self.alpha * d.max(0.0)).exp())
            }
            SurrogateKind::VanillaGp => {
                let d = 2.0 * self.base.k_zero() - 2.0 * self.base_pair(&p.center, &q.center)?;
                Ok((-self.alpha * d.max(0.0)).exp())
            }
            SurrogateKind::Skl => {
                let mp = self.moments_of(&p.dist, &p.center, seed_p)?;
                let mq = self.moments_of(&q.dist, &q.center, seed_q)?;
                match gaussian::symmetric_kl(&mp, &mq)? {
                    Some(s) => Ok((-self.alpha * s).exp()),
                    None => Ok(self.base_pair(&mp.mean, &mq.mean)? / self.base.k_zero()),
                }
            }
            SurrogateKind::Erbf => {
                let mp = self.moments_of(&p.dist, &p.center, seed_p)?;
                let mq = self.moments_of(&q.dist, &q.center, seed_q)?;
                gaussian::expected_rbf(&mp, &mq, self.rbf_lengthscale())
            }
            SurrogateKind::Ugp { m } => {
                let bp = sample(&p.dist, &p.center, *m, seed_p)?;
                let bq = sample(&q.dist, &q.center, *m, seed_q)?;
                empirical_cross_term(&self.base, &bp, &bq)
            }
        }
    }

    fn batch_size(&self) -> usize {
        match &self.kind {
            SurrogateKind::Ugp { m } => *m,
            _ => self.estimator.sample_size(),
        }
    }

    pub(crate) fn amp_map(&self) -> AmpMap {
        match self.kind {
            SurrogateKind::MmdGp | SurrogateKind::VanillaGp | SurrogateKind::Skl => {
                AmpMap::ExpNegAlpha
            }
            SurrogateKind::Erbf | SurrogateKind::Ugp { .. } => AmpMap::Scale,
        }
    }

    pub(crate) fn amp_value(&self) -> f64 {
        match self.amp_map() {
            AmpMap::ExpNegAlpha => self.alpha,
            AmpMap::Scale => self.out_scale,
        }
    }

    pub(crate) fn set_amp_value(&mut self, amp: f64) {
        match self.amp_map() {
            AmpMap::ExpNegAlpha => self.alpha = amp,
            AmpMap::Scale => self.out_scale = amp,
        }
    }

    pub(crate) fn set_noise_value(&mut self, noise: f64) {
        self.noise_var = noise;
    }

    pub(crate) fn set_lengthscale_values(&mut self, ls: &[f64]) -> Result<()> {
        self.base.set_lengthscales(ls)?;
        self.fitted = None;
        Ok(())
    }

    fn rbf_lengthscale(&self) -> f64 {
        match &self.base {
            BaseKernelParams::Rbf { lengthscale } => *lengthscale,
            BaseKernelParams::RqMixture { lengthscales } => lengthscales[2],
        }
    }

    fn base_pair(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        let ra = DMatrix::from_row_slice(1, a.len(), a.as_slice());
        let rb = DMatrix::from_row_slice(1, b.len(), b.as_slice());
        Ok(self.base.eval_base(&ra, &rb)?[(0, 0)])
    }

    /// Moments under the model's shared law: the single cached offset
    /// summary recentered at `center`. The Gaussian baselines describe
    /// every center with the same offset shape on purpose; blindness to
    /// center-dependent structure is the misspecification they embody.
    fn moments_for(&self, center: &DVector<f64>, seed: u64) -> Result<GaussianMoments> {
        if let Some((off, cov)) = &self.shared_offset {
            return gaussian::recenter(off, cov, center);
        }
        gaussian::moment_match(&self.law, center, MOMENT_DRAWS, seed)
    }

    /// Moments for an arbitrary located distribution, reusing the shared
    /// offsets only when the law matches the model's.
    fn moments_of(
        &self,
        dist: &InputDistribution,
        center: &DVector<f64>,
        seed: u64,
    ) -> Result<GaussianMoments> {
        if dist == &self.law {
            if let Some((off, cov)) = &self.shared_offset {
                return gaussian::recenter(off, cov, center);
            }
        }
        gaussian::moment_match(dist, center, MOMENT_DRAWS, seed)
    }

    fn center_matrix(&self) -> DMatrix<f64> {
        let n = self.centers.len();
        let d = self.law.dim();
        DMatrix::from_fn(n, d, |i, j| self.centers[i][j])
    }

    fn truncated_batches(&self, cap: usize) -> Vec<SampleBatch> {
        self.train_batches
            .iter()
            .map(|b| {
                if cap == 0 || b.len() <= cap {
                    b.clone()
                } else {
                    SampleBatch {
                        points: b.points.rows(0, cap).into_owned(),
                        center: b.center.clone(),
                        seed_tag: b.seed_tag,
                    }
                }
            })
            .collect()
    }

    /// Structural Gram at the given lengthscales. `subsample` caps the rows
    /// of each cached batch during fitting (0 keeps all); landmark seeds are
    /// fixed per training index so candidates see the same projections.
    pub(crate) fn pregram_at(
        &self,
        lengthscales: &[f64],
        subsample: usize,
    ) -> Result<(PreGram, TrainSupport)> {
        let mut base = self.base.clone();
        base.set_lengthscales(lengthscales)?;
        let n = self.centers.len();
        let mut mat = DMatrix::zeros(n, n);
        let mut overrides = Vec::new();
        let mut support = TrainSupport::default();
        match &self.kind {
            SurrogateKind::MmdGp => match &self.estimator {
                EstimatorConfig::Empirical { .. } => {
                    let batches = self.truncated_batches(subsample);
                    let selfs: Vec<f64> = batches
                        .iter()
                        .map(|b| empirical_self_term(&base, b))
                        .collect::<Result<_>>()?;
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let cross = empirical_cross_term(&base, &batches[i], &batches[j])?;
                            let v = selfs[i] + selfs[j] - 2.0 * cross;
                            mat[(i, j)] = v;
                            mat[(j, i)] = v;
                        }
                    }
                    support.empirical_selfs = selfs;
                }
                EstimatorConfig::Nystrom {
                    h, pinv_tolerance, ..
                } => {
                    let batches = self.truncated_batches(subsample);
                    let embeddings: Vec<NystromEmbedding> = batches
                        .iter()
                        .enumerate()
                        .map(|(i, b)| {
                            let h_eff = (*h).min(b.len());
                            nystrom_embed(
                                &base,
                                b,
                                h_eff,
                                *pinv_tolerance,
                                derive_seed(self.seed, &[LANDMARK_TAG, i as u64]),
                            )
                        })
                        .collect::<Result<_>>()?;
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let cross = nystrom_cross(&base, &embeddings[i], &embeddings[j])?;
                            let v = (embeddings[i].self_term + embeddings[j].self_term
                                - 2.0 * cross)
                                .max(0.0);
                            mat[(i, j)] = v;
                            mat[(j, i)] = v;
                        }
                    }
                    support.embeddings = embeddings;
                }
            },
            SurrogateKind::VanillaGp => {
                let x = self.center_matrix();
                let kb = base.eval_base(&x, &x)?;
                let k0 = base.k_zero();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let v = 2.0 * k0 - 2.0 * kb[(i, j)];
                        mat[(i, j)] = v;
                        mat[(j, i)] = v;
                    }
                }
            }
            SurrogateKind::Skl => {
                let k0 = base.k_zero();
                for i in 0..n {
                    for j in (i + 1)..n {
                        match gaussian::symmetric_kl(&self.train_moments[i], &self.train_moments[j])? {
                            Some(s) => {
                                mat[(i, j)] = s;
                                mat[(j, i)] = s;
                            }
                            None => {
                                let v = self.base_pair_with(
                                    &base,
                                    &self.train_moments[i].mean,
                                    &self.train_moments[j].mean,
                                )? / k0;
                                overrides.push((i, j, v));
                            }
                        }
                    }
                }
            }
            SurrogateKind::Erbf => {
                let l = match &base {
                    BaseKernelParams::Rbf { lengthscale } => *lengthscale,
                    _ => unreachable!("constructor enforces an RBF base for Erbf"),
                };
                for i in 0..n {
                    for j in i..n {
                        let v = gaussian::expected_rbf(
                            &self.train_moments[i],
                            &self.train_moments[j],
                            l,
                        )?;
                        mat[(i, j)] = v;
                        mat[(j, i)] = v;
                    }
                }
            }
            SurrogateKind::Ugp { .. } => {
                let batches = self.truncated_batches(subsample);
                for i in 0..n {
                    for j in i..n {
                        let v = empirical_cross_term(&base, &batches[i], &batches[j])?;
                        mat[(i, j)] = v;
                        mat[(j, i)] = v;
                    }
                }
            }
        }
        Ok((
            PreGram {
                mat,
                map: self.amp_map(),
                overrides,
            },
            support,
        ))
    }

    fn base_pair_with(
        &self,
        base: &BaseKernelParams,
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> Result<f64> {
        let ra = DMatrix::from_row_slice(1, a.len(), a.as_slice());
        let rb = DMatrix::from_row_slice(1, b.len(), b.as_slice());
        Ok(base.eval_base(&ra, &rb)?[(0, 0)])
    }

    fn query_state(&self, center: &DVector<f64>, seed: u64) -> Result<QueryState> {
        match &self.kind {
            SurrogateKind::MmdGp => match &self.estimator {
                EstimatorConfig::Empirical { m } => {
                    let batch = sample(&self.law, center, *m, seed)?;
                    let self_term = empirical_self_term(&self.base, &batch)?;
                    Ok(QueryState::EmpiricalBatch { batch, self_term })
                }
                EstimatorConfig::Nystrom {
                    m, h, pinv_tolerance,
                } => {
                    let batch = sample(&self.law, center, *m, seed)?;
                    let emb = nystrom_embed(
                        &self.base,
                        &batch,
                        *h,
                        *pinv_tolerance,
                        derive_seed(seed, &[LANDMARK_TAG]),
                    )?;
                    Ok(QueryState::Embedding(emb))
                }
            },
            SurrogateKind::VanillaGp => Ok(QueryState::Center(center.clone())),
            SurrogateKind::Skl | SurrogateKind::Erbf => {
                Ok(QueryState::Moments(self.moments_for(center, seed)?))
            }
            SurrogateKind::Ugp { m } => {
                Ok(QueryState::UgpBatch(sample(&self.law, center, *m, seed)?))
            }
        }
    }

    /// Prior variance of a query, i.e. the kernel's self-similarity with the
    /// amplitude applied.
    fn self_value(&self, qs: &QueryState) -> Result<f64> {
        match qs {
            QueryState::EmpiricalBatch { .. }
            | QueryState::Embedding(_)
            | QueryState::Center(_) => Ok(1.0),
            QueryState::Moments(m) => match self.kind {
                SurrogateKind::Skl => Ok(1.0),
                _ => Ok(self.out_scale * gaussian::expected_rbf(m, m, self.rbf_lengthscale())?),
            },
            QueryState::UgpBatch(b) => {
                Ok(self.out_scale * empirical_cross_term(&self.base, b, b)?)
            }
        }
    }

    fn cross_vector(&self, qs: &QueryState, st: &FittedState) -> Result<DVector<f64>> {
        let n = self.centers.len();
        let mut k = DVector::zeros(n);
        match qs {
            QueryState::EmpiricalBatch { batch, self_term } => {
                for i in 0..n {
                    let cross = empirical_cross_term(&self.base, batch, &self.train_batches[i])?;
                    let d = self_term + st.support.empirical_selfs[i] - 2.0 * cross;
                    k[i] = (-self.alpha * d.max(0.0)).exp();
                }
            }
            QueryState::Embedding(emb) => {
                for i in 0..n {
                    let other = &st.support.embeddings[i];
                    let cross = nystrom_cross(&self.base, emb, other)?;
                    let d = (emb.self_term + other.self_term - 2.0 * cross).max(0.0);
                    k[i] = (-self.alpha * d).exp();
                }
            }
            QueryState::Center(q) => {
                let x = self.center_matrix();
                let rq = DMatrix::from_row_slice(1, q.len(), q.as_slice());
                let kb = self.base.eval_base(&rq, &x)?;
                let k0 = self.base.k_zero();
                for i in 0..n {
                    let d = 2.0 * k0 - 2.0 * kb[(0, i)];
                    k[i] = (-self.alpha * d.max(0.0)).exp();
                }
            }
            QueryState::Moments(mq) => match self.kind {
                SurrogateKind::Skl => {
                    let k0 = self.base.k_zero();
                    for i in 0..n {
                        match gaussian::symmetric_kl(mq, &self.train_moments[i])? {
                            Some(s) => k[i] = (-self.alpha * s).exp(),
                            None => {
                                k[i] = self.base_pair(&mq.mean, &self.train_moments[i].mean)? / k0;
                            }
                        }
                    }
                }
                _ => {
                    let l = self.rbf_lengthscale();
                    for i in 0..n {
                        k[i] = self.out_scale
                            * gaussian::expected_rbf(mq, &self.train_moments[i], l)?;
                    }
                }
            },
            QueryState::UgpBatch(b) => {
                for i in 0..n {
                    k[i] = self.out_scale
                        * empirical_cross_term(&self.base, b, &self.train_batches[i])?;
                }
            }
        }
        Ok(k)
    }

    /// Median pairwise distance over the structures the active kernel
    /// compares, used to initialize lengthscales.
    pub(crate) fn median_heuristic(&self, subsample: usize) -> f64 {
        if self.kind.uses_batches() {
            let batches = self.truncated_batches(subsample);
            let mats: Vec<&DMatrix<f64>> = batches.iter().map(|b| &b.points).collect();
            crate::kernel::median_pairwise_distance(&mats, 2000)
        } else {
            let x = self.center_matrix();
            crate::kernel::median_pairwise_distance(&[&x], 2000)
        }
    }
}
