//! Wall-clock benchmark of posterior inference across estimator
//! configurations.
//!
//! Each row fixes an estimator (empirical at sampling size `m`, or the
//! landmark projection at `(m, h)`), fits nothing: hyperparameters are
//! pinned, the train-side caches are built once outside the clock, and
//! the measured quantity is exactly the posterior evaluation at a fixed
//! set of query distributions, batch-drawn samples included. One warm-up
//! pass is discarded and five passes are averaged by default, timed with
//! the monotonic clock.
//!
//! Queries are processed in chunks of the largest batch size whose
//! estimated working set fits a configurable memory budget (2 GiB by
//! default), and that batch size is reported alongside the timings. A
//! configuration whose single-query working set already exceeds the
//! budget is reported with `batch = 0` and no timings instead of
//! failing the whole table.

use std::fmt::Write as _;
use std::time::Instant;

use mmdbo_core::acquisition::{low_discrepancy_design, BoxDomain};
use mmdbo_core::kernel::BaseKernelParams;
use mmdbo_core::rng::derive_seed;
use mmdbo_core::surrogate::{SurrogateKind, SurrogateModel};
use mmdbo_core::udist::Family;
use mmdbo_core::{EstimatorConfig, Error, InputDistribution, Result};

const CENTER_TAG: u64 = 1;
const MODEL_TAG: u64 = 2;
const QUERY_TAG: u64 = 3;
const PASS_TAG: u64 = 4;

/// Default memory budget for batch sizing: 2 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 * 1024 * 1024 * 1024;

/// One estimator configuration to be timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchEntry {
    pub m: usize,
    /// `None` selects the empirical estimator, `Some(h)` the landmark
    /// projection with `h` landmarks.
    pub h: Option<usize>,
}

impl BenchEntry {
    pub fn method(&self) -> &'static str {
        if self.h.is_some() {
            "nystrom"
        } else {
            "empirical"
        }
    }
}

/// The five reference rows: empirical at 20, 100 and 1000 samples, and
/// the landmark projection at (100, 10) and (1000, 100).
pub fn reference_entries() -> Vec<BenchEntry> {
    vec![
        BenchEntry { m: 20, h: None },
        BenchEntry { m: 100, h: None },
        BenchEntry { m: 1000, h: None },
        BenchEntry {
            m: 100,
            h: Some(10),
        },
        BenchEntry {
            m: 1000,
            h: Some(100),
        },
    ]
}

/// Shared settings for a benchmark run.
#[derive(Debug, Clone)]
pub struct BenchSettings {
    /// Training-set size; train caches are built once, off the clock.
    pub n_train: usize,
    /// Query distributions per timed pass.
    pub n_test: usize,
    /// Measured passes (after warm-up) entering mean and sd.
    pub reps: usize,
    /// Discarded leading passes.
    pub warmup: usize,
    /// Byte budget bounding the batch working-set estimate.
    pub memory_budget_bytes: u64,
    /// Candidate batch sizes; the largest one under budget (capped at
    /// `n_test`) is used. Empty falls back to powers of two.
    pub batch_candidates: Vec<usize>,
    pub seed: u64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            n_train: 8,
            n_test: 512,
            reps: 5,
            warmup: 1,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            batch_candidates: Vec::new(),
            seed: 7,
        }
    }
}

impl BenchSettings {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_train", self.n_train),
            ("n_test", self.n_test),
            ("reps", self.reps),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn candidates(&self) -> Vec<usize> {
        if !self.batch_candidates.is_empty() {
            return self.batch_candidates.clone();
        }
        let mut out = Vec::new();
        let mut b = 1usize;
        while b < self.n_test {
            out.push(b);
            b *= 2;
        }
        out.push(self.n_test);
        out
    }
}

/// One measured row of the timing table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub m: usize,
    /// Zero for the empirical estimator.
    pub h: usize,
    /// `NaN` when no batch size fit the budget.
    pub seconds_mean: f64,
    pub seconds_sd: f64,
    /// Chunk size used for the query loop; zero when over budget.
    pub batch: usize,
}

/// Estimated peak working set of one in-flight query, in bytes: the drawn
/// sample batch plus the dominant kernel intermediate (the full pairwise
/// block for the empirical estimator, the landmark block and projection
/// for the approximation) plus the cross-kernel vector.
pub fn query_bytes(entry: &BenchEntry, n_train: usize, dim: usize) -> u64 {
    let f = std::mem::size_of::<f64>() as u64;
    let m = entry.m as u64;
    let d = dim.max(1) as u64;
    let structural = match entry.h {
        None => m * m,
        Some(h) => {
            let h = h as u64;
            m * h + h * h
        }
    };
    f * (m * d + structural + n_train as u64)
}

/// Largest candidate batch whose working set fits the budget, capped at
/// `n_test`; zero when even one query exceeds it.
pub fn batch_under_budget(entry: &BenchEntry, settings: &BenchSettings, dim: usize) -> usize {
    let per_query = query_bytes(entry, settings.n_train, dim);
    settings
        .candidates()
        .into_iter()
        .filter(|&b| b <= settings.n_test && (b as u64).saturating_mul(per_query) <= settings.memory_budget_bytes)
        .max()
        .unwrap_or(0)
}

/// The input law every benchmark row uses: a one-sided shifted beta, a
/// law whose distance estimation is the motivating workload.
pub fn bench_law() -> Result<InputDistribution> {
    InputDistribution::new(
        Family::BetaShift {
            alpha: 0.4,
            beta: 0.2,
            scale: 0.1,
        },
        1,
    )
}

fn build_bench_model(entry: &BenchEntry, settings: &BenchSettings) -> Result<SurrogateModel> {
    let law = bench_law()?;
    let est = match entry.h {
        None => EstimatorConfig::empirical(entry.m),
        Some(h) => EstimatorConfig::nystrom(entry.m, h),
    };
    let mut model = SurrogateModel::new(
        SurrogateKind::MmdGp,
        BaseKernelParams::rq_mixture(0.2),
        est,
        law,
        1.0,
        derive_seed(settings.seed, &[MODEL_TAG]),
    )?;
    model.set_hyperparameters(None, Some(1.0), None, Some(1e-2))?;
    let domain = BoxDomain::unit(1)?;
    let centers = low_discrepancy_design(
        &domain,
        settings.n_train,
        derive_seed(settings.seed, &[CENTER_TAG]),
    )?;
    let ys: Vec<f64> = (0..settings.n_train)
        .map(|i| (i as f64 / settings.n_train as f64) - 0.5)
        .collect();
    model.set_data(&centers, &ys)?;
    model.refresh()?;
    Ok(model)
}

/// Times one estimator configuration. The clock covers only the chunked
/// posterior evaluation over the query set; model setup, training caches
/// and the warm-up pass stay outside it.
pub fn bench_one(entry: &BenchEntry, settings: &BenchSettings) -> Result<BenchRow> {
    settings.validate()?;
    if entry.m < 2 {
        return Err(Error::Config(format!(
            "sampling size must be at least 2, got {}",
            entry.m
        )));
    }
    let dim = 1usize;
    let batch = batch_under_budget(entry, settings, dim);
    if batch == 0 {
        return Ok(BenchRow {
            method: entry.method().into(),
            m: entry.m,
            h: entry.h.unwrap_or(0),
            seconds_mean: f64::NAN,
            seconds_sd: f64::NAN,
            batch: 0,
        });
    }

    let model = build_bench_model(entry, settings)?;
    let domain = BoxDomain::unit(dim)?;
    let queries = low_discrepancy_design(
        &domain,
        settings.n_test,
        derive_seed(settings.seed, &[QUERY_TAG]),
    )?;

    let mut seconds = Vec::with_capacity(settings.reps);
    for pass in 0..settings.warmup + settings.reps {
        let pass_seed = derive_seed(settings.seed, &[PASS_TAG, pass as u64]);
        let started = Instant::now();
        for (ci, chunk) in queries.chunks(batch).enumerate() {
            let chunk_seed = derive_seed(pass_seed, &[ci as u64]);
            let posts = model.posterior_seeded(chunk, chunk_seed)?;
            std::hint::black_box(&posts);
        }
        let elapsed = started.elapsed().as_secs_f64();
        if pass >= settings.warmup {
            seconds.push(elapsed);
        }
    }
    let mean = seconds.iter().sum::<f64>() / seconds.len() as f64;
    let sd = if seconds.len() < 2 {
        0.0
    } else {
        (seconds.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (seconds.len() - 1) as f64)
            .sqrt()
    };
    Ok(BenchRow {
        method: entry.method().into(),
        m: entry.m,
        h: entry.h.unwrap_or(0),
        seconds_mean: mean,
        seconds_sd: sd,
        batch,
    })
}

/// Times every requested configuration. At least one empirical and one
/// landmark row must be present, since the table exists to compare the
/// two.
pub fn bench_inference(entries: &[BenchEntry], settings: &BenchSettings) -> Result<Vec<BenchRow>> {
    if !entries.iter().any(|e| e.h.is_none()) || !entries.iter().any(|e| e.h.is_some()) {
        return Err(Error::Config(
            "benchmark requires both an empirical and a landmark (nystrom) entry".into(),
        ));
    }
    entries.iter().map(|e| bench_one(e, settings)).collect()
}

/// Renders rows as `method,m,h,seconds_mean,seconds_sd,batch`.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut text = String::from("method,m,h,seconds_mean,seconds_sd,batch\n");
    for r in rows {
        writeln!(
            text,
            "{},{},{},{},{},{}",
            r.method, r.m, r.h, r.seconds_mean, r.seconds_sd, r.batch
        )
        .expect("string write");
    }
    text
}

/// Helper for tests and the speedup gate: mean seconds of a row.
pub fn row_seconds(rows: &[BenchRow], method: &str, m: usize, h: usize) -> Option<f64> {
    rows.iter()
        .find(|r| r.method == method && r.m == m && r.h == h)
        .map(|r| r.seconds_mean)
}
