//! Shared fixtures for the criterion benches: seeded sample batches and
//! surrogate models in the configurations the estimator trade-off study
//! compares.

use nalgebra::DVector;

use mmdbo_core::rng::derive_seed;
use mmdbo_core::surrogate::{SurrogateKind, SurrogateModel};
use mmdbo_core::udist::{sample, SampleBatch};
use mmdbo_core::{BaseKernelParams, EstimatorConfig, Family, InputDistribution};

/// The input law the benchmark suite samples under.
pub fn bench_law() -> InputDistribution {
    InputDistribution::new(
        Family::BetaShift {
            alpha: 0.4,
            beta: 0.2,
            scale: 0.1,
        },
        1,
    )
    .unwrap()
}

/// A pair of batches of size `m` at offset centers.
pub fn batch_pair(m: usize, seed: u64) -> (SampleBatch, SampleBatch) {
    let law = bench_law();
    let u = sample(
        &law,
        &DVector::from_element(1, 0.2),
        m,
        derive_seed(seed, &[0]),
    )
    .unwrap();
    let v = sample(
        &law,
        &DVector::from_element(1, 0.5),
        m,
        derive_seed(seed, &[1]),
    )
    .unwrap();
    (u, v)
}

/// A fitted-shape model with `n_train` observations, ready for posterior
/// timing.
pub fn trained_model(estimator: EstimatorConfig, n_train: usize, seed: u64) -> SurrogateModel {
    let mut model = SurrogateModel::new(
        SurrogateKind::MmdGp,
        BaseKernelParams::rq_mixture(0.2),
        estimator,
        bench_law(),
        1.0,
        seed,
    )
    .unwrap();
    let centers: Vec<DVector<f64>> = (0..n_train)
        .map(|i| DVector::from_element(1, (i as f64 + 0.5) / n_train as f64))
        .collect();
    let ys: Vec<f64> = centers.iter().map(|c| (6.0 * c[0]).sin()).collect();
    model.set_data(&centers, &ys).unwrap();
    model.refresh().unwrap();
    model
}

/// Query centers on a uniform grid.
pub fn query_grid(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| DVector::from_element(1, (i as f64 + 0.5) / n as f64))
        .collect()
}
