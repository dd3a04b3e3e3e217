//! Surrogate modeling and benchmark infrastructure for Bayesian
//! optimization under input uncertainty.
//!
//! A design point submitted to a real process rarely comes back evaluated
//! where it was requested: actuation noise, drift or deliberate jitter
//! turn each query `x` into a draw from an input distribution `P_x`. This
//! crate models the objective directly as a function of that distribution.
//! A Gaussian process is placed over distributions through the kernel
//! `exp(-alpha * MMD^2(P, Q))`, with the squared maximum mean discrepancy
//! estimated from sample batches either exactly (U-statistic) or through a
//! Nystrom landmark projection that makes batched inference cheap.
//!
//! Module map:
//! - [`udist`]: input distribution descriptors and reproducible sampling;
//! - [`kernel`]: base point kernels (rational-quadratic mixture, RBF);
//! - [`mmd`]: squared-MMD estimators and Gram assembly;
//! - [`surrogate`]: distribution GPs, baseline models and fitting;
//! - [`acquisition`]: UCB maximization and outcome selection;
//! - [`problems`]: benchmark problems, oracles, regret and diagnostics.

pub mod acquisition;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod mmd;
pub mod problems;
pub mod rng;
pub mod surrogate;
pub mod udist;

pub use error::{Error, Result};
pub use kernel::BaseKernelParams;
pub use mmd::EstimatorConfig;
pub use udist::{Family, InputDistribution, LocatedDistribution, SampleBatch};
