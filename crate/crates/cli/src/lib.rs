//! Experiment harness for distribution-aware Bayesian optimization.
//!
//! The harness turns a single JSON configuration into reproducible
//! artifacts: regret traces from repeated optimization runs, posterior
//! cross-sections for model comparison, wall-clock tables for the
//! estimator trade-off, and per-iteration aggregates of finished studies.
//! Everything is seeded, every output is CSV or JSON with a fixed schema,
//! and a repeated invocation of the same configuration reproduces the
//! same bytes.
//!
//! Module map:
//! - [`config`]: the experiment configuration and algorithm registry;
//! - [`runner`]: the optimization loop and multi-repeat studies;
//! - [`bench`]: posterior-inference timing across estimator settings;
//! - [`diagnose`]: posterior dumps over a grid for 1D problems;
//! - [`summary`]: per-iteration aggregation of regret traces.

pub mod bench;
pub mod config;
pub mod diagnose;
pub mod runner;
pub mod summary;

pub use config::{Algorithm, ExperimentConfig};
pub use runner::{execute, prepare_problem, run_bo, RunReport};
