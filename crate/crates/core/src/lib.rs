//! k-variance of probability measures.
//!
//! The k-variance of `μ` on `ℝᵈ` is `½ ρ(k,d) E[W₂²(μ_k, μ′_k)]`, the scaled
//! expected squared 2-Wasserstein distance between two independent
//! `k`-point empirical samples of `μ`. At `k = 1` it is the ordinary
//! variance; as `k` grows it measures spread within local groups rather
//! than between them.
//!
//! - [`measures`]: samplers, 1-D quantile evaluators, CSV datasets.
//! - [`transport`]: exact W₂² between equal-size empirical measures.
//! - [`kvariance`]: scaling rate, Monte-Carlo estimator, concentration radius.
//! - [`analytic`]: closed forms, order-statistic bounds and limits.
//! - [`experiments`]: sweeps over `k` and log-log slope fits.
//! - [`cli`]: the `kvar` command-line tool.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod kvariance;
pub mod rng;
pub mod transport;

pub use error::{KvarError, Result};
