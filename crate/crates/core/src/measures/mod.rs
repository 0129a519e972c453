//! Probability measures: samplers for every family, closed-form quantile
//! evaluators for the one-dimensional ones, and bootstrap resampling of
//! user datasets.

mod dataset;
pub(crate) mod quantile;

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};

use crate::error::{KvarError, Result};
use crate::rng::StreamRng;
use crate::transport::EmpiricalMeasure;

pub use dataset::{bootstrap_sample, load_dataset, DatasetHandle};
pub use quantile::{quantile1d, Quantile1D};

/// Anything that can produce i.i.d. `k`-samples in a fixed dimension.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;

    /// Rejects invalid parameters before any sampling happens.
    fn validate(&self) -> Result<()>;

    fn sample(&self, k: usize, rng: &mut StreamRng) -> Result<EmpiricalMeasure>;
}

/// A named distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    Uniform01,
    /// Uniform on `[0,1]^dim`.
    UniformCube { dim: usize },
    Exponential { rate: f64 },
    /// Unit-scale Weibull with the given shape `α`.
    Weibull { shape: f64 },
    TukeyLambda { lambda: f64 },
    Logistic,
    /// Axis-aligned Gaussian with a diagonal covariance.
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
    /// `½ N(−x e₁, σ²I) + ½ N(x e₁, σ²I)` with `σ² = (1 − x²)/dim`, so the
    /// total variance is exactly 1.
    GaussianMixture { x: f64, dim: usize },
    /// Gaussian with covariance `diag(1/d′, …, 1/d′, 0, …, 0)` in `ℝ^ambient`.
    LowRankGaussian { intrinsic: usize, ambient: usize },
    /// Uniform on the unit sphere `S^{d′−1}` of the first `d′` coordinates.
    SphereUniform { intrinsic: usize, ambient: usize },
    /// `½ δ(−½ e₁) + ½ δ(½ e₁)`.
    TwoPoint { dim: usize },
    Dataset(Arc<DatasetHandle>),
}

impl MeasureSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Uniform01 => "uniform01",
            MeasureSpec::UniformCube { .. } => "uniform-cube",
            MeasureSpec::Exponential { .. } => "exponential",
            MeasureSpec::Weibull { .. } => "weibull",
            MeasureSpec::TukeyLambda { .. } => "tukey-lambda",
            MeasureSpec::Logistic => "logistic",
            MeasureSpec::Gaussian { .. } => "gaussian",
            MeasureSpec::GaussianMixture { .. } => "gmm",
            MeasureSpec::LowRankGaussian { .. } => "low-rank-gaussian",
            MeasureSpec::SphereUniform { .. } => "sphere",
            MeasureSpec::TwoPoint { .. } => "two-point",
            MeasureSpec::Dataset(_) => "dataset",
        }
    }

    /// Per-coordinate standard deviation of a [`MeasureSpec::GaussianMixture`]
    /// component.
    pub fn mixture_sigma(x: f64, dim: usize) -> f64 {
        ((1.0 - x * x) / dim as f64).sqrt()
    }
}

fn positive_dim(name: &'static str, d: usize) -> Result<()> {
    if d == 0 {
        Err(KvarError::param(name, "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn intrinsic_dims(intrinsic: usize, ambient: usize) -> Result<()> {
    positive_dim("intrinsic", intrinsic)?;
    positive_dim("ambient", ambient)?;
    if intrinsic > ambient {
        return Err(KvarError::param(
            "intrinsic",
            format!("intrinsic dimension {intrinsic} exceeds ambient dimension {ambient}"),
        ));
    }
    Ok(())
}

impl Sampler for MeasureSpec {
    fn dim(&self) -> usize {
        match self {
            MeasureSpec::Uniform01
            | MeasureSpec::Exponential { .. }
            | MeasureSpec::Weibull { .. }
            | MeasureSpec::TukeyLambda { .. }
            | MeasureSpec::Logistic => 1,
            MeasureSpec::UniformCube { dim }
            | MeasureSpec::GaussianMixture { dim, .. }
            | MeasureSpec::TwoPoint { dim } => *dim,
            MeasureSpec::Gaussian { mean, .. } => mean.len(),
            MeasureSpec::LowRankGaussian { ambient, .. } | MeasureSpec::SphereUniform { ambient, .. } => *ambient,
            MeasureSpec::Dataset(h) => h.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            MeasureSpec::Uniform01 | MeasureSpec::Logistic => Ok(()),
            MeasureSpec::UniformCube { dim } | MeasureSpec::TwoPoint { dim } => positive_dim("dim", dim),
            MeasureSpec::Exponential { rate } => {
                if rate > 0.0 && rate.is_finite() {
                    Ok(())
                } else {
                    Err(KvarError::param("rate", format!("must be positive and finite, got {rate}")))
                }
            }
            MeasureSpec::Weibull { shape } => {
                if shape > 0.0 && shape.is_finite() {
                    Ok(())
                } else {
                    Err(KvarError::param("shape", format!("must be positive and finite, got {shape}")))
                }
            }
            MeasureSpec::TukeyLambda { lambda } => {
                if lambda.is_finite() {
                    Ok(())
                } else {
                    Err(KvarError::param("lambda", "must be finite"))
                }
            }
            MeasureSpec::Gaussian {
                ref mean,
                ref variance,
            } => {
                positive_dim("mean", mean.len())?;
                if mean.len() != variance.len() {
                    return Err(KvarError::param(
                        "variance",
                        format!("{} variances for a mean of length {}", variance.len(), mean.len()),
                    ));
                }
                if mean.iter().any(|m| !m.is_finite()) {
                    return Err(KvarError::param("mean", "must be finite"));
                }
                if variance.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(KvarError::param("variance", "entries must be finite and nonnegative"));
                }
                Ok(())
            }
            MeasureSpec::GaussianMixture { x, dim } => {
                positive_dim("dim", dim)?;
                if x.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(KvarError::param("x", format!("need |x| < 1, got {x}")))
                }
            }
            MeasureSpec::LowRankGaussian { intrinsic, ambient }
            | MeasureSpec::SphereUniform { intrinsic, ambient } => intrinsic_dims(intrinsic, ambient),
            MeasureSpec::Dataset(ref h) => {
                if h.is_empty() {
                    Err(KvarError::EmptyDataset)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn sample(&self, k: usize, rng: &mut StreamRng) -> Result<EmpiricalMeasure> {
        if k == 0 {
            return Err(KvarError::param("k", "sample size must be at least 1"));
        }
        self.validate()?;
        let d = self.dim();
        let coords: Vec<f64> = match *self {
            MeasureSpec::Uniform01 => (0..k).map(|_| rng.random::<f64>()).collect(),
            MeasureSpec::UniformCube { dim } => (0..k * dim).map(|_| rng.random::<f64>()).collect(),
            MeasureSpec::Exponential { rate } => (0..k)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    e / rate
                })
                .collect(),
            MeasureSpec::Weibull { .. } | MeasureSpec::TukeyLambda { .. } | MeasureSpec::Logistic => {
                let q = quantile1d(self)?;
                (0..k)
                    .map(|_| {
                        let u: f64 = Open01.sample(rng);
                        q.quantile(u)
                    })
                    .collect()
            }
            MeasureSpec::Gaussian {
                ref mean,
                ref variance,
            } => {
                let sd: Vec<f64> = variance.iter().map(|v| v.sqrt()).collect();
                let mut out = Vec::with_capacity(k * d);
                for _ in 0..k {
                    for (m, s) in mean.iter().zip(&sd) {
                        let z: f64 = StandardNormal.sample(rng);
                        out.push(m + s * z);
                    }
                }
                out
            }
            MeasureSpec::GaussianMixture { x, dim } => {
                let sigma = MeasureSpec::mixture_sigma(x, dim);
                let mut out = Vec::with_capacity(k * dim);
                for _ in 0..k {
                    let center = if rng.random::<bool>() { x } else { -x };
                    for c in 0..dim {
                        let z: f64 = StandardNormal.sample(rng);
                        out.push(if c == 0 { center + sigma * z } else { sigma * z });
                    }
                }
                out
            }
            MeasureSpec::LowRankGaussian { intrinsic, ambient } => {
                let sd = (intrinsic as f64).recip().sqrt();
                let mut out = vec![0.0; k * ambient];
                for p in out.chunks_exact_mut(ambient) {
                    for c in p.iter_mut().take(intrinsic) {
                        let z: f64 = StandardNormal.sample(rng);
                        *c = sd * z;
                    }
                }
                out
            }
            MeasureSpec::SphereUniform { intrinsic, ambient } => {
                let mut out = vec![0.0; k * ambient];
                for p in out.chunks_exact_mut(ambient) {
                    let head = &mut p[..intrinsic];
                    loop {
                        for c in head.iter_mut() {
                            *c = StandardNormal.sample(rng);
                        }
                        let norm = head.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 0.0 {
                            head.iter_mut().for_each(|c| *c /= norm);
                            break;
                        }
                    }
                }
                out
            }
            MeasureSpec::TwoPoint { dim } => {
                let mut out = vec![0.0; k * dim];
                for p in out.chunks_exact_mut(dim) {
                    p[0] = if rng.random::<bool>() { 0.5 } else { -0.5 };
                }
                out
            }
            MeasureSpec::Dataset(ref h) => return bootstrap_sample(h, k, rng),
        };
        EmpiricalMeasure::new(coords, d)
    }
}

/// Draws `k` i.i.d. points from `spec`.
pub fn sample(spec: &MeasureSpec, k: usize, rng: &mut StreamRng) -> Result<EmpiricalMeasure> {
    spec.sample(k, rng)
}

/// Law of `X + X̃` for independent `X ~ first`, `X̃ ~ second`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSum<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: Sampler, B: Sampler> Sampler for IndependentSum<A, B> {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn validate(&self) -> Result<()> {
        self.first.validate()?;
        self.second.validate()?;
        if self.first.dim() != self.second.dim() {
            return Err(KvarError::Shape(format!(
                "summands of dimension {} and {}",
                self.first.dim(),
                self.second.dim()
            )));
        }
        Ok(())
    }

    fn sample(&self, k: usize, rng: &mut StreamRng) -> Result<EmpiricalMeasure> {
        self.validate()?;
        let a = self.first.sample(k, rng)?;
        let b = self.second.sample(k, rng)?;
        let coords = a.coords().iter().zip(b.coords()).map(|(x, y)| x + y).collect();
        EmpiricalMeasure::new(coords, a.dim())
    }
}
