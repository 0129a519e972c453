//! Sweeps of the k-variance over a grid of `k`, and log-log slope fits.

use std::time::Instant;

use log::warn;

use crate::error::{KvarError, Result};
use crate::kvariance::{estimate_kvar, EstimatorOptions};
use crate::measures::{MeasureSpec, Sampler};
use crate::rng::derive_seed;

/// Default lower cutoff on `k` for slope fits.
pub const DEFAULT_K_MIN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: MeasureSpec,
    /// Strictly ascending.
    pub k_grid: Vec<usize>,
    pub n_per_k: usize,
    pub master_seed: u64,
    pub label: String,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.k_grid)?;
        if self.n_per_k == 0 {
            return Err(KvarError::param("n", "must be at least 1"));
        }
        self.spec.validate()
    }
}

fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(KvarError::param("k_grid", "must not be empty"));
    }
    if grid[0] == 0 {
        return Err(KvarError::param("k_grid", "values must be at least 1"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KvarError::param("k_grid", "must be strictly ascending"));
    }
    Ok(())
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub elapsed_seconds: f64,
}

/// A labelled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub label: String,
    pub records: Vec<SweepRecord>,
}

/// Ordinary least squares of `ln(estimate)` on `ln(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub points: usize,
}

/// Seed of grid point `k` under `master`.
pub fn point_seed(master: u64, k: usize) -> u64 {
    derive_seed(master, k as u64)
}

/// One estimate per grid point, each seeded by [`point_seed`].
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let opts = EstimatorOptions::default();
    config
        .k_grid
        .iter()
        .map(|&k| {
            let start = Instant::now();
            let est = estimate_kvar(&config.spec, k, config.n_per_k, point_seed(config.master_seed, k), &opts)?;
            Ok(SweepRecord {
                k,
                estimate: est.estimate,
                stderr: est.stderr,
                n: config.n_per_k,
                elapsed_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

fn sweep(spec: MeasureSpec, label: String, k_grid: &[usize], n: usize, seed: u64) -> Result<Sweep> {
    let config = SweepConfig {
        spec,
        k_grid: k_grid.to_vec(),
        n_per_k: n,
        master_seed: seed,
        label,
    };
    Ok(Sweep {
        records: run_sweep(&config)?,
        label: config.label,
    })
}

/// Fits the records with `k ≥ k_min`. Nonpositive estimates are dropped with
/// a warning.
pub fn fit_loglog_slope(records: &[SweepRecord], k_min: usize) -> Result<SlopeFit> {
    let mut pts = Vec::new();
    for r in records.iter().filter(|r| r.k >= k_min) {
        if r.estimate > 0.0 && r.estimate.is_finite() {
            pts.push(((r.k as f64).ln(), r.estimate.ln(), r.k));
        } else {
            warn!("dropping k = {} from slope fit: estimate {} is not positive", r.k, r.estimate);
        }
    }
    if pts.len() < 3 {
        return Err(KvarError::InsufficientData { needed: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(KvarError::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        k_min: pts.iter().map(|p| p.2).min().unwrap_or(0),
        k_max: pts.iter().map(|p| p.2).max().unwrap_or(0),
        points: pts.len(),
    })
}

/// Predicted log-log slope `2/d − 2/d′` for a law of intrinsic dimension `d′`
/// in `ℝᵈ`.
pub fn intrinsic_exponent(intrinsic: usize, ambient: usize) -> f64 {
    2.0 / ambient as f64 - 2.0 / intrinsic as f64
}

/// One curve per mixture parameter `x` of the unit-variance two-component
/// Gaussian mixture in `ℝᵈ`.
pub fn gmm_sweep(xs: &[f64], d: usize, k_grid: &[usize], n: usize, seed: u64) -> Result<Vec<Sweep>> {
    xs.iter()
        .map(|&x| {
            sweep(
                MeasureSpec::GaussianMixture { x, dim: d },
                format!("gmm_x{x}"),
                k_grid,
                n,
                derive_seed(seed, x.to_bits()),
            )
        })
        .collect()
}

/// One curve per intrinsic dimension of a low-rank Gaussian in `ℝᵈ`.
pub fn lowdim_sweep(d_primes: &[usize], d: usize, k_grid: &[usize], n: usize, seed: u64) -> Result<Vec<Sweep>> {
    d_primes
        .iter()
        .map(|&dp| {
            sweep(
                MeasureSpec::LowRankGaussian { intrinsic: dp, ambient: d },
                format!("lowdim_d{dp}"),
                k_grid,
                n,
                derive_seed(seed, dp as u64),
            )
        })
        .collect()
}

/// One curve per sphere `S^{d′−1}` embedded in `ℝᵈ`.
pub fn sphere_curves(d_primes: &[usize], d: usize, k_grid: &[usize], n: usize, seed: u64) -> Result<Vec<Sweep>> {
    d_primes
        .iter()
        .map(|&dp| {
            sweep(
                MeasureSpec::SphereUniform { intrinsic: dp, ambient: d },
                format!("sphere_d{dp}"),
                k_grid,
                n,
                derive_seed(seed, dp as u64),
            )
        })
        .collect()
}

/// [`sphere_curves`] with a slope fit per curve.
pub fn sphere_sweep(
    d_primes: &[usize],
    d: usize,
    k_grid: &[usize],
    n: usize,
    seed: u64,
    k_min: usize,
) -> Result<(Vec<Sweep>, Vec<SlopeFit>)> {
    let sweeps = sphere_curves(d_primes, d, k_grid, n, seed)?;
    let fits = sweeps
        .iter()
        .map(|s| fit_loglog_slope(&s.records, k_min))
        .collect::<Result<_>>()?;
    Ok((sweeps, fits))
}

/// Bootstrap curve of a dataset (or any other law).
pub fn spec_sweep(spec: MeasureSpec, label: &str, k_grid: &[usize], n: usize, seed: u64) -> Result<Sweep> {
    sweep(spec, label.to_string(), k_grid, n, seed)
}
