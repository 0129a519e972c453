//! The k-variance estimator.

use rayon::prelude::*;

use crate::error::{KvarError, Result};
use crate::measures::Sampler;
use crate::rng::{stream, trial_stream};
use crate::transport::w2sq;

/// Ambient scaling rate `ρ(k, d)`: `k` in one dimension, `k / ln k` in two,
/// `k^{2/d}` above. `ρ(1, d) = 1` for every `d`, so that the 1-variance is the
/// variance (`k / ln k` is undefined at `k = 1`).
pub fn rho(k: usize, d: usize) -> f64 {
    assert!(k >= 1 && d >= 1, "rho needs k >= 1 and d >= 1");
    let kf = k as f64;
    match (k, d) {
        (1, _) => 1.0,
        (_, 1) => kf,
        (_, 2) => kf / kf.ln(),
        _ => kf.powf(2.0 / d as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRate {
    pub k: usize,
    pub d: usize,
    pub value: f64,
}

impl ScalingRate {
    pub fn new(k: usize, d: usize) -> Self {
        ScalingRate { k, d, value: rho(k, d) }
    }
}

/// Result of [`estimate_kvar`].
#[derive(Debug, Clone, PartialEq)]
pub struct KVarEstimate {
    pub k: usize,
    pub d: usize,
    pub n_trials: usize,
    /// `ρ(k,d)/(2n) Σⱼ W₂²(trial j)`.
    pub estimate: f64,
    /// Raw `W₂²` value of each trial, in trial order.
    pub trial_costs: Vec<f64>,
    /// Sample standard deviation of the scaled trials over `√n`.
    pub stderr: f64,
    pub mcdiarmid: Option<ConcentrationBound>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorOptions {
    /// Worker threads; `None` runs on the ambient rayon pool. Has no effect
    /// on the result.
    pub threads: Option<usize>,
    /// Support radius `R` for the concentration radius, if known.
    pub radius: Option<f64>,
}

/// Monte-Carlo k-variance from `n` independent trials.
///
/// Trial `j` draws its two `k`-samples from streams `(seed, 2j)` and
/// `(seed, 2j + 1)` and solves the assignment problem between them. Trials
/// may run concurrently; aggregation is always in trial order, so the result
/// is bit-identical for any thread count.
pub fn estimate_kvar<S: Sampler + ?Sized>(
    spec: &S,
    k: usize,
    n: usize,
    seed: u64,
    options: &EstimatorOptions,
) -> Result<KVarEstimate> {
    if k == 0 {
        return Err(KvarError::param("k", "must be at least 1"));
    }
    if n == 0 {
        return Err(KvarError::param("n", "must be at least 1"));
    }
    spec.validate()?;

    let run = || -> Result<Vec<f64>> {
        (0..n as u64)
            .into_par_iter()
            .map(|j| {
                let xs = spec.sample(k, &mut stream(seed, trial_stream(j, 0)))?;
                let ys = spec.sample(k, &mut stream(seed, trial_stream(j, 1)))?;
                Ok(w2sq(&xs, &ys)?.cost)
            })
            .collect()
    };
    let trial_costs = match options.threads {
        None => run()?,
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| KvarError::param("threads", e.to_string()))?
            .install(run)?,
    };

    let d = spec.dim();
    let scale = rho(k, d) / 2.0;
    let estimate = scale * trial_costs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let ss: f64 = trial_costs
            .iter()
            .map(|c| {
                let dev = scale * c - estimate;
                dev * dev
            })
            .sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    let mcdiarmid = options
        .radius
        .map(|r| mcdiarmid_radius(k, n, d, r))
        .transpose()?;

    Ok(KVarEstimate {
        k,
        d,
        n_trials: n,
        estimate,
        trial_costs,
        stderr,
        mcdiarmid,
        master_seed: seed,
    })
}

/// Deviation radius of the `n`-trial estimator for a measure supported in a
/// set of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBound {
    /// `ρ(k,d) R² √(ln(kn) / (kn))`.
    pub radius: f64,
    /// Probability that the estimator deviates by at least `radius`:
    /// `2 / (kn)²`.
    pub failure_probability: f64,
    /// `kn = 1`: the radius is zero and the bound says nothing.
    pub degenerate: bool,
}

pub fn mcdiarmid_radius(k: usize, n: usize, d: usize, radius: f64) -> Result<ConcentrationBound> {
    if k == 0 || n == 0 || d == 0 {
        return Err(KvarError::param("k, n, d", "must all be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(KvarError::param("radius", format!("must be positive, got {radius}")));
    }
    let kn = (k as f64) * (n as f64);
    let degenerate = k * n == 1;
    let r = if degenerate {
        0.0
    } else {
        rho(k, d) * radius * radius * (kn.ln() / kn).sqrt()
    };
    Ok(ConcentrationBound {
        radius: r,
        failure_probability: (2.0 / (kn * kn)).min(1.0),
        degenerate,
    })
}
