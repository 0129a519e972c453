//! Moments of order statistics and the one-dimensional bounds built on them.
//!
//! In one dimension `Var_k = Σᵢ Var(X₍ᵢ₎)`.

use rayon::prelude::*;

use crate::error::{KvarError, Result};
use crate::measures::Sampler;
use crate::rng::stream;

/// Means and variances of the `k` order statistics of a parent law.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatSummary {
    pub k: usize,
    /// `E X₍ᵢ₎`, ascending in `i`.
    pub means: Vec<f64>,
    /// `Var X₍ᵢ₎`.
    pub variances: Vec<f64>,
    pub parent_mean: f64,
    pub parent_variance: f64,
}

impl OrderStatSummary {
    /// `Σᵢ Var X₍ᵢ₎`, the k-variance in one dimension.
    pub fn total_variance(&self) -> f64 {
        self.variances.iter().sum()
    }
}

/// Upper and lower bounds on the one-dimensional k-variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds1D {
    /// `kσ² − Σᵢ (E X₍ᵢ₎ − E X)²`; equal to `Var_k` for exact inputs.
    pub upper: f64,
    /// `kσ²`.
    pub upper_loose: f64,
    /// `kσ² − 2 Σ_{i<j} σ₍ᵢ₎ σ₍ⱼ₎ c_ij` with `c_ij` from
    /// [`order_stat_correlation_bound`].
    pub lower: f64,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(KvarError::param("k", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Exact moments for `Unif[0,1]`: `X₍ᵢ₎ ~ Beta(i, k+1−i)`.
pub fn order_stats_uniform(k: usize) -> Result<OrderStatSummary> {
    check_k(k)?;
    let kf = k as f64;
    let (means, variances) = (1..=k)
        .map(|i| {
            let p = i as f64 / (kf + 1.0);
            (p, p * (1.0 - p) / (kf + 2.0))
        })
        .unzip();
    Ok(OrderStatSummary {
        k,
        means,
        variances,
        parent_mean: 0.5,
        parent_variance: 1.0 / 12.0,
    })
}

/// Exact moments for `Exp(rate)` from the Rényi representation
/// `X₍ᵢ₎ = Σ_{j≤i} E_j / (rate (k−j+1))`.
pub fn order_stats_exponential(k: usize, rate: f64) -> Result<OrderStatSummary> {
    check_k(k)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(KvarError::param("rate", format!("must be positive and finite, got {rate}")));
    }
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    let (mut m, mut v) = (0.0, 0.0);
    for j in 1..=k {
        let w = 1.0 / (rate * (k - j + 1) as f64);
        m += w;
        v += w * w;
        means.push(m);
        variances.push(v);
    }
    Ok(OrderStatSummary {
        k,
        means,
        variances,
        parent_mean: rate.recip(),
        parent_variance: (rate * rate).recip(),
    })
}

/// Covariance of uniform order statistics `i ≤ j`:
/// `i(k+1−j) / ((k+1)²(k+2))`.
pub fn uniform_order_stat_covariance(i: usize, j: usize, k: usize) -> f64 {
    let (i, j) = (i.min(j) as f64, i.max(j) as f64);
    let kf = k as f64;
    i * (kf + 1.0 - j) / ((kf + 1.0) * (kf + 1.0) * (kf + 2.0))
}

/// Upper bound on `Corr(X₍ᵢ₎, X₍ⱼ₎)` for `i < j`:
/// `√(i(k+1−j) / (j(k+1−i)))`, attained by uniform parents.
pub fn order_stat_correlation_bound(i: usize, j: usize, k: usize) -> f64 {
    let (i, j) = (i.min(j) as f64, i.max(j) as f64);
    let kf = k as f64;
    (i * (kf + 1.0 - j) / (j * (kf + 1.0 - i))).sqrt()
}

pub fn bounds_1d(summary: &OrderStatSummary) -> Bounds1D {
    let k = summary.k;
    let upper_loose = k as f64 * summary.parent_variance;
    let spread: f64 = summary
        .means
        .iter()
        .map(|m| (m - summary.parent_mean).powi(2))
        .sum();
    let sd: Vec<f64> = summary.variances.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut cross = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            cross += sd[i] * sd[j] * order_stat_correlation_bound(i + 1, j + 1, k);
        }
    }
    Bounds1D {
        upper: upper_loose - spread,
        upper_loose,
        lower: upper_loose - 2.0 * cross,
    }
}

const MC_CHUNK: usize = 4096;

#[derive(Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments { n: 0.0, mean: vec![0.0; k], m2: vec![0.0; k] }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1.0;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(xs) {
            let delta = x - *m;
            *m += delta / self.n;
            *s += delta * (x - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        let n = self.n + other.n;
        if other.n == 0.0 {
            return;
        }
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.n / n;
            self.m2[i] += other.m2[i] + delta * delta * self.n * other.n / n;
        }
        self.n = n;
    }

    fn variances(&self) -> Vec<f64> {
        let denom = (self.n - 1.0).max(1.0);
        self.m2.iter().map(|s| s / denom).collect()
    }
}

/// Monte-Carlo order-statistic moments from `reps` sorted `k`-samples of a
/// one-dimensional law.
///
/// Repetitions are drawn in chunks of 4096, chunk `c` from stream
/// `(seed, c)`, and merged in chunk order, so the result does not depend on
/// the thread count.
pub fn order_stats_mc<S: Sampler + ?Sized>(spec: &S, k: usize, reps: usize, seed: u64) -> Result<OrderStatSummary> {
    check_k(k)?;
    if reps < 2 {
        return Err(KvarError::param("reps", "need at least 2 repetitions"));
    }
    spec.validate()?;
    if spec.dim() != 1 {
        return Err(KvarError::UnsupportedFamily(format!(
            "order statistics need a one-dimensional law, got dimension {}",
            spec.dim()
        )));
    }

    let chunks = reps.div_ceil(MC_CHUNK);
    let parts: Vec<(Moments, Moments)> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(Moments, Moments)> {
            let mut rng = stream(seed, c as u64);
            let mut order = Moments::new(k);
            let mut parent = Moments::new(1);
            let len = MC_CHUNK.min(reps - c * MC_CHUNK);
            for _ in 0..len {
                let mut xs = spec.sample(k, &mut rng)?.coords().to_vec();
                for x in &xs {
                    parent.push(std::slice::from_ref(x));
                }
                xs.sort_by(f64::total_cmp);
                order.push(&xs);
            }
            Ok((order, parent))
        })
        .collect::<Result<_>>()?;

    let mut order = Moments::new(k);
    let mut parent = Moments::new(1);
    for (o, p) in &parts {
        order.merge(o);
        parent.merge(p);
    }
    Ok(OrderStatSummary {
        k,
        variances: order.variances(),
        means: order.mean,
        parent_mean: parent.mean[0],
        parent_variance: parent.m2[0] / (parent.n - 1.0),
    })
}
