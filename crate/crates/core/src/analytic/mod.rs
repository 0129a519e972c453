//! Closed forms, bounds and limits of the k-variance.

mod order_stats;
mod quadrature;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{KvarError, Result};
use crate::kvariance::rho;
use crate::measures::Quantile1D;

pub use order_stats::{
    bounds_1d, order_stat_correlation_bound, order_stats_exponential, order_stats_mc, order_stats_uniform,
    uniform_order_stat_covariance, Bounds1D, OrderStatSummary,
};
pub use quadrature::{varinf_integral, Limit, MIN_BASE_NODES};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(KvarError::param("k", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `H_k = Σ_{i≤k} 1/i`; asymptotic expansion above 10⁶.
pub fn harmonic(k: u64) -> f64 {
    if k <= 1_000_000 {
        // Smallest terms first.
        (1..=k).rev().map(|i| 1.0 / i as f64).sum()
    } else {
        let kf = k as f64;
        kf.ln() + EULER_GAMMA + 0.5 / kf - 1.0 / (12.0 * kf * kf)
    }
}

/// `Var_k(Unif[0,1]) = k / (6(k+1))`.
pub fn kvar_uniform(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(KvarError::param("k", "must be at least 1"));
    }
    let kf = k as f64;
    Ok(kf / (6.0 * (kf + 1.0)))
}

/// `Var_k(Exp(rate)) = H_k / rate²`.
pub fn kvar_exponential(k: u64, rate: f64) -> Result<f64> {
    if k == 0 {
        return Err(KvarError::param("k", "must be at least 1"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(KvarError::param("rate", format!("must be positive and finite, got {rate}")));
    }
    Ok(harmonic(k) / (rate * rate))
}

/// `Var_∞` of the unit-scale Weibull law: `Γ(2/α) / (α(α−2))` for `α > 2`,
/// infinite otherwise.
pub fn varinf_weibull(shape: f64) -> Result<Limit> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(KvarError::param("shape", format!("must be positive and finite, got {shape}")));
    }
    if shape <= 2.0 {
        return Ok(Limit::Infinite);
    }
    Ok(Limit::Finite(gamma(2.0 / shape) / (shape * (shape - 2.0))))
}

/// Value of [`varinf_tukey`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TukeyLimit {
    pub value: f64,
    /// `false` when `value` only bounds the upper limit (`-1 < λ < 2`).
    pub guaranteed: bool,
}

/// `2 B(λ+1, 2) = 2 / ((λ+1)(λ+2))` for Tukey's lambda family.
pub fn varinf_tukey(lambda: f64) -> Result<TukeyLimit> {
    if !lambda.is_finite() {
        return Err(KvarError::param("lambda", "must be finite"));
    }
    if lambda <= -1.0 {
        return Err(KvarError::Divergent(format!(
            "Tukey lambda limit diverges for lambda <= -1, got {lambda}"
        )));
    }
    Ok(TukeyLimit {
        value: 2.0 / ((lambda + 1.0) * (lambda + 2.0)),
        guaranteed: lambda >= 2.0,
    })
}

/// `Var_k` of `½ δ(−½ e₁) + ½ δ(½ e₁)` in `ℝᵈ`: `ρ(k,d) C(2k,k) / 2^{2k+1}`.
pub fn kvar_two_point(k: usize, d: usize) -> Result<f64> {
    check_k(k)?;
    if d == 0 {
        return Err(KvarError::param("d", "dimension must be at least 1"));
    }
    // C(2k,k)/4^k
    let central = if k <= 500 {
        (1..=k).map(|i| (2 * i - 1) as f64 / (2 * i) as f64).product::<f64>()
    } else {
        let kf = k as f64;
        (ln_gamma(2.0 * kf + 1.0) - 2.0 * ln_gamma(kf + 1.0) - 2.0 * kf * std::f64::consts::LN_2).exp()
    };
    Ok(rho(k, d) * central / 2.0)
}

/// `1/(k+2) Σᵢ pᵢ(1−pᵢ) [(F⁻¹)′(pᵢ)]²` with `pᵢ = i/(k+1)`.
pub fn kvar_taylor_approx(q: &Quantile1D, k: usize) -> Result<f64> {
    check_k(k)?;
    let kf = k as f64;
    let mut sum = 0.0;
    for i in 1..=k {
        let p = i as f64 / (kf + 1.0);
        let qd = q.quantile_density(p);
        if !qd.is_finite() {
            return Err(KvarError::Singularity { p });
        }
        sum += p * (1.0 - p) * qd * qd;
    }
    Ok(sum / (kf + 2.0))
}

/// `Var_∞(Unif([0,1]²)) = 1/(2π)`.
pub fn varinf_unit_square() -> f64 {
    1.0 / (2.0 * std::f64::consts::PI)
}

/// `168 √m / k^{1/2 − 2/d}`, the k-variance bound for `m`-cluster laws in
/// dimension `d > 4`.
pub fn clustered_bound(k: usize, m: usize, d: usize) -> Result<f64> {
    check_k(k)?;
    if m == 0 {
        return Err(KvarError::param("m", "need at least one cluster"));
    }
    if d <= 4 {
        return Err(KvarError::param("d", format!("bound needs d > 4, got {d}")));
    }
    let exponent = 0.5 - 2.0 / d as f64;
    Ok(168.0 * (m as f64).sqrt() / (k as f64).powf(exponent))
}

/// Largest `k` covered by [`clustered_bound`] for an `m`-component Gaussian
/// mixture of per-coordinate deviation `σ`: `m (32 σ² ln(1/σ))⁻²`, or `None`
/// unless `ln(1/σ) ≥ 25/8`.
pub fn clustered_k_max(m: usize, sigma: f64) -> Option<f64> {
    let l = (1.0 / sigma).ln();
    if !(sigma > 0.0) || l < 25.0 / 8.0 {
        return None;
    }
    let t = 32.0 * sigma * sigma * l;
    Some(m as f64 / (t * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{quantile1d, MeasureSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn uniform_values() {
        assert!(close(kvar_uniform(1).unwrap(), 1.0 / 12.0, 1e-15));
        assert!(close(kvar_uniform(10).unwrap(), 10.0 / 66.0, 1e-15));
        assert!((kvar_uniform(1_000_000_000).unwrap() - 1.0 / 6.0).abs() < 1e-9);
        assert!(kvar_uniform(0).is_err());
        let mut prev = 0.0;
        for k in 1..200 {
            let v = kvar_uniform(k).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert!(close(harmonic(10), 2.928968253968254, 1e-15));
        assert!(close(harmonic(1_000_000), 14.392726722865724, 1e-14));
        // Both branches agree at the switch.
        let kf = 1_000_000f64;
        let asym = kf.ln() + EULER_GAMMA + 0.5 / kf - 1.0 / (12.0 * kf * kf);
        assert!(close(asym, harmonic(1_000_000), 1e-14));
    }

    #[test]
    fn exponential_values() {
        assert!(close(kvar_exponential(1, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(kvar_exponential(3, 1.0).unwrap(), 11.0 / 6.0, 1e-15));
        assert!(close(kvar_exponential(3, 2.0).unwrap(), 11.0 / 24.0, 1e-15));
        assert!(kvar_exponential(3, 0.0).is_err());
    }

    #[test]
    fn weibull_values() {
        assert_eq!(varinf_weibull(2.0).unwrap(), Limit::Infinite);
        assert_eq!(varinf_weibull(1.5).unwrap(), Limit::Infinite);
        assert!(close(varinf_weibull(4.0).unwrap().value(), 0.22155673136318949, 1e-14));
        assert!(close(varinf_weibull(3.0).unwrap().value(), 0.4513726464754668, 1e-14));
        assert!(varinf_weibull(-1.0).is_err());
    }

    #[test]
    fn tukey_values() {
        let t = varinf_tukey(2.0).unwrap();
        assert!(close(t.value, 1.0 / 6.0, 1e-15) && t.guaranteed);
        let t = varinf_tukey(0.0).unwrap();
        assert!(close(t.value, 1.0, 1e-15) && !t.guaranteed);
        assert!(close(varinf_tukey(3.0).unwrap().value, 0.1, 1e-15));
        assert!(matches!(varinf_tukey(-1.0), Err(KvarError::Divergent(_))));
        assert!(matches!(varinf_tukey(-3.0), Err(KvarError::Divergent(_))));
    }

    #[test]
    fn two_point_values() {
        assert!(close(kvar_two_point(1, 1).unwrap(), 0.25, 1e-15));
        assert!(close(kvar_two_point(2, 4).unwrap(), 0.2651650429449553, 1e-14));
        assert!(close(kvar_two_point(256, 4).unwrap(), 0.28195708388670993, 1e-12));
        // Log-gamma branch.
        assert!(close(kvar_two_point(600, 4).unwrap(), 0.28203602815381622, 1e-11));
        assert!(close(kvar_two_point(1000, 4).unwrap(), 0.2820595321301492, 1e-11));
        let limit = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((kvar_two_point(1_000_000, 4).unwrap() - limit).abs() < 1e-6);
    }

    /// `ρ/2 · E|A−B|·(1/k)` with `A, B ~ Bin(k, ½)` counted directly.
    fn two_point_brute(k: usize, d: usize) -> f64 {
        let mut pmf = vec![1.0f64];
        for _ in 0..k {
            let mut next = vec![0.0; pmf.len() + 1];
            for (i, p) in pmf.iter().enumerate() {
                next[i] += 0.5 * p;
                next[i + 1] += 0.5 * p;
            }
            pmf = next;
        }
        let mut e = 0.0;
        for (a, pa) in pmf.iter().enumerate() {
            for (b, pb) in pmf.iter().enumerate() {
                e += pa * pb * (a as f64 - b as f64).abs();
            }
        }
        // Unmatched points pay distance 1, squared 1, averaged over k.
        rho(k, d) / 2.0 * e / k as f64
    }

    #[test]
    fn two_point_matches_binomial_count() {
        for d in [1, 2, 4, 8] {
            for k in 1..=40 {
                let a = kvar_two_point(k, d).unwrap();
                let b = two_point_brute(k, d);
                assert!(close(a, b, 1e-12), "k={k} d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn taylor_uniform() {
        let q = quantile1d(&MeasureSpec::Uniform01).unwrap();
        assert!(close(kvar_taylor_approx(&q, 10).unwrap(), 10.0 / 66.0, 1e-14));
        assert!((kvar_taylor_approx(&q, 10_000).unwrap() - 1.0 / 6.0).abs() < 1e-3);
    }

    #[test]
    fn taylor_exponential_grows() {
        let q = quantile1d(&MeasureSpec::Exponential { rate: 1.0 }).unwrap();
        let v: Vec<f64> = [100, 1000, 10_000].iter().map(|&k| kvar_taylor_approx(&q, k).unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    }

    #[test]
    fn unit_square_constant() {
        assert!(close(varinf_unit_square(), 0.15915494309189535, 1e-15));
    }

    #[test]
    fn clustered() {
        assert!(close(clustered_bound(1, 2, 8).unwrap(), 168.0 * 2f64.sqrt(), 1e-15));
        assert!(close(clustered_bound(16, 2, 8).unwrap(), 168.0 * 2f64.sqrt() / 2.0, 1e-14));
        assert!(clustered_bound(4, 2, 4).is_err());
        // σ for x = 0.95, d = 8 is about 0.11: ln(1/σ) < 25/8.
        assert_eq!(clustered_k_max(2, MeasureSpec::mixture_sigma(0.95, 8)), None);
        assert!(clustered_k_max(2, 1e-3).is_some());
    }
}
