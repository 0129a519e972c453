//! Closed-form quantile, distribution and density evaluators for the
//! one-dimensional families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{KvarError, Result};

use super::{MeasureSpec, Sampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Family1D {
    Uniform,
    Exponential { rate: f64 },
    Weibull { shape: f64 },
    /// Tukey's symmetric lambda family with `lambda != 0`.
    Tukey { lambda: f64 },
    Logistic,
    Normal { mean: f64, sd: f64 },
}

/// Quantile function `F⁻¹`, distribution function `F`, density `f` and
/// quantile density `(F⁻¹)′ = 1/f(F⁻¹)` of a one-dimensional family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantile1D {
    pub(crate) family: Family1D,
}

/// Builds the evaluators for a one-dimensional family.
///
/// Tukey's lambda at `λ = 0` is the standard logistic distribution.
pub fn quantile1d(spec: &MeasureSpec) -> Result<Quantile1D> {
    spec.validate()?;
    let family = match *spec {
        MeasureSpec::Uniform01 => Family1D::Uniform,
        MeasureSpec::Exponential { rate } => Family1D::Exponential { rate },
        MeasureSpec::Weibull { shape } => Family1D::Weibull { shape },
        MeasureSpec::TukeyLambda { lambda } if lambda == 0.0 => Family1D::Logistic,
        MeasureSpec::TukeyLambda { lambda } => Family1D::Tukey { lambda },
        MeasureSpec::Logistic => Family1D::Logistic,
        MeasureSpec::Gaussian {
            ref mean,
            ref variance,
        } if mean.len() == 1 && variance[0] > 0.0 => Family1D::Normal {
            mean: mean[0],
            sd: variance[0].sqrt(),
        },
        ref other => {
            return Err(KvarError::UnsupportedFamily(format!(
                "{} has no closed-form one-dimensional quantile",
                other.name()
            )))
        }
    };
    Ok(Quantile1D { family })
}

impl Quantile1D {
    pub fn quantile(&self, u: f64) -> f64 {
        match self.family {
            Family1D::Uniform => u,
            Family1D::Exponential { rate } => -(-u).ln_1p() / rate,
            Family1D::Weibull { shape } => (-(-u).ln_1p()).powf(shape.recip()),
            Family1D::Tukey { lambda } => (u.powf(lambda) - (1.0 - u).powf(lambda)) / lambda,
            Family1D::Logistic => (u / (1.0 - u)).ln(),
            Family1D::Normal { mean, sd } => mean - sd * std::f64::consts::SQRT_2 * erfc_inv(2.0 * u),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family1D::Uniform => x.clamp(0.0, 1.0),
            Family1D::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Family1D::Weibull { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x.powf(shape)).exp_m1()
                }
            }
            Family1D::Tukey { lambda } => tukey_cdf(lambda, x),
            Family1D::Logistic => 1.0 / (1.0 + (-x).exp()),
            Family1D::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / sd * FRAC_1_SQRT_2),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            Family1D::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Family1D::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Family1D::Weibull { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    shape * x.powf(shape - 1.0) * (-x.powf(shape)).exp()
                }
            }
            Family1D::Tukey { lambda } => {
                let (lo, hi) = self.support();
                if x < lo || x > hi {
                    0.0
                } else {
                    tukey_quantile_density(lambda, tukey_cdf(lambda, x)).recip()
                }
            }
            Family1D::Logistic => {
                let e = (-x.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family1D::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
        }
    }

    /// `(F⁻¹)′(u)`; infinite where the density at the quantile vanishes.
    pub fn quantile_density(&self, u: f64) -> f64 {
        match self.family {
            Family1D::Uniform => 1.0,
            Family1D::Exponential { rate } => 1.0 / (rate * (1.0 - u)),
            Family1D::Weibull { shape } => {
                let t = -(-u).ln_1p();
                t.powf(shape.recip() - 1.0) / (shape * (1.0 - u))
            }
            Family1D::Tukey { lambda } => tukey_quantile_density(lambda, u),
            Family1D::Logistic => 1.0 / (u * (1.0 - u)),
            Family1D::Normal { .. } => self.density(self.quantile(u)).recip(),
        }
    }

    /// Closure of `F⁻¹((0,1))`.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family1D::Uniform => (0.0, 1.0),
            Family1D::Exponential { .. } | Family1D::Weibull { .. } => (0.0, f64::INFINITY),
            Family1D::Tukey { lambda } if lambda > 0.0 => (-lambda.recip(), lambda.recip()),
            Family1D::Tukey { .. } | Family1D::Logistic | Family1D::Normal { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    }
}

fn tukey_quantile_density(lambda: f64, u: f64) -> f64 {
    u.powf(lambda - 1.0) + (1.0 - u).powf(lambda - 1.0)
}

/// Inverts the Tukey quantile by bisection; the quantile is strictly
/// increasing on (0, 1).
fn tukey_cdf(lambda: f64, x: f64) -> f64 {
    let q = |u: f64| (u.powf(lambda) - (1.0 - u).powf(lambda)) / lambda;
    if lambda > 0.0 {
        if x <= -lambda.recip() {
            return 0.0;
        }
        if x >= lambda.recip() {
            return 1.0;
        }
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::Uniform01,
            MeasureSpec::Exponential { rate: 1.0 },
            MeasureSpec::Exponential { rate: 2.5 },
            MeasureSpec::Weibull { shape: 0.7 },
            MeasureSpec::Weibull { shape: 4.0 },
            MeasureSpec::TukeyLambda { lambda: 2.0 },
            MeasureSpec::TukeyLambda { lambda: 0.14 },
            MeasureSpec::TukeyLambda { lambda: -0.5 },
            MeasureSpec::TukeyLambda { lambda: 0.0 },
            MeasureSpec::Logistic,
            MeasureSpec::Gaussian {
                mean: vec![1.5],
                variance: vec![4.0],
            },
        ]
    }

    fn grid() -> impl Iterator<Item = f64> {
        (1..=999).map(|i| i as f64 / 1000.0).filter(|&u| u > 0.001 && u < 0.999)
    }

    #[test]
    fn cdf_inverts_quantile() {
        for spec in all_families() {
            let q = quantile1d(&spec).unwrap();
            for u in grid() {
                let back = q.cdf(q.quantile(u));
                assert!((back - u).abs() < 1e-9, "{spec:?}: u={u} cdf(q(u))={back}");
            }
        }
    }

    #[test]
    fn quantile_density_is_reciprocal_density() {
        for spec in all_families() {
            let q = quantile1d(&spec).unwrap();
            for u in grid() {
                let prod = q.quantile_density(u) * q.density(q.quantile(u));
                assert!((prod - 1.0).abs() < 1e-9, "{spec:?}: u={u} product={prod}");
            }
        }
    }

    #[test]
    fn named_values() {
        let uni = quantile1d(&MeasureSpec::Uniform01).unwrap();
        assert_eq!(uni.quantile(0.25), 0.25);

        let exp = quantile1d(&MeasureSpec::Exponential { rate: 1.0 }).unwrap();
        let u = 1.0 - (-1.0f64).exp();
        assert!((exp.quantile(u) - 1.0).abs() < 1e-15);

        // λ = 2: (u² − (1−u)²)/2 = u − 1/2.
        let tukey = quantile1d(&MeasureSpec::TukeyLambda { lambda: 2.0 }).unwrap();
        assert!((tukey.quantile(0.75) - 0.25).abs() < 1e-15);
        for u in grid() {
            assert!((tukey.quantile(u) - (u - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn tukey_zero_is_logistic() {
        let t0 = quantile1d(&MeasureSpec::TukeyLambda { lambda: 0.0 }).unwrap();
        let logistic = quantile1d(&MeasureSpec::Logistic).unwrap();
        for u in grid() {
            assert_eq!(t0.quantile(u), (u / (1.0 - u)).ln());
            assert_eq!(t0.quantile(u), logistic.quantile(u));
        }
    }

    #[test]
    fn multidimensional_families_are_rejected() {
        for spec in [
            MeasureSpec::TwoPoint { dim: 1 },
            MeasureSpec::UniformCube { dim: 2 },
            MeasureSpec::GaussianMixture { x: 0.5, dim: 1 },
            MeasureSpec::Gaussian {
                mean: vec![0.0, 0.0],
                variance: vec![1.0, 1.0],
            },
        ] {
            assert!(matches!(quantile1d(&spec), Err(KvarError::UnsupportedFamily(_))));
        }
    }
}
