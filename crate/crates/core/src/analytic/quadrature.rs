//! The one-dimensional limit `Var_∞ = ∫₀¹ u(1−u) [(F⁻¹)′(u)]² du`.
//!
//! Substituting `x = F⁻¹(u)` turns the integrand into `F(1−F)/f` on the
//! support, which is what most families evaluate. Integration uses
//! double-exponential rules (tanh-sinh on intervals, exp-sinh on half-lines,
//! sinh-sinh on the line) truncated at `|t| ≤ T`. Each level halves the step
//! and widens `T` by ½ up to 6.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use statrs::function::erf::erfc;

use crate::error::{KvarError, Result};
use crate::measures::quantile::Family1D;
use crate::measures::Quantile1D;

/// A limit that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    Infinite,
}

impl Limit {
    /// The value, with `f64::INFINITY` for [`Limit::Infinite`].
    pub fn value(self) -> f64 {
        match self {
            Limit::Finite(v) => v,
            Limit::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Limit::Finite(_))
    }
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::Infinite => f.write_str("infinite"),
        }
    }
}

/// Smallest accepted number of level-0 nodes.
pub const MIN_BASE_NODES: usize = 64;

const T_START: f64 = 3.0;
const T_STEP: f64 = 0.5;
const T_MAX: f64 = 6.0;
const MAX_LEVELS: usize = 10;
const REL_TOL: f64 = 1e-11;
const GROWTH: f64 = 1.1;

#[derive(Debug, Clone, Copy)]
enum Domain {
    Interval { lo: f64, hi: f64 },
    HalfLine { lo: f64 },
    Line,
}

impl Domain {
    /// Node and Jacobian at `t`. The Jacobian underflows to zero far out.
    fn node(self, t: f64) -> (f64, f64) {
        let w = FRAC_PI_2 * t.sinh();
        let dw = FRAC_PI_2 * t.cosh();
        match self {
            Domain::Interval { lo, hi } => {
                let e = (-2.0 * w.abs()).exp();
                let frac = if w < 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
                let jac = (hi - lo) * dw * 2.0 * e / ((1.0 + e) * (1.0 + e));
                (lo + (hi - lo) * frac, jac)
            }
            Domain::HalfLine { lo } => {
                let x = w.exp();
                (lo + x, x * dw)
            }
            Domain::Line => (w.sinh(), w.cosh() * dw),
        }
    }
}

fn truncated_sum(g: &dyn Fn(f64) -> f64, domain: Domain, t_max: f64, h: f64) -> f64 {
    let n = (t_max / h).floor() as i64;
    let mut sum = 0.0;
    for i in -n..=n {
        let (x, jac) = domain.node(i as f64 * h);
        if jac == 0.0 || !jac.is_finite() {
            continue;
        }
        sum += g(x) * jac;
    }
    h * sum
}

fn refine(g: &dyn Fn(f64) -> f64, domain: Domain, base_nodes: usize) -> Limit {
    let h0 = 2.0 * T_START / base_nodes as f64;
    let mut prev: Option<f64> = None;
    let mut growth_streak = 0;
    for level in 0..MAX_LEVELS {
        let t_max = (T_START + T_STEP * level as f64).min(T_MAX);
        let h = h0 / (1u64 << level) as f64;
        let s = truncated_sum(g, domain, t_max, h);
        if !s.is_finite() {
            return Limit::Infinite;
        }
        if let Some(p) = prev {
            if s > GROWTH * p {
                growth_streak += 1;
                if growth_streak >= 2 {
                    return Limit::Infinite;
                }
            } else {
                growth_streak = 0;
            }
            if level >= 2 && (s - p).abs() <= REL_TOL * s.abs() {
                return Limit::Finite(s);
            }
        }
        prev = Some(s);
    }
    Limit::Finite(prev.unwrap_or(0.0))
}

/// `(1 − e^{−y})/y`, continuous at 0.
fn expm1_ratio(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        -(-y).exp_m1() / y
    }
}

/// `Φ(z)Φ(−z)/φ(z)`.
fn normal_ratio(z: f64) -> f64 {
    let a = z.abs();
    if a >= 30.0 {
        // Mills ratio asymptotic; Φ(a) rounds to 1.
        let r = 1.0 / (a * a);
        return (1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r))) / a;
    }
    let upper = 0.5 * erfc(a * FRAC_1_SQRT_2);
    let phi = (-0.5 * a * a).exp() / (2.0 * PI).sqrt();
    (1.0 - upper) * upper / phi
}

/// `∫₀¹ u(1−u) [(F⁻¹)′(u)]² du`, reported infinite when successive
/// refinements keep growing.
///
/// `base_nodes` is the number of level-0 nodes and must be at least
/// [`MIN_BASE_NODES`].
pub fn varinf_integral(q: &Quantile1D, base_nodes: usize) -> Result<Limit> {
    if base_nodes < MIN_BASE_NODES {
        return Err(KvarError::param(
            "base_nodes",
            format!("need at least {MIN_BASE_NODES} quadrature nodes, got {base_nodes}"),
        ));
    }
    let limit = match q.family {
        Family1D::Uniform => refine(&|x| x * (1.0 - x), Domain::Interval { lo: 0.0, hi: 1.0 }, base_nodes),
        Family1D::Exponential { rate } => {
            refine(&|x| x * expm1_ratio(rate * x), Domain::HalfLine { lo: 0.0 }, base_nodes)
        }
        Family1D::Weibull { shape } => refine(
            &|x| x * expm1_ratio(x.powf(shape)) / shape,
            Domain::HalfLine { lo: 0.0 },
            base_nodes,
        ),
        Family1D::Logistic => refine(&|_| 1.0, Domain::Line, base_nodes),
        Family1D::Normal { mean, sd } => {
            refine(&|x| sd * normal_ratio((x - mean) / sd), Domain::Line, base_nodes)
        }
        Family1D::Tukey { .. } => {
            // Symmetric about ½; integrate the lower half in quantile space.
            let g = |u: f64| {
                let qd = q.quantile_density(u);
                2.0 * u * (1.0 - u) * qd * qd
            };
            refine(&g, Domain::Interval { lo: 0.0, hi: 0.5 }, base_nodes)
        }
    };
    Ok(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{quantile1d, MeasureSpec};

    fn limit(spec: MeasureSpec) -> Limit {
        varinf_integral(&quantile1d(&spec).unwrap(), 64).unwrap()
    }

    #[test]
    fn uniform_is_one_sixth() {
        let v = limit(MeasureSpec::Uniform01).value();
        assert!((v - 1.0 / 6.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn weibull_matches_gamma_closed_form() {
        // Γ(2/α)/(α(α−2))
        let cases = [(4.0, 0.22155673136318949), (3.0, 0.4513726464754668), (2.5, 0.9313837709802427)];
        for (shape, want) in cases {
            let v = limit(MeasureSpec::Weibull { shape }).value();
            assert!((v - want).abs() < 1e-8 * want, "shape {shape}: {v} vs {want}");
        }
    }

    #[test]
    fn heavy_tails_diverge() {
        for spec in [
            MeasureSpec::Weibull { shape: 1.5 },
            MeasureSpec::Weibull { shape: 2.0 },
            MeasureSpec::Weibull { shape: 0.7 },
            MeasureSpec::Exponential { rate: 1.0 },
            MeasureSpec::Logistic,
            MeasureSpec::TukeyLambda { lambda: 0.0 },
            MeasureSpec::TukeyLambda { lambda: -0.5 },
            MeasureSpec::Gaussian { mean: vec![1.0], variance: vec![4.0] },
        ] {
            assert_eq!(limit(spec.clone()), Limit::Infinite, "{spec:?}");
        }
    }

    #[test]
    fn tukey_with_squared_quantile_density() {
        // 2∫₀^½ u(1−u)(u^{λ−1} + (1−u)^{λ−1})² du; λ = 2 is uniform on [−½, ½].
        let v = limit(MeasureSpec::TukeyLambda { lambda: 2.0 }).value();
        assert!((v - 1.0 / 6.0).abs() < 1e-10, "{v}");
        // λ = 1 is uniform on [−1, 1]: 4 · 1/6.
        let v = limit(MeasureSpec::TukeyLambda { lambda: 1.0 }).value();
        assert!((v - 2.0 / 3.0).abs() < 1e-10, "{v}");
        // λ = 3: 13/210, which differs from 2/((λ+1)(λ+2)) = 1/10.
        let v = limit(MeasureSpec::TukeyLambda { lambda: 3.0 }).value();
        assert!((v - 13.0 / 210.0).abs() < 1e-10, "{v}");
        let v = limit(MeasureSpec::TukeyLambda { lambda: 0.5 }).value();
        assert!((v - 1.7853981633974483).abs() < 1e-8, "{v}");
    }

    #[test]
    fn too_few_nodes_is_rejected() {
        let q = quantile1d(&MeasureSpec::Uniform01).unwrap();
        assert!(matches!(varinf_integral(&q, 63), Err(KvarError::InvalidParameter { .. })));
    }
}
