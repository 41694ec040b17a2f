//! Closed-form function expressions.
//!
//! Pointwise evaluation near z = 1 cannot use truncated series: the series of
//! (1−z)^s diverges at 1 when Re(s) ≤ 0. [`Analytic`] carries a formula where
//! one exists and a coefficient vector only as a fallback, so orbit and limit
//! computations can sample arbitrarily close to the boundary point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compop::affine_apply;
use crate::series::{binomial_series, exp_series, CoefficientFunction, ComplexExponent};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Beyond this modulus truncated series are not trusted pointwise.
pub const SERIES_TRUST_RADIUS: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analytic {
    /// coef·(1−z)^s, principal branch.
    Power { coef: Complex64, s: Complex64 },
    /// coef·e^{rate·z}.
    Exp { coef: Complex64, rate: Complex64 },
    /// An exact polynomial.
    Poly(CoefficientFunction),
    /// A truncated series; evaluation is only meaningful well inside the disk.
    Series(CoefficientFunction),
    /// coef·exp(b(z+1)/(z−1)).
    SingularInner { coef: Complex64, b: f64 },
    Sum(Vec<Analytic>),
    Product(Vec<Analytic>),
}

impl Analytic {
    /// f_s(z) = (1−z)^s.
    pub fn power(s: impl Into<ComplexExponent>) -> Self {
        Analytic::Power { coef: ONE, s: s.into().value() }
    }

    pub fn constant(c: Complex64) -> Self {
        Analytic::Poly(CoefficientFunction::constant(c, 0))
    }

    pub fn exp(rate: Complex64) -> Self {
        Analytic::Exp { coef: ONE, rate }
    }

    pub fn singular_inner(b: f64) -> Self {
        Analytic::SingularInner { coef: ONE, b }
    }

    /// f_s + f_{s + 2πi/ln a}: two eigenvectors of C_{φ_a} sharing the eigenvalue a^s.
    pub fn eigen_pair_sum(s: Complex64, a: f64) -> Self {
        let shift = Complex64::new(0.0, std::f64::consts::TAU / a.ln());
        Analytic::Sum(vec![Analytic::power(s), Analytic::power(s + shift)])
    }

    pub fn scaled(self, c: Complex64) -> Self {
        match self {
            Analytic::Power { coef, s } => Analytic::Power { coef: coef * c, s },
            Analytic::Exp { coef, rate } => Analytic::Exp { coef: coef * c, rate },
            Analytic::Poly(p) => Analytic::Poly(p.scale(c)),
            Analytic::Series(p) => Analytic::Series(p.scale(c)),
            Analytic::SingularInner { coef, b } => Analytic::SingularInner { coef: coef * c, b },
            Analytic::Sum(v) => Analytic::Sum(v.into_iter().map(|t| t.scaled(c)).collect()),
            Analytic::Product(mut v) => {
                if let Some(first) = v.pop() {
                    v.push(first.scaled(c));
                }
                Analytic::Product(v)
            }
        }
    }

    /// Closed-form value; truncated series are evaluated as polynomials.
    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            Analytic::Power { coef, s } => coef * power_of_one_minus(z, *s),
            Analytic::Exp { coef, rate } => coef * (rate * z).exp(),
            Analytic::Poly(p) | Analytic::Series(p) => p.evaluate_extrapolated(z),
            Analytic::SingularInner { coef, b } => {
                if z == ONE {
                    // radial limit at the singular point
                    ZERO
                } else {
                    coef * (b * (z + 1.0) / (z - 1.0)).exp()
                }
            }
            Analytic::Sum(v) => v.iter().map(|t| t.value(z)).sum(),
            Analytic::Product(v) => v.iter().map(|t| t.value(z)).product(),
        }
    }

    /// f(1 − u). Orbits 1 − a^n(1 − w) approach 1, where forming z first loses
    /// the relative precision of u; closed forms are evaluated in u directly.
    pub fn value_at_one_minus(&self, u: Complex64) -> Complex64 {
        match self {
            Analytic::Power { coef, s } => coef * power_of(u, *s),
            Analytic::Exp { coef, rate } => coef * (rate * (ONE - u)).exp(),
            Analytic::Poly(p) | Analytic::Series(p) => p.evaluate_extrapolated(ONE - u),
            Analytic::SingularInner { coef, b } => {
                if u == ZERO {
                    ZERO
                } else {
                    coef * (-b * (2.0 - u) / u).exp()
                }
            }
            Analytic::Sum(v) => v.iter().map(|t| t.value_at_one_minus(u)).sum(),
            Analytic::Product(v) => v.iter().map(|t| t.value_at_one_minus(u)).product(),
        }
    }

    /// Size of the summands behind f(1 − u): Σ|terms| for sums, |f| otherwise.
    /// A value far below this magnitude is zero up to cancellation error.
    pub fn magnitude_at_one_minus(&self, u: Complex64) -> f64 {
        match self {
            Analytic::Sum(v) => v.iter().map(|t| t.magnitude_at_one_minus(u)).sum(),
            Analytic::Product(v) => v.iter().map(|t| t.magnitude_at_one_minus(u)).product(),
            _ => self.value_at_one_minus(u).norm(),
        }
    }

    /// False when a truncated series is involved.
    pub fn is_exact(&self) -> bool {
        match self {
            Analytic::Series(_) => false,
            Analytic::Sum(v) | Analytic::Product(v) => v.iter().all(Analytic::is_exact),
            _ => true,
        }
    }

    /// Whether the value at z should be trusted: exact expressions always, series
    /// only inside the trust radius.
    pub fn trusted_at(&self, z: Complex64) -> bool {
        self.is_exact() || z.norm() <= SERIES_TRUST_RADIUS
    }

    /// Taylor coefficients 0..=order.
    pub fn coefficients(&self, order: usize) -> CoefficientFunction {
        match self {
            Analytic::Power { coef, s } => binomial_series(ComplexExponent(*s), order).scale(*coef),
            Analytic::Exp { coef, rate } => {
                exp_series(&CoefficientFunction::identity(order).scale(*rate), order).scale(*coef)
            }
            Analytic::Poly(p) | Analytic::Series(p) => p.with_order(order),
            Analytic::SingularInner { coef, b } => singular_inner_coefficients(*b, order).scale(*coef),
            Analytic::Sum(v) => v
                .iter()
                .fold(CoefficientFunction::zeros(order), |acc, t| &acc + &t.coefficients(order)),
            Analytic::Product(v) => v.iter().fold(CoefficientFunction::constant(ONE, order), |acc, t| {
                acc.multiply(&t.coefficients(order), order)
            }),
        }
    }

    /// The expression for f∘φ_t with φ_t(z) = tz + 1 − t.
    pub fn compose_affine(&self, t: f64) -> Analytic {
        match self {
            // 1 − φ_t(z) = t(1 − z)
            Analytic::Power { coef, s } => Analytic::Power { coef: coef * Complex64::new(t, 0.0).powc(*s), s: *s },
            Analytic::Exp { coef, rate } => Analytic::Exp {
                coef: coef * (rate * (1.0 - t)).exp(),
                rate: rate * t,
            },
            Analytic::Poly(p) if p.degree().unwrap_or(0) <= POLY_SHIFT_DEGREE => Analytic::Poly(poly_compose_affine(p, t)),
            Analytic::Poly(p) => Analytic::Poly(affine_apply(t, p)),
            Analytic::Series(p) => Analytic::Series(affine_apply(t, p)),
            // I_b∘φ_t = e^{(b/t)(t−1)} I_{b/t}
            Analytic::SingularInner { coef, b } => Analytic::SingularInner {
                coef: coef * ((b / t) * (t - 1.0)).exp(),
                b: b / t,
            },
            Analytic::Sum(v) => Analytic::Sum(v.iter().map(|x| x.compose_affine(t)).collect()),
            Analytic::Product(v) => Analytic::Product(v.iter().map(|x| x.compose_affine(t)).collect()),
        }
    }
}

/// Above this degree the re-expansion about z = 1 loses more than the matrix route.
const POLY_SHIFT_DEGREE: usize = 40;

/// p∘φ_t via the expansion p = Σ d_m (1−z)^m, so p∘φ_t = Σ d_m t^m (1−z)^m.
/// Avoids the cancellation of the matrix route when p vanishes at 1.
fn poly_compose_affine(p: &CoefficientFunction, t: f64) -> CoefficientFunction {
    let deg = p.degree().unwrap_or(0);
    let binom = |n: usize, k: usize| (1..=k).fold(1.0f64, |acc, i| acc * (n - k + i) as f64 / i as f64);
    let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); p.order() + 1];
    for m in 0..=deg {
        let d: Complex64 = (m..=deg).map(|k| p.coeff(k) * binom(k, m)).sum::<Complex64>() * sign(m);
        let dm = d * t.powi(m as i32);
        for (j, o) in out.iter_mut().enumerate().take(m + 1) {
            *o += dm * binom(m, j) * sign(j);
        }
    }
    CoefficientFunction::new(out)
}

/// (1−z)^s on the principal branch; at z = 1 the radial limit (0 for Re s > 0,
/// 1 for s = 0, non-finite otherwise).
pub fn power_of_one_minus(z: Complex64, s: Complex64) -> Complex64 {
    power_of(ONE - z, s)
}

/// w^s on the principal branch with the radial-limit convention at w = 0.
pub fn power_of(w: Complex64, s: Complex64) -> Complex64 {
    if w == ZERO {
        return if s == ZERO {
            ONE
        } else if s.re > 0.0 {
            ZERO
        } else {
            Complex64::new(f64::INFINITY, 0.0)
        };
    }
    (s * w.ln()).exp()
}

/// Coefficients of I_b(z) = exp(b(z+1)/(z−1)), from the series b(−1 − 2z − 2z² − …).
pub fn singular_inner_coefficients(b: f64, order: usize) -> CoefficientFunction {
    let mut g = vec![Complex64::new(-2.0 * b, 0.0); order + 1];
    g[0] = Complex64::new(-b, 0.0);
    exp_series(&CoefficientFunction::new(g), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_branch_and_boundary() {
        let f = Analytic::power(0.5);
        assert_eq!(f.value(ZERO), ONE);
        assert!((f.value(c(-3.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.value(ONE), ZERO);
        assert_eq!(Analytic::power(0.0).value(ONE), ONE);
        assert!(!Analytic::power(-0.25).value(ONE).re.is_finite());
    }

    #[test]
    fn coefficients_match_values_inside_the_disk() {
        let exprs = [
            Analytic::power(c(0.25, 3.0)),
            Analytic::exp(c(0.5, -1.0)),
            Analytic::singular_inner(1.0),
            Analytic::Product(vec![Analytic::power(1.0), Analytic::exp(ONE)]),
            Analytic::eigen_pair_sum(ZERO, 0.5),
        ];
        let z = c(0.3, -0.2);
        for e in &exprs {
            let coeffs = e.coefficients(256);
            assert!((coeffs.evaluate(z).unwrap() - e.value(z)).norm() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn affine_composition_is_pointwise_composition() {
        let exprs = [
            Analytic::power(c(-0.2, 1.0)),
            Analytic::exp(c(2.0, 0.5)),
            Analytic::singular_inner(2.0),
            Analytic::Poly(CoefficientFunction::from_real(&[1.0, 2.0, -3.0])),
            Analytic::Sum(vec![Analytic::power(0.5), Analytic::constant(c(7.0, 0.0))]),
        ];
        let t = 0.35;
        for e in &exprs {
            let composed = e.compose_affine(t);
            for z in [c(0.1, 0.2), c(-0.7, 0.0), c(0.95, 0.0)] {
                let direct = e.value(t * z + (1.0 - t));
                assert!((composed.value(z) - direct).norm() < 1e-12 * (1.0 + direct.norm()), "{e:?} at {z}");
            }
        }
    }

    #[test]
    fn singular_inner_values() {
        let i1 = singular_inner_coefficients(1.0, 256);
        assert!((i1.coeff(0).re - (-1f64).exp()).abs() < 1e-15);
        assert!((i1.evaluate(c(0.5, 0.0)).unwrap().re - (-3f64).exp()).abs() < 1e-9);
        let i2 = singular_inner_coefficients(2.0, 128);
        let sq = i1.with_order(128).multiply(&i1.with_order(128), 128);
        assert!((&i2 - &sq).window_norm(64) < 1e-9);
    }

    #[test]
    fn evaluation_in_the_boundary_variable() {
        let h = Analytic::eigen_pair_sum(c(-0.25, 0.0), 0.5);
        // h vanishes at u = a^{m+1/2}; in u the cancellation is exact to rounding
        for m in 0..60 {
            let u = c(0.5f64.powf(m as f64 + 0.5), 0.0);
            let v = h.value_at_one_minus(u);
            assert!(v.norm() < 1e-13 * h.magnitude_at_one_minus(u), "m={m}: {v}");
        }
        let e = Analytic::exp(ONE);
        assert!((e.value_at_one_minus(c(0.25, 0.0)) - e.value(c(0.75, 0.0))).norm() < 1e-15);
        let i = Analytic::singular_inner(1.5);
        assert!((i.value_at_one_minus(c(0.4, 0.1)) - i.value(c(0.6, -0.1))).norm() < 1e-14);
    }

    #[test]
    fn exactness_flags() {
        assert!(Analytic::power(0.5).is_exact());
        let s = Analytic::Series(CoefficientFunction::identity(3));
        assert!(!s.is_exact());
        assert!(s.trusted_at(c(0.5, 0.0)));
        assert!(!s.trusted_at(c(0.995, 0.0)));
        assert!(!Analytic::Sum(vec![s, Analytic::power(1.0)]).is_exact());
    }
}
