//! Truncated power series in the monomial basis of H²(𝔻).
//!
//! A [`CoefficientFunction`] stores c_0..c_N of f(z) = Σ c_k z^k. The H² norm
//! is the ℓ² norm of the coefficients, so inner products and norms are exact
//! for the stored data; everything beyond degree N is simply absent.
//!
//! Order rules: sums and differences carry the larger order of their operands
//! (missing coefficients are zero), products truncate to the order the caller
//! asks for, and nothing ever extends the order implicitly.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};

/// Default truncation degree for theorem checks.
pub const DEFAULT_ORDER: usize = 512;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Taylor coefficients c_0..c_N of an element of H²(𝔻).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CoefficientFunction {
    coeffs: Vec<Complex64>,
}

impl From<Vec<[f64; 2]>> for CoefficientFunction {
    fn from(pairs: Vec<[f64; 2]>) -> Self {
        Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<CoefficientFunction> for Vec<[f64; 2]> {
    fn from(f: CoefficientFunction) -> Self {
        f.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl CoefficientFunction {
    /// Wraps a coefficient vector. An empty vector becomes the zero function of order 0.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order + 1] }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut f = Self::zeros(order);
        f.coeffs[0] = c;
        f
    }

    /// z^k as an element of order `order` (zero if k > order).
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut f = Self::zeros(order);
        if k <= order {
            f.coeffs[k] = ONE;
        }
        f
    }

    /// The identity function z.
    pub fn identity(order: usize) -> Self {
        Self::monomial(1, order)
    }

    /// Truncation degree N.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// c_k, or zero beyond the stored order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Degree of the highest non-zero coefficient, `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != ZERO)
    }

    /// Re-expresses at a different order: truncates or zero-pads.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, ZERO);
        Self { coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// H² inner product Σ f_k conj(g_k) over the common index range.
    pub fn h2_inner(&self, other: &Self) -> Complex64 {
        h2_inner(self, other)
    }

    pub fn h2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn h2_norm(&self) -> f64 {
        self.h2_norm_sq().sqrt()
    }

    /// ℓ² norm of coefficients 0..=last (clamped to the order).
    pub fn window_norm(&self, last: usize) -> f64 {
        let end = last.min(self.order());
        self.coeffs[..=end].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Horner evaluation for |z| ≤ 1.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(HardyError::OutsideDisk(z));
        }
        Ok(self.evaluate_extrapolated(z))
    }

    /// Horner evaluation of the truncated polynomial anywhere in ℂ. Outside the
    /// closed disk this is the polynomial, not the H² function.
    pub fn evaluate_extrapolated(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Formal derivative; the order drops by one (order 0 stays 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zeros(0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn multiply(&self, other: &Self, order: usize) -> Self {
        multiply(self, other, order)
    }
}

impl Add for &CoefficientFunction {
    type Output = CoefficientFunction;

    fn add(self, rhs: &CoefficientFunction) -> CoefficientFunction {
        let n = self.order().max(rhs.order());
        CoefficientFunction::new((0..=n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &CoefficientFunction {
    type Output = CoefficientFunction;

    fn sub(self, rhs: &CoefficientFunction) -> CoefficientFunction {
        let n = self.order().max(rhs.order());
        CoefficientFunction::new((0..=n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &CoefficientFunction {
    type Output = CoefficientFunction;

    fn neg(self) -> CoefficientFunction {
        self.scale(-ONE)
    }
}

impl Mul<Complex64> for &CoefficientFunction {
    type Output = CoefficientFunction;

    fn mul(self, rhs: Complex64) -> CoefficientFunction {
        self.scale(rhs)
    }
}

/// Exponent s of f_s(z) = (1 - z)^s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexExponent(pub Complex64);

impl ComplexExponent {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(s: f64) -> Self {
        Self(Complex64::new(s, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// f_s ∈ H² exactly when Re(s) > -1/2.
    pub fn in_hardy_space(self) -> bool {
        self.0.re > -0.5
    }

    /// `Some(m)` when s is the non-negative integer m, in which case f_s is a
    /// polynomial of degree m.
    pub fn as_nonnegative_integer(self) -> Option<usize> {
        let r = self.0.re.round();
        if self.0.im == 0.0 && r >= 0.0 && (self.0.re - r).abs() < 1e-14 {
            Some(r as usize)
        } else {
            None
        }
    }
}

impl From<Complex64> for ComplexExponent {
    fn from(s: Complex64) -> Self {
        Self(s)
    }
}

impl From<f64> for ComplexExponent {
    fn from(s: f64) -> Self {
        Self::real(s)
    }
}

pub fn h2_inner(f: &CoefficientFunction, g: &CoefficientFunction) -> Complex64 {
    f.coeffs
        .iter()
        .zip(g.coeffs.iter())
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Truncated Cauchy product: coefficient k = Σ_{i+j=k} f_i g_j for k ≤ order.
pub fn multiply(f: &CoefficientFunction, g: &CoefficientFunction, order: usize) -> CoefficientFunction {
    let mut out = vec![ZERO; order + 1];
    let fd = f.order().min(order);
    for (i, &fi) in f.coeffs[..=fd].iter().enumerate() {
        if fi == ZERO {
            continue;
        }
        let gd = g.order().min(order - i);
        for (o, &gj) in out[i..=i + gd].iter_mut().zip(&g.coeffs[..=gd]) {
            *o += fi * gj;
        }
    }
    CoefficientFunction::new(out)
}

/// Iterator over the binomial coefficients of (1 - z)^s via
/// c_0 = 1, c_{n+1} = c_n (n - s)/(n + 1).
#[derive(Debug, Clone)]
pub struct BinomialCoefficients {
    s: Complex64,
    n: usize,
    current: Complex64,
}

impl BinomialCoefficients {
    pub fn new(s: ComplexExponent) -> Self {
        Self { s: s.0, n: 0, current: ONE }
    }
}

impl Iterator for BinomialCoefficients {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let out = self.current;
        let n = self.n as f64;
        self.current *= (Complex64::new(n, 0.0) - self.s) / (n + 1.0);
        self.n += 1;
        Some(out)
    }
}

/// Coefficients of f_s(z) = (1 - z)^s on the principal branch, c_0 = 1.
pub fn binomial_series(s: ComplexExponent, order: usize) -> CoefficientFunction {
    CoefficientFunction::new(BinomialCoefficients::new(s).take(order + 1).collect())
}

/// Coefficients of exp(f) from n b_n = Σ_{k=1..n} k f_k b_{n-k}, b_0 = exp(f_0).
pub fn exp_series(f: &CoefficientFunction, order: usize) -> CoefficientFunction {
    let mut b = vec![ZERO; order + 1];
    b[0] = f.coeff(0).exp();
    // k·f_k, precomputed once
    let kf: Vec<Complex64> = (0..=order.min(f.order()))
        .map(|k| f.coeff(k) * k as f64)
        .collect();
    for n in 1..=order {
        let top = n.min(kf.len() - 1);
        let mut acc = ZERO;
        for k in 1..=top {
            acc += kf[k] * b[n - k];
        }
        b[n] = acc / n as f64;
    }
    CoefficientFunction::new(b)
}

/// Upper estimate of the ℓ² tail Σ_{k>N} |c_k(f_s)|².
///
/// Sums the recurrence exactly out to N' = 16N and adds an integral-comparison
/// remainder |c_{N'}|² N'/(2p - 1) for the rest, where p is the observed decay
/// exponent (capped by the asymptotic exponent Re(s) + 1) and the remainder is
/// doubled.
pub fn tail_bound(s: ComplexExponent, order: usize) -> Result<f64> {
    if !s.in_hardy_space() {
        return Err(HardyError::NotInHardySpace(s.0));
    }
    if let Some(m) = s.as_nonnegative_integer() {
        return Ok(BinomialCoefficients::new(s)
            .take(m + 1)
            .skip(order + 1)
            .map(|c| c.norm_sqr())
            .sum());
    }
    let cutoff = 16 * order.max(1);
    let coeffs: Vec<Complex64> = BinomialCoefficients::new(s).take(cutoff + 1).collect();
    let summed: f64 = coeffs[order + 1..].iter().map(|c| c.norm_sqr()).sum();

    let last = coeffs[cutoff].norm();
    let mid = coeffs[cutoff / 2].norm();
    if last == 0.0 {
        return Ok(summed);
    }
    let observed = if mid > 0.0 { (mid / last).ln() / std::f64::consts::LN_2 } else { f64::INFINITY };
    let p = observed.min(s.0.re + 1.0);
    let remainder = if p > 0.5 {
        2.0 * last * last * cutoff as f64 / (2.0 * p - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(summed + remainder)
}
