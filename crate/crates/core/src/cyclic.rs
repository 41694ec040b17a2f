//! Cyclic subspaces K_f = span{C^n_{φ_a} f} and probes of their minimality.
//!
//! Iterates are formed from closed forms where possible (C^n f = f∘φ_{a^n}),
//! so a Krylov basis is not polluted by truncation leakage.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{singular_inner_coefficients, Analytic};
use crate::compop::{affine_apply_rows, leakage_window, row_leakage, WINDOW_LEAKAGE};
use crate::error::{HardyError, Result};
use crate::series::{binomial_series, h2_inner, CoefficientFunction, ComplexExponent};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Residual norm (after normalizing the iterate) below which a new iterate is
/// treated as already in the span.
pub const RANK_TOL: f64 = 1e-12;

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(HardyError::OutOfRange(format!("need 0 < a < 1, got {a}")))
    }
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovBasis {
    /// Orthonormal vectors spanning {C^n f : n ≤ depth}.
    pub vectors: Vec<CoefficientFunction>,
    pub a: f64,
    pub source: Analytic,
    pub depth: usize,
    pub order: usize,
    /// Iterates n that added no new direction.
    pub dropped: Vec<usize>,
}

impl KrylovBasis {
    pub fn empty(source: Analytic, a: f64, order: usize) -> Self {
        Self { vectors: Vec::new(), a, source, depth: 0, order, dropped: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Orthogonalizes a candidate against the basis (two passes of modified
    /// Gram–Schmidt) and appends it if it adds a direction. Returns whether it did.
    pub fn push(&mut self, candidate: &CoefficientFunction) -> bool {
        let mut v = candidate.with_order(self.order).into_coeffs();
        let n0 = norm(&v);
        if n0 == 0.0 || !n0.is_finite() {
            return false;
        }
        v.iter_mut().for_each(|c| *c /= n0);
        for _ in 0..2 {
            for q in &self.vectors {
                let p = dot(&v, q.coeffs());
                axpy(&mut v, -p, q.coeffs());
            }
        }
        let r = norm(&v);
        if r < RANK_TOL {
            return false;
        }
        v.iter_mut().for_each(|c| *c /= r);
        self.vectors.push(CoefficientFunction::new(v));
        true
    }

    /// g − P g, two passes for accuracy.
    pub fn residual(&self, g: &CoefficientFunction) -> CoefficientFunction {
        let mut v = g.with_order(self.order).into_coeffs();
        for _ in 0..2 {
            for q in &self.vectors {
                let p = dot(&v, q.coeffs());
                axpy(&mut v, -p, q.coeffs());
            }
        }
        CoefficientFunction::new(v)
    }

    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, p) in self.vectors.iter().enumerate() {
            for (j, q) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((h2_inner(p, q) - want).norm());
            }
        }
        worst
    }
}

fn iterate(f: &Analytic, a: f64, n: usize, order: usize) -> CoefficientFunction {
    if n == 0 {
        f.coefficients(order)
    } else {
        f.compose_affine(a.powi(n as i32)).coefficients(order)
    }
}

/// Orthonormal basis of span{C^n_{φ_a} f : 0 ≤ n ≤ depth}.
pub fn krylov_basis(f: &Analytic, a: f64, depth: usize, order: usize) -> Result<KrylovBasis> {
    check_a(a)?;
    let mut basis = KrylovBasis::empty(f.clone(), a, order);
    if f.coefficients(order).is_zero() {
        return Err(HardyError::OutOfRange("Krylov basis needs f != 0".into()));
    }
    for n in 0..=depth {
        if !basis.push(&iterate(f, a, n, order)) {
            basis.dropped.push(n);
        }
        basis.depth = n;
    }
    Ok(basis)
}

/// Relative distance ‖g − P g‖/‖g‖ from g to the span of the basis.
pub fn distance(g: &CoefficientFunction, basis: &KrylovBasis) -> f64 {
    let gn = g.h2_norm();
    if gn == 0.0 {
        return 0.0;
    }
    basis.residual(g).h2_norm() / gn
}

/// Distances from h to the Krylov spaces of f at every depth 0..=depth.
pub fn distance_profile(h: &CoefficientFunction, f: &Analytic, a: f64, depth: usize, order: usize) -> Result<Vec<f64>> {
    check_a(a)?;
    let mut basis = KrylovBasis::empty(f.clone(), a, order);
    let mut out = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        if !basis.push(&iterate(f, a, n, order)) {
            basis.dropped.push(n);
        }
        basis.depth = n;
        out.push(distance(h, &basis));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub limit: Complex64,
    /// Aitken extrapolation was used rather than plain convergence.
    pub extrapolated: bool,
    /// The orbit sampled a truncated series beyond its trust radius.
    pub low_confidence: bool,
}

/// lim g(1 − a^n), by direct convergence or Aitken extrapolation of a
/// geometrically converging tail; `NoLimit` otherwise.
pub fn limit_along_orbit(g: &Analytic, a: f64, n_max: usize) -> Result<LimitEstimate> {
    check_a(a)?;
    let n_max = n_max.max(4);
    let vals: Vec<Complex64> = (0..=n_max)
        .map(|n| g.value_at_one_minus(Complex64::new(a.powi(n as i32), 0.0)))
        .collect();
    let low_confidence = !g.is_exact() && a.powi(n_max as i32) < 1.0 - crate::analytic::SERIES_TRUST_RADIUS;
    let last = vals[n_max];
    if !last.norm().is_finite() {
        return Err(HardyError::NoLimit);
    }
    let d1 = last - vals[n_max - 1];
    if d1.norm() <= 1e-12 * last.norm().max(1.0) {
        return Ok(LimitEstimate { limit: last, extrapolated: false, low_confidence });
    }
    let d0 = vals[n_max - 1] - vals[n_max - 2];
    let dm = vals[n_max - 2] - vals[n_max - 3];
    if d0 != ZERO && dm != ZERO {
        let (q1, q0) = (d1 / d0, d0 / dm);
        if q1.norm() < 1.0 - 1e-3 && (q1 - q0).norm() < 1e-3 * q1.norm().max(1e-3) {
            let limit = last + d1 * q1 / (1.0 - q1);
            return Ok(LimitEstimate { limit, extrapolated: true, low_confidence });
        }
    }
    Err(HardyError::NoLimit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProbe {
    pub s: Complex64,
    pub a: f64,
    pub limit: Complex64,
    /// r_n = ‖P_W(C^n f / a^{ns} − L f_s)‖ with f = f_s·g.
    pub residuals: Vec<f64>,
    /// Median of r_{n+1}/r_n over the last third (None when the residuals vanish).
    pub ratio: Option<f64>,
    pub window: usize,
}

impl ConvergenceProbe {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_series_csv(out, "n", "residual", &self.residuals)
    }
}

pub(crate) fn write_series_csv<W: Write>(out: W, x: &str, y: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([x, y])?;
    for (n, v) in values.iter().enumerate() {
        w.write_record(&[n.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| HardyError::Csv(e.to_string()))?;
    Ok(())
}

/// Convergence of a^{−ns} C^n(f_s g) to L f_s, where L = lim g(1 − a^n).
///
/// Uses C^n(f_s g) = a^{ns} f_s·(g∘φ_{a^n}), so r_n is the window norm of
/// f_s·(g∘φ_{a^n} − L); the product is exact on coefficients ≤ N.
pub fn convergence_probe(g: &Analytic, s: Complex64, a: f64, n_max: usize, order: usize) -> Result<ConvergenceProbe> {
    check_a(a)?;
    if s.re < 0.0 {
        return Err(HardyError::OutOfRange(format!("need Re(s) >= 0, got {s}")));
    }
    let limit = limit_along_orbit(g, a, 60)?.limit;
    if limit.norm() < 1e-14 {
        return Err(HardyError::OutOfRange("limit along the orbit is zero".into()));
    }
    let fs = binomial_series(ComplexExponent(s), order);
    let mut window = order / 2;
    let mut residuals = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let t = a.powi(n as i32);
        let mut gn = if n == 0 { g.coefficients(order) } else { g.compose_affine(t).coefficients(order) };
        if !g.is_exact() && n > 0 {
            window = window.min(leakage_window(t, order, WINDOW_LEAKAGE));
        }
        let c0 = gn.coeff(0) - limit;
        let mut coeffs = gn.clone().into_coeffs();
        coeffs[0] = c0;
        gn = CoefficientFunction::new(coeffs);
        residuals.push(fs.multiply(&gn, order).window_norm(window));
    }
    let start = (2 * n_max) / 3;
    let mut ratios: Vec<f64> = residuals[start..]
        .windows(2)
        .filter(|p| p[0] > 0.0)
        .map(|p| p[1] / p[0])
        .collect();
    ratios.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ratio = (!ratios.is_empty()).then(|| ratios[ratios.len() / 2]);
    Ok(ConvergenceProbe { s, a, limit, residuals, ratio, window })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularInner {
    pub b: f64,
    pub coeffs: CoefficientFunction,
}

/// Coefficients of I_b(z) = exp(b(z+1)/(z−1)); b = 0 gives the constant 1.
pub fn singular_inner(b: f64, order: usize) -> Result<SingularInner> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(HardyError::OutOfRange(format!("need b >= 0, got {b}")));
    }
    Ok(SingularInner { b, coeffs: singular_inner_coefficients(b, order) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceResidual {
    /// e^{(b/a)(a−1)}
    pub factor: f64,
    pub residual: f64,
    /// Bound on the truncation contribution (|c_k(I_b)| ≤ 1).
    pub budget: f64,
    pub window: usize,
}

/// ‖P_J(C_{φ_a} I_b − e^{(b/a)(a−1)} I_{b/a})‖ on the leakage-free window.
pub fn singular_invariance_check(a: f64, b: f64, order: usize) -> Result<InvarianceResidual> {
    check_a(a)?;
    let ib = singular_inner(b, order)?;
    let iba = singular_inner(b / a, order)?;
    let factor = ((b / a) * (a - 1.0)).exp();
    let window = leakage_window(a, order, WINDOW_LEAKAGE);
    let g = affine_apply_rows(a, &ib.coeffs, window + 1);
    let residual = (0..=window)
        .map(|j| (g.coeff(j) - iba.coeffs.coeff(j) * factor).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let budget = (0..=window).map(|j| row_leakage(a, j, order).powi(2)).sum::<f64>().sqrt();
    Ok(InvarianceResidual { factor, residual, budget, window })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// distance(f, K_g at depth m) for m = 0..=depth.
    pub gaps: Vec<f64>,
    pub gap: f64,
    /// Smallest gap over the last ten depths.
    pub floor: f64,
    /// The last ten gaps never decrease by more than 1e−12.
    pub tail_non_decreasing: bool,
    pub rank: usize,
}

impl GapReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_series_csv(out, "depth", "gap", &self.gaps)
    }
}

/// distance(f, K_g) with g = C^{n0}_{φ_a} f, for every depth up to `depth`.
pub fn nonminimality_gap(f: &Analytic, a: f64, n0: usize, depth: usize, order: usize) -> Result<GapReport> {
    check_a(a)?;
    let g = if n0 == 0 { f.clone() } else { f.compose_affine(a.powi(n0 as i32)) };
    let fc = f.coefficients(order);
    let gaps = distance_profile(&fc, &g, a, depth, order)?;
    let basis = krylov_basis(&g, a, depth, order)?;
    let tail = &gaps[gaps.len().saturating_sub(10)..];
    let floor = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_non_decreasing = tail.windows(2).all(|p| p[1] >= p[0] - 1e-12);
    Ok(GapReport { gap: *gaps.last().unwrap(), gaps, floor, tail_non_decreasing, rank: basis.rank() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compop::affine_apply;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn krylov_ranks() {
        let b = krylov_basis(&Analytic::power(1.0), 0.5, 10, 32).unwrap();
        assert_eq!(b.rank(), 1);
        let f = Analytic::Sum(vec![Analytic::constant(c(1.0, 0.0)), Analytic::power(1.0)]);
        let b = krylov_basis(&f, 0.5, 10, 32).unwrap();
        assert_eq!(b.rank(), 2);
        let z2 = Analytic::Poly(CoefficientFunction::monomial(2, 2));
        let b = krylov_basis(&z2, 0.5, 10, 32).unwrap();
        assert_eq!(b.rank(), 3);
        assert!(b.gram_defect() < 1e-10);
    }

    #[test]
    fn krylov_basis_reconstructs_iterates() {
        let f = Analytic::Product(vec![Analytic::power(0.5), Analytic::exp(c(1.0, 0.0))]);
        let b = krylov_basis(&f, 0.5, 12, 128).unwrap();
        assert!(b.gram_defect() < 1e-10);
        for n in 0..=12 {
            let it = f.compose_affine(0.5f64.powi(n)).coefficients(128);
            assert!(distance(&it, &b) < 1e-8, "n={n}");
        }
    }

    #[test]
    fn distances() {
        let b = krylov_basis(&Analytic::constant(c(3.0, 0.0)), 0.5, 3, 8).unwrap();
        assert!(distance(&CoefficientFunction::constant(c(2.0, 0.0), 8), &b) < 1e-10);
        assert!((distance(&CoefficientFunction::identity(8), &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cyclic_subspace_of_a_polynomial_with_a_simple_zero() {
        // (1−z)(2−z) spans (1−z) and (1−z)^2 under C_{φ_a}
        let f = Analytic::Poly(CoefficientFunction::from_real(&[2.0, -3.0, 1.0]));
        let b = krylov_basis(&f, 0.5, 40, 64).unwrap();
        assert_eq!(b.rank(), 2);
        let f1 = binomial_series(ComplexExponent::real(1.0), 64);
        let f0 = binomial_series(ComplexExponent::real(0.0), 64);
        assert!(distance(&f1, &b) < 1e-10);
        assert!((distance(&f0, &b) - (1.0f64 / 3.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn limits_along_the_orbit() {
        let e = limit_along_orbit(&Analytic::exp(c(1.0, 0.0)), 0.5, 60).unwrap();
        assert!((e.limit - c(std::f64::consts::E, 0.0)).norm() < 1e-8);
        let seven = limit_along_orbit(&Analytic::constant(c(7.0, 0.0)), 0.5, 60).unwrap();
        assert_eq!(seven.limit, c(7.0, 0.0));
        // unimodular with a rotating phase
        assert!(matches!(limit_along_orbit(&Analytic::power(c(0.0, 1.0)), 0.5, 60), Err(HardyError::NoLimit)));
        // Aitken on a slowly converging orbit
        let slow = Analytic::Sum(vec![Analytic::constant(c(1.0, 0.0)), Analytic::power(0.05)]);
        let est = limit_along_orbit(&slow, 0.5, 30).unwrap();
        assert!(est.extrapolated && (est.limit - c(1.0, 0.0)).norm() < 1e-6, "{est:?}");
    }

    #[test]
    fn convergence_probes() {
        let p = convergence_probe(&Analytic::exp(c(1.0, 0.0)), c(0.0, 0.0), 0.5, 30, 256).unwrap();
        assert!((p.limit - c(std::f64::consts::E, 0.0)).norm() < 1e-8);
        assert!(p.residuals[25] < 1e-3);
        assert!((p.ratio.unwrap() - 0.5).abs() < 0.05);

        let p = convergence_probe(&Analytic::constant(c(2.0, 0.0)), c(1.0, 0.0), 0.5, 10, 64).unwrap();
        assert!(p.residuals.iter().all(|r| *r == 0.0));
        assert_eq!(p.ratio, None);

        let g = Analytic::Sum(vec![Analytic::constant(c(1.0, 0.0)), Analytic::power(0.25)]);
        let p = convergence_probe(&g, c(0.0, 0.0), 0.5, 40, 256).unwrap();
        assert!((p.ratio.unwrap() - 0.5f64.powf(0.25)).abs() < 0.01);
        assert!(p.residuals[40] < p.residuals[0] * 1e-2);
    }

    #[test]
    fn singular_inner_functions() {
        let i1 = singular_inner(1.0, 256).unwrap();
        assert!((i1.coeffs.coeff(0).re - 0.367879).abs() < 1e-6);
        for r in [0.0, 0.3, 0.6, 0.9, 0.99] {
            assert!(Analytic::singular_inner(1.0).value(c(r, 0.0)).norm() <= 1.0);
        }
        let v = i1.coeffs.evaluate(c(0.5, 0.0)).unwrap();
        assert!((v - c((-3f64).exp(), 0.0)).norm() < 1e-9);
        let i2 = singular_inner(2.0, 256).unwrap();
        let sq = i1.coeffs.multiply(&i1.coeffs, 256);
        assert!((&i2.coeffs - &sq).window_norm(128) < 1e-9);
        assert!(singular_inner(-1.0, 8).is_err());
        // three-term Laguerre recurrence as an independent oracle
        let b = 3.0;
        let n = 200;
        let mut l = vec![0.0f64; n + 1];
        l[0] = (-b as f64).exp();
        l[1] = -2.0 * b * l[0];
        for k in 1..n {
            let kf = k as f64;
            l[k + 1] = ((2.0 * kf - 2.0 * b) * l[k] - (kf - 1.0) * l[k - 1]) / (kf + 1.0);
        }
        let ib = singular_inner(b, n).unwrap();
        for (k, want) in l.iter().enumerate() {
            assert!((ib.coeffs.coeff(k).re - want).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_invariance() {
        let r = singular_invariance_check(0.5, 1.0, 512).unwrap();
        assert!((r.factor - (-1f64).exp()).abs() < 1e-15);
        assert!(r.residual < 1e-8);
        let r = singular_invariance_check(0.99, 1.0, 512).unwrap();
        assert!((r.factor - (1.0 - 0.0101)).abs() < 1e-4);
        assert!(r.residual < 1e-8);
        let r = singular_invariance_check(0.5, 0.0, 64).unwrap();
        assert_eq!((r.factor, r.residual), (1.0, 0.0));
    }

    #[test]
    fn gaps() {
        let rep = nonminimality_gap(&Analytic::power(1.0), 0.5, 1, 5, 64).unwrap();
        assert!(rep.gap < 1e-12);

        let f = Analytic::singular_inner(1.0);
        let rep = nonminimality_gap(&f, 0.5, 1, 0, 128).unwrap();
        let g = affine_apply(0.5, &f.coefficients(1024)).with_order(128);
        let fc = f.coefficients(128);
        let p = h2_inner(&fc, &g) / g.h2_norm_sq();
        let single = (&fc - &g.scale(p)).h2_norm() / fc.h2_norm();
        assert!((rep.gap - single).abs() < 1e-8, "{} vs {single}", rep.gap);
    }

    #[test]
    fn nesting_and_invariance() {
        let f = Analytic::Product(vec![Analytic::power(c(0.3, 0.2)), Analytic::exp(c(0.5, 0.0))]);
        let h = binomial_series(ComplexExponent::real(0.5), 96);
        let prof = distance_profile(&h, &f, 0.6, 15, 96).unwrap();
        assert!(prof.windows(2).all(|p| p[1] <= p[0] + 1e-12));

        // C maps span{C^n f : n ≤ 6} into span{C^n f : n ≤ 7}
        let bigger = krylov_basis(&f, 0.6, 7, 96).unwrap();
        let mut v = CoefficientFunction::zeros(1024);
        for n in 0..=6 {
            let w = c(1.0 / (n as f64 + 1.0), 0.3 * n as f64);
            v = &v + &f.compose_affine(0.6f64.powi(n)).coefficients(1024).scale(w);
        }
        let cv = affine_apply(0.6, &v).with_order(96);
        assert!(distance(&cv, &bigger) < 1e-9);
    }
}
