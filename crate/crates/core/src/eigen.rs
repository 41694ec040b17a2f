//! Eigenvectors of C_{φ_a} and the dynamics they induce.
//!
//! f_s(z) = (1−z)^s satisfies C_{φ_a} f_s = a^s f_s, and lies in H² iff
//! Re(s) > −1/2, so every 0 < |λ| < a^{−1/2} is an eigenvalue. This module
//! checks that relation at finite truncation, inverts λ ↦ s, scans
//! A_f = {a : f is a C_{φ_a} eigenvector}, and follows orbits toward 1.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Analytic;
use crate::compop::{affine_apply_rows, leakage_window, row_leakage, WINDOW_LEAKAGE};
use crate::error::{HardyError, Result};
use crate::series::{binomial_series, tail_bound, BinomialCoefficients, CoefficientFunction, ComplexExponent};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(HardyError::OutOfRange(format!("need 0 < a < 1, got {a}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub a: f64,
    pub s: Complex64,
    pub lambda: Complex64,
    pub f: CoefficientFunction,
}

impl EigenPair {
    pub fn new(a: f64, s: Complex64, order: usize) -> Result<Self> {
        check_a(a)?;
        if s.re <= -0.5 {
            return Err(HardyError::NotInHardySpace(s));
        }
        Ok(Self { a, s, lambda: (s * a.ln()).exp(), f: binomial_series(ComplexExponent(s), order) })
    }

    pub fn from_lambda(a: f64, lambda: Complex64, order: usize) -> Result<Self> {
        Self::new(a, branch_exponent(a, lambda)?, order)
    }

    pub fn closed_form(&self) -> Analytic {
        Analytic::power(self.s)
    }
}

/// Residual of an eigen-relation on the leakage-free window, with the bound on
/// what the truncated tail could contribute there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    /// ‖P_J (C f − λ f)‖ over rows 0..=J.
    pub window_residual: f64,
    /// Bound on the contribution of the discarded coefficients k > N to those rows.
    pub budget: f64,
    pub combined: f64,
    pub window: usize,
}

impl EigenResidual {
    pub fn passes(&self, tol: f64) -> bool {
        self.window_residual <= tol + self.budget
    }
}

/// sup_{k>N} |c_k(f_s)|, sampled out to 16N where the coefficients decrease.
pub fn binomial_tail_sup(s: ComplexExponent, order: usize) -> f64 {
    BinomialCoefficients::new(s)
        .take(16 * order.max(1) + 1)
        .skip(order + 1)
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

fn window_residual(a: f64, f: &CoefficientFunction, mu: Complex64, tail_sq: f64, tail_sup: f64) -> EigenResidual {
    let n = f.order();
    let window = leakage_window(a, n, WINDOW_LEAKAGE);
    let g = affine_apply_rows(a, f, window + 1);
    let res = (0..=window)
        .map(|j| (g.coeff(j) - mu * f.coeff(j)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let leak = (0..=window).map(|j| row_leakage(a, j, n).powi(2)).sum::<f64>().sqrt() * tail_sup;
    let budget = leak.min(tail_sq.sqrt() / a.sqrt());
    EigenResidual { window_residual: res, budget, combined: res + budget, window }
}

/// Eigen-relation C_{φ_a} f_s = a^s f_s at truncation N.
pub fn eigen_residual(a: f64, s: Complex64, order: usize) -> Result<EigenResidual> {
    let pair = EigenPair::new(a, s, order)?;
    let cs = ComplexExponent(s);
    Ok(window_residual(a, &pair.f, pair.lambda, tail_bound(cs, order)?, binomial_tail_sup(cs, order)))
}

/// C_{φ_a} f_s′ = (λ/a) f_s′, using f_s′ = −s f_{s−1}; needs Re(s) > 1/2.
pub fn derivative_residual(a: f64, s: Complex64, order: usize) -> Result<EigenResidual> {
    check_a(a)?;
    let sm1 = ComplexExponent(s - 1.0);
    if !sm1.in_hardy_space() {
        return Err(HardyError::NotInHardySpace(s - 1.0));
    }
    let df = binomial_series(sm1, order).scale(-s);
    let mu = (s * a.ln()).exp() / a;
    let tail_sq = s.norm_sqr() * tail_bound(sm1, order)?;
    let sup = s.norm() * binomial_tail_sup(sm1, order);
    Ok(window_residual(a, &df, mu, tail_sq, sup))
}

/// s = log λ / log a on the principal branch, so λ = a^s and Re(s) > −1/2.
pub fn branch_exponent(a: f64, lambda: Complex64) -> Result<Complex64> {
    check_a(a)?;
    let radius = a.powf(-0.5);
    if lambda == ZERO || lambda.norm() >= radius {
        return Err(HardyError::OutsideEigenRegion { lambda, radius });
    }
    Ok(lambda.ln() / a.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub lambda: Complex64,
    pub s: Complex64,
    pub residual: EigenResidual,
    pub pass: bool,
}

/// Polar λ-grid over r_min ≤ |λ| ≤ frac·a^{−1/2}, each point inverted and
/// checked against the eigen-relation.
pub fn spectrum_sample(a: f64, n_radii: usize, n_angles: usize, r_min: f64, frac: f64, order: usize, tol: f64) -> Result<Vec<SpectrumPoint>> {
    check_a(a)?;
    let r_max = frac * a.powf(-0.5);
    let pts: Vec<Complex64> = (0..n_radii)
        .flat_map(|i| {
            let r = if n_radii == 1 { r_min } else { r_min + (r_max - r_min) * i as f64 / (n_radii - 1) as f64 };
            (0..n_angles).map(move |k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n_angles as f64))
        })
        .collect();
    pts.par_iter()
        .map(|&lambda| {
            let s = branch_exponent(a, lambda)?;
            let residual = eigen_residual(a, s, order)?;
            Ok(SpectrumPoint { lambda, s, residual, pass: residual.passes(tol) })
        })
        .collect()
}

/// Smallest comparison window afscan accepts.
pub const AFSCAN_MIN_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfScanResult {
    pub grid: Vec<f64>,
    /// sin² of the angle between f and C_{φ_a} f at each grid point (NaN if unresolved).
    pub misalignment: Vec<f64>,
    pub hits: Vec<f64>,
    /// Hits refined by golden-section search on the misalignment.
    pub refined_hits: Vec<f64>,
    /// Grid points whose leakage-free window is too short to judge.
    pub unresolved: Vec<f64>,
    pub fitted_c: Option<f64>,
    /// Every resolved grid point is a hit.
    pub full_interval: bool,
    /// Every hit lies within grid spacing of a power of fitted_c.
    pub hits_on_powers: bool,
    pub tol: f64,
}

/// Grid i/m for spacing 1/m, from 0.1 to 0.95. Using i/m keeps dyadic points exact.
pub fn afscan_grid(spacing: f64) -> Vec<f64> {
    let m = (1.0 / spacing).round() as usize;
    let lo = (0.1 * m as f64).ceil() as usize;
    let hi = (0.95 * m as f64).floor() as usize;
    (lo..=hi).map(|i| i as f64 / m as f64).collect()
}

/// sin² of the angle between f and C_{φ_a} f on the leakage-free window, after
/// dividing each coefficient by max(|f_j|, 1e−12·max|f|). The rescaling keeps a
/// few large coefficients from masking disagreement in the rest.
pub fn misalignment(f: &CoefficientFunction, a: f64) -> Option<f64> {
    let n = f.order();
    let window = leakage_window(a, n, WINDOW_LEAKAGE);
    if window < AFSCAN_MIN_WINDOW {
        return None;
    }
    let g = affine_apply_rows(a, f, window + 1);
    let fmax = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * fmax;
    let (mut uu, mut vv, mut uv) = (0.0, 0.0, ZERO);
    let mut u = Vec::with_capacity(window + 1);
    let mut v = Vec::with_capacity(window + 1);
    for j in 0..=window {
        let scale = f.coeff(j).norm().max(floor);
        let (x, y) = (f.coeff(j) / scale, g.coeff(j) / scale);
        uu += x.norm_sqr();
        vv += y.norm_sqr();
        uv += y * x.conj();
        u.push(x);
        v.push(y);
    }
    if vv == 0.0 || uu == 0.0 {
        return Some(if vv == 0.0 && uu == 0.0 { 0.0 } else { 1.0 });
    }
    let mu = uv / uu;
    let perp: f64 = u.iter().zip(&v).map(|(x, y)| (y - mu * x).norm_sqr()).sum();
    Some((perp / vv).min(1.0))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Scans A_f over a grid of a values.
pub fn afscan(f: &CoefficientFunction, grid: &[f64], tol: f64) -> Result<AfScanResult> {
    if f.is_zero() {
        return Err(HardyError::OutOfRange("afscan needs f != 0".into()));
    }
    for &a in grid {
        check_a(a)?;
    }
    let mis: Vec<Option<f64>> = grid.par_iter().map(|&a| misalignment(f, a)).collect();
    let spacing = grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min);
    let spacing = if spacing.is_finite() { spacing } else { 1e-3 };

    let mut hits = Vec::new();
    let mut unresolved = Vec::new();
    for (&a, m) in grid.iter().zip(&mis) {
        match m {
            None => unresolved.push(a),
            Some(x) if *x <= tol => hits.push(a),
            _ => {}
        }
    }
    let resolved = grid.len() - unresolved.len();
    let full_interval = resolved > 0 && hits.len() == resolved;

    let refined_hits: Vec<f64> = if full_interval {
        hits.clone()
    } else {
        hits.par_iter()
            .map(|&h| {
                let lo = (h - spacing).max(1e-6);
                let hi = (h + spacing).min(1.0 - 1e-9);
                let x = golden_min(|a| misalignment(f, a).unwrap_or(1.0), lo, hi, 1e-13);
                if misalignment(f, x).unwrap_or(1.0) <= misalignment(f, h).unwrap_or(1.0) { x } else { h }
            })
            .collect()
    };

    let fitted_c = if full_interval { None } else { refined_hits.iter().copied().reduce(f64::max) };
    let hits_on_powers = match fitted_c {
        None => true,
        Some(c) => refined_hits.iter().all(|&h| {
            let n = (h.ln() / c.ln()).round().max(1.0) as i32;
            (c.powi(n) - h).abs() <= spacing
        }),
    };
    Ok(AfScanResult {
        grid: grid.to_vec(),
        misalignment: mis.into_iter().map(|m| m.unwrap_or(f64::NAN)).collect(),
        hits,
        refined_hits,
        unresolved,
        fitted_c,
        full_interval,
        hits_on_powers,
        tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitThresholds {
    pub zero: f64,
    pub blowup: f64,
    pub cauchy: f64,
    /// ρ must differ from 1 by more than this to count as geometric decay or growth.
    pub ratio_margin: f64,
}

impl Default for OrbitThresholds {
    fn default() -> Self {
        Self { zero: 1e-6, blowup: 1e6, cauchy: 1e-8, ratio_margin: 1e-6 }
    }
}

impl OrbitThresholds {
    pub fn scaled(self, k: f64) -> Self {
        Self { zero: self.zero * k, blowup: self.blowup / k, cauchy: self.cauchy * k, ratio_margin: self.ratio_margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitVerdict {
    LimitZero,
    LimitFinite { limit: Complex64 },
    Diverges,
    Oscillates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub w: Complex64,
    pub a: f64,
    /// f(φ_{a^n}(w)) for n = 0..=n_max.
    pub values: Vec<Complex64>,
    pub verdict: OrbitVerdict,
    /// Geometric ratio of |values| over the last half, when the fit is consistent.
    pub fitted_ratio: Option<f64>,
    /// Every value is zero up to cancellation error in its summands.
    pub zero_orbit: bool,
    /// A truncated series was sampled beyond its trust radius.
    pub low_confidence: bool,
}

impl OrbitTrace {
    /// CSV rows (n, re, im, modulus).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "re", "im", "modulus"])?;
        for (n, v) in self.values.iter().enumerate() {
            w.write_record(&[n.to_string(), v.re.to_string(), v.im.to_string(), v.norm().to_string()])?;
        }
        w.flush().map_err(|e| HardyError::Csv(e.to_string()))?;
        Ok(())
    }

    /// max_n |v_{n+1} − λ v_n| / (|λ|·|v_n|) over nonzero v_n.
    pub fn recursion_defect(&self, lambda: Complex64) -> f64 {
        self.values
            .windows(2)
            .filter(|p| p[0] != ZERO)
            .map(|p| (p[1] - lambda * p[0]).norm() / (lambda.norm() * p[0].norm()))
            .fold(0.0, f64::max)
    }
}

/// Least-squares slope of ln|v_n| and the largest deviation from the line.
fn log_fit(values: &[(usize, f64)]) -> Option<(f64, f64)> {
    if values.len() < 3 {
        return None;
    }
    let m = values.len() as f64;
    let (sx, sy) = values.iter().fold((0.0, 0.0), |(sx, sy), &(n, y)| (sx + n as f64, sy + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(n, y) in values {
        sxx += (n as f64 - mx).powi(2);
        sxy += (n as f64 - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let dev = values
        .iter()
        .map(|&(n, y)| (y - (my + slope * (n as f64 - mx))).abs())
        .fold(0.0, f64::max);
    Some((slope, dev))
}

/// Values f(a^n w + 1 − a^n) for n = 0..=n_max, classified by their behaviour.
pub fn orbit_trace(f: &Analytic, w: Complex64, a: f64, n_max: usize, th: &OrbitThresholds) -> Result<OrbitTrace> {
    check_a(a)?;
    if w.norm() >= 1.0 {
        return Err(HardyError::OutsideDisk(w));
    }
    let u0 = ONE - w;
    let mut values = Vec::with_capacity(n_max + 1);
    let mut zero_orbit = true;
    let mut low_confidence = false;
    for n in 0..=n_max {
        let u = u0 * a.powi(n as i32);
        let v = f.value_at_one_minus(u);
        let mag = f.magnitude_at_one_minus(u);
        if !(v.norm() <= 1e-12 * mag || v == ZERO) {
            zero_orbit = false;
        }
        if !f.trusted_at(ONE - u) {
            low_confidence = true;
        }
        values.push(v);
    }

    let half: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .skip(n_max / 2)
        .filter(|(_, v)| v.norm() > 0.0 && v.norm().is_finite())
        .map(|(n, v)| (n, v.norm().ln()))
        .collect();
    let fitted_ratio = log_fit(&half).and_then(|(slope, dev)| (dev < 1e-3).then_some(slope.exp()));
    let last = values[n_max];
    let prev = if n_max > 0 { values[n_max - 1] } else { last };

    let verdict = if zero_orbit
        || fitted_ratio.is_some_and(|r| r < 1.0 - th.ratio_margin) || (last.norm() < th.zero && last.norm() <= prev.norm())
    {
        OrbitVerdict::LimitZero
    } else if fitted_ratio.is_some_and(|r| r > 1.0 + th.ratio_margin) || last.norm() > th.blowup || !last.norm().is_finite() {
        OrbitVerdict::Diverges
    } else if (last - prev).norm() < th.cauchy {
        OrbitVerdict::LimitFinite { limit: last }
    } else {
        OrbitVerdict::Oscillates
    };
    Ok(OrbitTrace { w, a, values, verdict, fitted_ratio, zero_orbit, low_confidence })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSearch {
    /// Smallest 1 − x examined; the zeros accumulate at x = 1.
    pub u_min: f64,
    pub points: usize,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self { u_min: 1e-4, points: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroOrbitVerdict {
    NoZeros,
    SingleOrbit,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroOrbitReport {
    /// Zeros found on (−1, 1), ascending.
    pub zeros: Vec<f64>,
    /// 1 − a^{m+1/2} for every integer m with the point in range.
    pub expected: Vec<f64>,
    pub max_mismatch: f64,
    /// |h(φ_a(z_m))| for each zero found.
    pub closure_residuals: Vec<f64>,
    /// Largest |z_{m+1} − φ_a(z_m)| over consecutive zeros.
    pub orbit_step_defect: f64,
    /// The smallest zero has no φ_a-preimage in (−1, 1).
    pub first_has_no_predecessor: bool,
    pub verdict: ZeroOrbitVerdict,
}

/// Real zeros of a closed-form h on (−1, 1) down to 1 − x = u_min, compared
/// with the single φ_a-orbit {1 − a^{m+1/2}}.
pub fn zero_orbit_check(h: &Analytic, a: f64, search: &ZeroSearch) -> Result<ZeroOrbitReport> {
    check_a(a)?;
    if !h.is_exact() {
        return Err(HardyError::OutOfRange("zero search needs a closed-form function".into()));
    }
    let eval = |t: f64| h.value_at_one_minus(Complex64::new(t.exp(), 0.0));
    let t_lo = (0.9 * search.u_min).ln();
    let t_hi = (2.0f64 * (1.0 - 1e-12)).ln();
    let n = search.points.max(16);
    let ts: Vec<f64> = (0..n).map(|i| t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<Complex64> = ts.iter().map(|&t| eval(t)).collect();

    let mut us = Vec::new();
    for i in 1..n - 1 {
        let (l, m, r) = (vals[i - 1].norm(), vals[i].norm(), vals[i + 1].norm());
        if !(m <= l && m <= r) {
            continue;
        }
        let d = vals[i + 1] - vals[i - 1];
        let side = |t: f64| (eval(t) * d.conj()).re;
        let (mut lo, mut hi) = (ts[i - 1], ts[i + 1]);
        let (flo, fhi) = (side(lo), side(hi));
        if flo == 0.0 || fhi == 0.0 || flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if side(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let u = t.exp();
        let scale = h.magnitude_at_one_minus(Complex64::new(u, 0.0)).max(1.0);
        if eval(t).norm() < 1e-10 * scale && u >= search.u_min && u < 2.0 {
            us.push(u);
        }
    }
    us.sort_by(|x, y| y.partial_cmp(x).unwrap());
    us.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let zeros: Vec<f64> = us.iter().map(|u| 1.0 - u).collect();

    // a^{m+1/2} ∈ [u_min, 2)
    let la = a.ln();
    let m_lo = ((2f64.ln() / la) - 0.5).floor() as i64 + 1;
    let m_hi = ((search.u_min.ln() / la) - 0.5).floor() as i64;
    let expected: Vec<f64> = (m_lo..=m_hi)
        .map(|m| 1.0 - a.powf(m as f64 + 0.5))
        .filter(|x| *x > -1.0 && *x < 1.0)
        .collect();

    let closure_residuals: Vec<f64> = us
        .iter()
        .map(|&u| h.value_at_one_minus(Complex64::new(a * u, 0.0)).norm())
        .collect();
    let orbit_step_defect = zeros
        .windows(2)
        .map(|p| (p[1] - (a * p[0] + 1.0 - a)).abs())
        .fold(0.0, f64::max);
    let first_has_no_predecessor = zeros.first().is_none_or(|&z| {
        let pre = (z - (1.0 - a)) / a;
        pre <= -1.0
    });

    let max_mismatch = if zeros.len() == expected.len() {
        zeros.iter().zip(&expected).map(|(z, e)| (z - e).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let verdict = if zeros.is_empty() {
        ZeroOrbitVerdict::NoZeros
    } else if max_mismatch <= 1e-10
        && orbit_step_defect <= 1e-10
        && first_has_no_predecessor
        && closure_residuals.iter().all(|r| *r < 1e-10)
    {
        ZeroOrbitVerdict::SingleOrbit
    } else {
        ZeroOrbitVerdict::Mismatch
    };
    Ok(ZeroOrbitReport {
        zeros,
        expected,
        max_mismatch,
        closure_residuals,
        orbit_step_defect,
        first_has_no_predecessor,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub value: Complex64,
    /// Least n with z in the disk of center 1 − a^{−n} and radius a^{−n}.
    pub n: u32,
}

/// Extends an eigenvector f (C_{φ_a} f = λ f) to Re z < 1 via f(z) = f(φ_{a^n}(z))/λ^n.
pub fn continue_analytically(f: &Analytic, lambda: Complex64, a: f64, z: Complex64) -> Result<Continuation> {
    check_a(a)?;
    if lambda == ZERO {
        return Err(HardyError::OutOfRange("continuation needs lambda != 0".into()));
    }
    if z.re >= 1.0 {
        return Err(HardyError::OutOfRange(format!("continuation needs Re(z) < 1, got {z}")));
    }
    let u = ONE - z;
    let mut n = 0u32;
    loop {
        let r = a.powi(-(n as i32));
        // |z − (1 − r)| < r  ⇔  |u − r| < r
        if (u - r).norm() < r {
            break;
        }
        n += 1;
        if n > 10_000 {
            return Err(HardyError::OutOfRange(format!("{z} too close to Re(z) = 1")));
        }
    }
    let an = a.powi(n as i32);
    let value = f.value_at_one_minus(u * an) / lambda.powu(n);
    Ok(Continuation { value, n })
}
