//! Nevanlinna counting function of a linear fractional self-map and the
//! change-of-variables identity ‖C_φf‖² = 2∫|f′|²N_φ dA + |f(φ(0))|².
//!
//! dA is normalized area measure on the disk (A(𝔻) = 1).

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compop::symbol_taylor;
use crate::error::{HardyError, Result};
use crate::moebius::{Domain, ExtendedPoint, MoebiusMap};
use crate::series::CoefficientFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingEvaluation {
    pub w: Complex64,
    pub value: f64,
    /// w = φ(0), where N_φ has a logarithmic singularity (value is +∞).
    pub singular: bool,
}

/// N_φ(w) = log(1/|φ⁻¹(w)|) when the preimage lies in 𝔻, else 0.
pub fn nevanlinna(m: &MoebiusMap, w: Complex64) -> Result<CountingEvaluation> {
    if w.norm() >= 1.0 {
        return Err(HardyError::OutsideDisk(w));
    }
    if m.domain != Domain::Disk {
        return Err(HardyError::WrongDomain { expected: "disk", found: "other" });
    }
    Ok(counting_value(&m.inverse(), w))
}

fn counting_value(inv: &MoebiusMap, w: Complex64) -> CountingEvaluation {
    match inv.apply(w) {
        ExtendedPoint::Finite(z) if z.norm() == 0.0 => CountingEvaluation { w, value: f64::INFINITY, singular: true },
        ExtendedPoint::Finite(z) if z.norm() < 1.0 => CountingEvaluation { w, value: -z.norm().ln(), singular: false },
        _ => CountingEvaluation { w, value: 0.0, singular: false },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarGrid {
    /// Gauss–Legendre nodes in s, with r = ρ_max(θ)s².
    pub radial: usize,
    /// Trapezoid nodes in θ.
    pub angular: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self { radial: 512, angular: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovReport {
    pub symbol: MoebiusMap,
    pub grid: PolarGrid,
    /// ‖C_φ f‖² from the truncated composition.
    pub lhs: f64,
    pub rhs: f64,
    /// 2∫|f′|²N_φ dA.
    pub area_term: f64,
    /// |f(φ(0))|².
    pub point_term: f64,
    pub defect: f64,
    /// rhs on the half-resolution grid.
    pub coarse_rhs: f64,
    pub converged: bool,
    pub measure: &'static str,
}

/// Coefficient order of f∘φ used for the left-hand side.
pub const LHS_ORDER: usize = 512;
/// Relative change of the rhs under grid halving that still counts as converged.
pub const COV_CONVERGENCE_TOL: f64 = 1e-6;

/// Sums in a fixed binary tree, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// f∘φ by Horner's rule on Taylor coefficients, truncated at `order`.
fn compose(m: &MoebiusMap, f: &CoefficientFunction, order: usize) -> Result<CoefficientFunction> {
    let phi = symbol_taylor(m, order)?;
    let deg = f.degree().unwrap_or(0);
    let mut g = CoefficientFunction::constant(f.coeff(deg), order);
    for k in (0..deg).rev() {
        g = g.multiply(&phi, order);
        let mut c = g.into_coeffs();
        c[0] += f.coeff(k);
        g = CoefficientFunction::new(c);
    }
    Ok(g)
}

fn area_integral(m: &MoebiusMap, df: &CoefficientFunction, grid: PolarGrid) -> f64 {
    let (center, radius) = m.image_disk();
    let p = m.eval(Complex64::new(0.0, 0.0));
    let d = p - center;
    let inv = m.inverse();
    let rule = GaussLegendre::new(NonZeroUsize::new(grid.radial.max(1)).unwrap());
    let nodes: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    let n_theta = grid.angular.max(1);
    let per_angle: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / n_theta as f64;
            let dir = Complex64::from_polar(1.0, theta);
            let beta = (d * dir.conj()).re;
            let rho = -beta + (beta * beta + radius * radius - d.norm_sqr()).max(0.0).sqrt();
            let terms: Vec<f64> = nodes
                .iter()
                .map(|&(s, w)| {
                    let r = rho * s * s;
                    let pt = p + dir * r;
                    let n = counting_value(&inv, pt).value;
                    if !n.is_finite() {
                        return 0.0;
                    }
                    // r dr = 2ρ²s³ ds
                    w * df.evaluate_extrapolated(pt).norm_sqr() * n * 2.0 * rho * rho * s * s * s
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    // dA = r dr dθ / π
    pairwise_sum(&per_angle) * (2.0 * PI / n_theta as f64) / PI
}

/// Both sides of the change-of-variables identity for a disk self-map.
pub fn change_of_variables_check(m: &MoebiusMap, f: &CoefficientFunction, grid: PolarGrid) -> Result<CovReport> {
    if m.domain != Domain::Disk {
        return Err(HardyError::WrongDomain { expected: "disk", found: "other" });
    }
    let lhs = compose(m, f, LHS_ORDER.max(f.order()))?.h2_norm_sq();
    let df = f.derivative();
    let point_term = f.evaluate(m.eval(Complex64::new(0.0, 0.0)))?.norm_sqr();
    let area = |g: PolarGrid| 2.0 * area_integral(m, &df, g);
    let area_term = area(grid);
    let coarse = PolarGrid { radial: (grid.radial / 2).max(1), angular: (grid.angular / 2).max(1) };
    let coarse_rhs = area(coarse) + point_term;
    let rhs = area_term + point_term;
    let defect = if lhs > 0.0 { (lhs - rhs).abs() / lhs } else { (lhs - rhs).abs() };
    let converged = (rhs - coarse_rhs).abs() <= COV_CONVERGENCE_TOL * rhs.abs().max(1.0);
    Ok(CovReport {
        symbol: *m,
        grid,
        lhs,
        rhs,
        area_term,
        point_term,
        defect,
        coarse_rhs,
        converged,
        measure: "normalized area, A(D) = 1",
    })
}
