//! Composition operators as dense matrices on the monomial basis.
//!
//! Column k holds the Taylor coefficients of w·φ^k truncated at degree N. For
//! the affine symbol φ_a(z) = az + 1 − a the entries are
//! C(k,j) a^j (1−a)^{k−j} (j ≤ k), generated by the Pascal recurrence
//! M[j][k] = (1−a) M[j][k−1] + a M[j−1][k−1].
//!
//! Truncation leaks: row j of C_{φ_a} draws on columns k ≈ j/a, so the high
//! rows of a truncated product are wrong. [`leakage_window`] returns the rows
//! whose missing mass Σ_{k>N} M[j][k] is negligible.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{HardyError, Result};
use crate::moebius::{Domain, MoebiusMap};
use crate::series::CoefficientFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default relative leakage admitted into a comparison window.
pub const WINDOW_LEAKAGE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Dense,
    /// M[j][k] = 0 for j > k (affine symbols).
    UpperTriangular,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub symbol: MoebiusMap,
    pub weight: Option<CoefficientFunction>,
    pub order: usize,
    pub structure: Structure,
}

impl OperatorMatrix {
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    /// Matrix–vector product. The result has order N; coefficients above the
    /// leakage window may carry truncation error.
    pub fn apply(&self, f: &CoefficientFunction) -> Result<CoefficientFunction> {
        apply(self, f)
    }

    /// Largest singular value of the truncation.
    pub fn operator_norm(&self) -> f64 {
        self.entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Explicit conjugate transpose.
    pub fn adjoint(&self) -> DMatrix<Complex64> {
        self.entries.adjoint()
    }

    /// Row-major CSV, one quoted "re,im" cell per entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for j in 0..=self.order {
            let row: Vec<String> = (0..=self.order)
                .map(|k| {
                    let e = self.entries[(j, k)];
                    format!("{:e},{:e}", e.re, e.im)
                })
                .collect();
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| HardyError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Taylor coefficients of (αz+β)/(γz+δ) for a map with its pole outside the closed disk.
pub fn symbol_taylor(m: &MoebiusMap, order: usize) -> Result<CoefficientFunction> {
    check_pole(m)?;
    let q = -m.gamma / m.delta;
    let mut geo = Complex64::new(1.0, 0.0) / m.delta;
    let mut out = vec![ZERO; order + 1];
    // (αz+β)·Σ q^k z^k / δ
    for k in 0..=order {
        out[k] += m.beta * geo;
        if k < order {
            out[k + 1] += m.alpha * geo;
        }
        geo *= q;
    }
    Ok(CoefficientFunction::new(out))
}

fn check_pole(m: &MoebiusMap) -> Result<()> {
    if m.delta.norm() <= m.gamma.norm() {
        return Err(HardyError::NotDiskSelfMap("pole of the symbol lies in the closed disk".into()));
    }
    Ok(())
}

/// Matrix of C_φ: column 0 = 1, column k = column_{k−1}·φ truncated at N.
pub fn build_matrix(m: &MoebiusMap, order: usize) -> Result<OperatorMatrix> {
    let mut op = weighted_matrix(m, &CoefficientFunction::constant(Complex64::new(1.0, 0.0), 0), order)?;
    op.weight = None;
    Ok(op)
}

/// Matrix of W f = w·(f∘φ): column k = w·φ^k.
pub fn weighted_matrix(m: &MoebiusMap, w: &CoefficientFunction, order: usize) -> Result<OperatorMatrix> {
    let taylor = symbol_taylor(m, order)?;
    let mut entries = DMatrix::from_element(order + 1, order + 1, ZERO);
    let mut col = w.with_order(order);
    for k in 0..=order {
        if k > 0 {
            col = col.multiply(&taylor, order);
        }
        for (j, &c) in col.coeffs().iter().enumerate() {
            entries[(j, k)] = c;
        }
    }
    let structure = if m.is_affine() && w.degree().unwrap_or(0) == 0 {
        Structure::UpperTriangular
    } else {
        Structure::Dense
    };
    Ok(OperatorMatrix { entries, symbol: *m, weight: Some(w.clone()), order, structure })
}

/// Closed-form matrix of C_{φ_a}, entries C(k,j) a^j (1−a)^{k−j}.
pub fn affine_matrix(a: f64, order: usize) -> Result<OperatorMatrix> {
    let symbol = MoebiusMap::disk_affine(a)?;
    let rows = affine_rows(a, order + 1, order);
    let entries = rows.map(|x| Complex64::new(x, 0.0));
    Ok(OperatorMatrix { entries, symbol, weight: None, order, structure: Structure::UpperTriangular })
}

/// Rows 0..rows of the affine matrix over columns 0..=order, as a real matrix.
/// Costs O(rows·N) since row j of column k only needs rows ≤ j of column k−1.
pub fn affine_rows(a: f64, rows: usize, order: usize) -> DMatrix<f64> {
    let rows = rows.min(order + 1);
    let mut m = DMatrix::zeros(rows, order + 1);
    let b = 1.0 - a;
    m[(0, 0)] = 1.0;
    for k in 1..=order {
        let top = (rows - 1).min(k);
        for j in (0..=top).rev() {
            let left = m[(j, k - 1)];
            let diag = if j > 0 { m[(j - 1, k - 1)] } else { 0.0 };
            m[(j, k)] = b * left + a * diag;
        }
    }
    m
}

pub fn apply(op: &OperatorMatrix, f: &CoefficientFunction) -> Result<CoefficientFunction> {
    if f.order() > op.order {
        return Err(HardyError::OutOfRange(format!(
            "function order {} exceeds operator order {}",
            f.order(),
            op.order
        )));
    }
    let n = op.order;
    let fc = f.coeffs();
    let mut out = vec![ZERO; n + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let start = if op.structure == Structure::UpperTriangular { j } else { 0 };
        let mut acc = ZERO;
        for k in start..fc.len() {
            acc += op.entries[(j, k)] * fc[k];
        }
        *o = acc;
    }
    Ok(CoefficientFunction::new(out))
}

/// Coefficients 0..rows of C_{φ_a} f without storing the matrix; rows = N+1 gives
/// the full truncated image. Columns are generated in place by the Pascal
/// recurrence, O(rows·N) work and O(rows) memory.
pub fn affine_apply_rows(a: f64, f: &CoefficientFunction, rows: usize) -> CoefficientFunction {
    let n = f.order();
    let rows = rows.min(n + 1).max(1);
    let b = 1.0 - a;
    let mut col = vec![0.0f64; rows];
    col[0] = 1.0;
    let mut out = vec![ZERO; rows];
    for (k, &fk) in f.coeffs().iter().enumerate() {
        if k > 0 {
            let top = (rows - 1).min(k);
            for j in (1..=top).rev() {
                col[j] = b * col[j] + a * col[j - 1];
            }
            col[0] *= b;
        }
        if fk != ZERO {
            for (o, &m) in out.iter_mut().zip(&col) {
                *o += fk * m;
            }
        }
    }
    CoefficientFunction::new(out)
}

/// C_{φ_a} f truncated at f's order.
pub fn affine_apply(a: f64, f: &CoefficientFunction) -> CoefficientFunction {
    affine_apply_rows(a, f, f.order() + 1)
}

/// C^n_{φ_a} f = C_{φ_{a^n}} f, one application of the a^n matrix.
pub fn iterate_apply(a: f64, f: &CoefficientFunction, n: u32) -> Result<CoefficientFunction> {
    if !(a > 0.0 && a < 1.0) {
        return Err(HardyError::OutOfRange(format!("affine disk symbol needs 0 < a < 1, got {a}")));
    }
    if n == 0 {
        return Ok(f.clone());
    }
    Ok(affine_apply(a.powi(n as i32), f))
}

/// Missing mass Σ_{k>N} C(k,j) a^j (1−a)^{k−j} of row j, computed in log space.
pub fn row_leakage(a: f64, j: usize, order: usize) -> f64 {
    let la = a.ln();
    let lb = (1.0 - a).ln();
    let k0 = order + 1;
    if j > k0 {
        return 0.0;
    }
    // ln C(k0, j)
    let mut lw: f64 = (1..=j).map(|i| ((k0 - j + i) as f64 / i as f64).ln()).sum();
    lw += j as f64 * la + (k0 - j) as f64 * lb;
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        let term = lw.exp();
        sum += term;
        let ratio_ln = ((k + 1) as f64 / (k + 1 - j) as f64).ln() + lb;
        if ratio_ln < 0.0 && (term < 1e-20 * sum || sum == 0.0 && lw < -745.0) {
            // geometric remainder once the terms decrease
            let r = ratio_ln.exp();
            sum += term * r / (1.0 - r);
            break;
        }
        lw += ratio_ln;
        k += 1;
        if k > k0 + 1_000_000 {
            break;
        }
    }
    sum
}

/// Largest J ≤ N/2 such that rows 0..=J of a truncated C_{φ_a} product leak at
/// most `tol` relative to the row mass 1/a.
pub fn leakage_window(a: f64, order: usize, tol: f64) -> usize {
    // the leaked mass grows with j, so bisect
    let ok = |j: usize| row_leakage(a, j, order) * a <= tol;
    let cap = order / 2;
    if ok(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (0, cap);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Matrix of multiplication by w on polynomials of degree ≤ N.
pub fn multiplication_matrix(w: &CoefficientFunction, order: usize) -> Result<OperatorMatrix> {
    weighted_matrix(&MoebiusMap::identity(Domain::Disk), w, order)
}
