//! The half-plane side: Laplace transform on a geometric time grid, the
//! dilation operator (Wf)(t) = a⁻¹e^{−bt/a}f(t/a), and its weighted bilateral
//! shift model on ℓ²(ℤ, L²(cell)).

use std::f64::consts::PI;
use std::io::Write;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const DEFAULT_T_MIN: f64 = 1e-18;
pub const DEFAULT_T_MAX: f64 = 80.0;
pub const DEFAULT_WINDOW: usize = 40;
/// Laplace integrand magnitude at T_max above which a transform is flagged.
pub const DECAY_WARNING: f64 = 1e-12;
/// Singular values below this count towards the kernel proxy.
pub const KERNEL_SV_TOL: f64 = 1e-8;

/// Samples f(t_j) on t_j = q^j, j = start, start+1, ….
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineGrid {
    pub ratio: f64,
    pub start: i64,
    pub samples: Vec<Complex64>,
}

impl HalfLineGrid {
    pub fn new(ratio: f64, start: i64, samples: Vec<Complex64>) -> Result<Self> {
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(HardyError::OutOfRange(format!("grid ratio must exceed 1, got {ratio}")));
        }
        Ok(Self { ratio, start, samples })
    }

    /// Samples f on the q-geometric grid covering [t_min, t_max].
    pub fn sample(f: impl Fn(f64) -> Complex64, ratio: f64, t_min: f64, t_max: f64) -> Result<Self> {
        if !(ratio > 1.0) || !(t_min > 0.0) || !(t_max > t_min) {
            return Err(HardyError::OutOfRange(format!(
                "need ratio > 1 and 0 < t_min < t_max, got {ratio}, {t_min}, {t_max}"
            )));
        }
        let lq = ratio.ln();
        let j0 = (t_min.ln() / lq).floor() as i64;
        let j1 = (t_max.ln() / lq).ceil() as i64;
        let samples = (j0..=j1).map(|j| f((j as f64 * lq).exp())).collect();
        Ok(Self { ratio, start: j0, samples })
    }

    /// Grid whose ratio is max(a, 1/a)^{1/k}, so that t ↦ t/a is an index shift.
    pub fn for_dilation(f: impl Fn(f64) -> Complex64, a: f64, k: usize) -> Result<Self> {
        Self::sample(f, dilation_ratio(a, k)?, DEFAULT_T_MIN, DEFAULT_T_MAX)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.ratio.ln()
    }

    /// t at global index j.
    pub fn t(&self, j: i64) -> f64 {
        (j as f64 * self.step()).exp()
    }

    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64 - 1
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.end())
    }

    pub fn at(&self, j: i64) -> Complex64 {
        if j < self.start || j > self.end() {
            ZERO
        } else {
            self.samples[(j - self.start) as usize]
        }
    }

    /// ∫ g(t) dt by the trapezoid rule in x = ln t.
    fn integrate(&self, g: impl Fn(i64, f64, Complex64) -> Complex64) -> Complex64 {
        let h = self.step();
        let last = self.samples.len().saturating_sub(1);
        let mut acc = ZERO;
        for (i, v) in self.samples.iter().enumerate() {
            let j = self.start + i as i64;
            let t = self.t(j);
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            acc += g(j, t, *v) * (w * t);
        }
        acc * h
    }

    /// ‖f‖²_{L²(ℝ₊)} by quadrature.
    pub fn norm_sq(&self) -> f64 {
        self.integrate(|_, _, v| Complex64::new(v.norm_sqr(), 0.0)).re
    }

    /// Every other point (ratio q²).
    pub fn coarsen(&self) -> Self {
        let skip = self.start.rem_euclid(2) as usize;
        let samples = self.samples.iter().skip(skip).step_by(2).copied().collect();
        Self { ratio: self.ratio * self.ratio, start: (self.start + skip as i64) / 2, samples }
    }
}

pub fn dilation_ratio(a: f64, k: usize) -> Result<f64> {
    if !(a > 0.0) || a == 1.0 || k == 0 {
        return Err(HardyError::OutOfRange(format!("need a > 0, a != 1 and k >= 1, got a = {a}, k = {k}")));
    }
    Ok(a.max(1.0 / a).powf(1.0 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laplace {
    pub value: Complex64,
    /// |T_h − T_{2h}|.
    pub error_estimate: f64,
    /// The integrand has not decayed below the warning level by T_max.
    pub decay_warning: bool,
}

/// (Pf)(w) = ∫₀^∞ f(t)e^{−tw} dt on the grid.
pub fn paley_wiener(f: &HalfLineGrid, w: Complex64) -> Result<Laplace> {
    if !(w.re > 0.0) {
        return Err(HardyError::OutOfRange(format!("need Re(w) > 0, got {w}")));
    }
    let kernel = |_: i64, t: f64, v: Complex64| v * (-w * t).exp();
    let value = f.integrate(kernel);
    let coarse = f.coarsen().integrate(kernel);
    let tm = f.t_max();
    let tail = f.at(f.end()).norm() * (-tm * w.re).exp() * tm;
    Ok(Laplace { value, error_estimate: (value - coarse).norm(), decay_warning: tail > DECAY_WARNING })
}

/// (1/2π)∫|F(x+iy)|² dy, with y = tan θ and Gauss–Legendre in θ.
pub fn h2_halfplane_norm_sq(big_f: impl Fn(Complex64) -> Complex64, x: f64, degree: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(degree.max(1)).unwrap());
    rule.integrate(-PI / 2.0, PI / 2.0, |th| {
        let c = th.cos();
        big_f(Complex64::new(x, th.tan())).norm_sqr() / (c * c)
    }) / (2.0 * PI)
}

/// Wf on the dilated grid; needs a to be an integer power of the grid ratio.
pub fn w_operator(f: &HalfLineGrid, a: f64, b: Complex64) -> Result<HalfLineGrid> {
    if !(a > 0.0) {
        return Err(HardyError::OutOfRange(format!("need a > 0, got {a}")));
    }
    let m = dilation_index(a, f.ratio)?;
    let start = f.start + m;
    let samples = f
        .samples
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = f.t(start + i as i64);
            v * (-b * t / a).exp() / a
        })
        .collect();
    Ok(HalfLineGrid { ratio: f.ratio, start, samples })
}

/// m with a = q^m.
fn dilation_index(a: f64, q: f64) -> Result<i64> {
    let m = a.ln() / q.ln();
    if (m - m.round()).abs() > 1e-9 {
        return Err(HardyError::OutOfRange(format!("dilation {a} is not an integer power of the grid ratio {q}")));
    }
    Ok(m.round() as i64)
}

/// Weighted left bilateral shift (Tg)_n = c_n g_{n+1} on ℓ²(ℤ, L²(cell)),
/// c_n(t) = a^{−1/2}exp(−Re(b)a^{−n−1}t), cell [1, a] or [a, 1].
///
/// Reports use the right-shift orientation with reversed weights
/// k_ñ = c_{−ñ}; `tail_minus`/`tail_plus` are the limits of k_ñ as ñ → ∓∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftModel {
    pub a: f64,
    pub b: Complex64,
    pub window: usize,
    pub cell_points: usize,
    /// Cell nodes t_k = q^k, q = max(a, 1/a)^{1/K}.
    pub cell: Vec<f64>,
    /// First cell index (0 for a > 1, −K for a < 1).
    pub cell_start: i64,
    /// c_n on the cell for n = −M..=M.
    pub weights: Vec<Vec<f64>>,
    pub tail_minus: f64,
    pub tail_plus: f64,
    /// Re(b) = 0: constant weights, no point spectrum.
    pub degenerate: bool,
}

pub fn build_shift_model(a: f64, b: Complex64, window: usize, cell_points: usize) -> Result<ShiftModel> {
    let q = dilation_ratio(a, cell_points)?;
    if b.re < 0.0 {
        return Err(HardyError::OutOfRange(format!("need Re(b) >= 0, got {b}")));
    }
    let k = cell_points as i64;
    let cell_start = if a > 1.0 { 0 } else { -k };
    let cell: Vec<f64> = (cell_start..=cell_start + k).map(|j| (j as f64 * q.ln()).exp()).collect();
    let r = a.powf(-0.5);
    let degenerate = b.re == 0.0;
    let (tail_minus, tail_plus) = match (degenerate, a > 1.0) {
        (true, _) => (r, r),
        (false, true) => (r, 0.0),
        (false, false) => (0.0, r),
    };
    let mut model = ShiftModel {
        a,
        b,
        window,
        cell_points,
        cell,
        cell_start,
        weights: Vec::new(),
        tail_minus,
        tail_plus,
        degenerate,
    };
    let w = window as i64;
    model.weights = (-w..=w).map(|n| model.cell.iter().map(|t| model.weight(n, *t)).collect()).collect();
    Ok(model)
}

impl ShiftModel {
    pub fn ratio(&self) -> f64 {
        (self.cell[1] / self.cell[0]).max(self.cell[0] / self.cell[1])
    }

    /// c_n(t), left orientation.
    pub fn weight(&self, n: i64, t: f64) -> f64 {
        self.a.powf(-0.5) * (-self.b.re * self.a.powf(-(n as f64) - 1.0) * t).exp()
    }

    /// k_n(t) = c_{−n}(t), right orientation.
    pub fn reversed_weight(&self, n: i64, t: f64) -> f64 {
        self.weight(-n, t)
    }

    /// Unimodular phase a_n(t) of the block map.
    pub fn phase(&self, n: i64, t: f64) -> Complex64 {
        let (a, ib) = (self.a, self.b.im);
        let geometric = |r: f64, terms: i64| -> f64 {
            if (r - 1.0).abs() < 1e-15 {
                terms as f64
            } else {
                (1.0 - r.powi(terms as i32)) / (1.0 - r)
            }
        };
        let theta = if n >= 0 {
            -t * ib * geometric(1.0 / a, n + 1)
        } else {
            -t * ib + t * ib * geometric(a, -n)
        };
        Complex64::from_polar(1.0, theta)
    }

    fn cell_weights(&self) -> Vec<f64> {
        let h = self.ratio().ln();
        let last = self.cell.len() - 1;
        self.cell
            .iter()
            .enumerate()
            .map(|(i, t)| if i == 0 || i == last { 0.5 * h * t } else { h * t })
            .collect()
    }

    /// ‖x‖²_{L²(cell)} by the log-variable trapezoid.
    pub fn cell_norm_sq(&self, x: &[Complex64]) -> f64 {
        self.cell_weights().iter().zip(x).map(|(w, v)| w * v.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftVerdict {
    Eigenvector,
    NotEigenvalue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEigen {
    pub lambda: Complex64,
    /// x_n for n = −M..=M (right orientation).
    pub blocks: Vec<Vec<Complex64>>,
    pub block_norms: Vec<f64>,
    pub residual: f64,
    /// Median ‖x_n‖/‖x_{n+1}‖ over the outer half of the negative side.
    pub ratio_minus: f64,
    /// Median ‖x_n‖/‖x_{n−1}‖ over the outer half of the positive side.
    pub ratio_plus: f64,
    pub expected_minus: f64,
    pub expected_plus: f64,
    pub verdict: ShiftVerdict,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|x, y| x.total_cmp(y));
    Some(v[v.len() / 2])
}

fn tail_ratio(norms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut ratios = Vec::new();
    for (outer, inner) in norms {
        if !outer.is_finite() || !inner.is_finite() {
            return f64::INFINITY;
        }
        if inner > 0.0 {
            ratios.push(outer / inner);
        }
    }
    median(ratios).unwrap_or(0.0)
}

/// Solves (T̃x)_n = k_n x_{n−1} = λx_n from x_0 on the window.
pub fn shift_eigenvector(model: &ShiftModel, lambda: Complex64, x0: &[Complex64]) -> Result<ShiftEigen> {
    if lambda == ZERO {
        return Err(HardyError::OutOfRange("λ = 0 is excluded".into()));
    }
    if x0.len() != model.cell.len() {
        return Err(HardyError::OutOfRange(format!("x0 needs {} cell values", model.cell.len())));
    }
    let m = model.window as i64;
    let idx = |n: i64| (n + m) as usize;
    let mut blocks = vec![vec![ZERO; x0.len()]; 2 * model.window + 1];
    blocks[idx(0)] = x0.to_vec();
    for n in 1..=m {
        let prev = blocks[idx(n - 1)].clone();
        blocks[idx(n)] = prev.iter().zip(&model.cell).map(|(x, t)| x * model.reversed_weight(n, *t) / lambda).collect();
    }
    for n in (-m..0).rev() {
        let next = blocks[idx(n + 1)].clone();
        blocks[idx(n)] = next.iter().zip(&model.cell).map(|(x, t)| x * lambda / model.reversed_weight(n + 1, *t)).collect();
    }
    let block_norms: Vec<f64> = blocks.iter().map(|x| model.cell_norm_sq(x).sqrt()).collect();
    let total: f64 = block_norms.iter().map(|v| v * v).sum();
    let mut res = 0.0;
    for n in (-m + 1)..=m {
        let diff: Vec<Complex64> = blocks[idx(n - 1)]
            .iter()
            .zip(&blocks[idx(n)])
            .zip(&model.cell)
            .map(|((p, x), t)| p * model.reversed_weight(n, *t) - lambda * x)
            .collect();
        res += model.cell_norm_sq(&diff);
    }
    let residual = if total.is_finite() && total > 0.0 { (res / total).sqrt() } else { f64::INFINITY };
    let half = m / 2;
    let ratio_minus = tail_ratio((-m..-half).map(|n| (block_norms[idx(n)], block_norms[idx(n + 1)])));
    let ratio_plus = tail_ratio((half + 1..=m).map(|n| (block_norms[idx(n)], block_norms[idx(n - 1)])));
    let l = lambda.norm();
    let expected_minus = if model.tail_minus > 0.0 { l / model.tail_minus } else { f64::INFINITY };
    let expected_plus = model.tail_plus / l;
    let verdict = if ratio_minus < 1.0 && ratio_plus < 1.0 && residual.is_finite() {
        ShiftVerdict::Eigenvector
    } else {
        ShiftVerdict::NotEigenvalue
    };
    Ok(ShiftEigen {
        lambda,
        blocks,
        block_norms,
        residual,
        ratio_minus,
        ratio_plus,
        expected_minus,
        expected_plus,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    /// h_n on the cell nodes for n = −M..=M.
    pub blocks: Vec<Vec<Complex64>>,
    pub norms_sq: Vec<f64>,
    pub total: f64,
    /// Quadrature ‖f‖² on the full grid.
    pub reference: f64,
    pub defect: f64,
}

impl BlockDecomposition {
    pub fn defect_against(&self, norm_sq: f64) -> f64 {
        (self.total - norm_sq).abs() / norm_sq
    }
}

/// Ψf = Σ h_n e_n with h_n(t) = a^{−n/2}a_n(t)f(t/aⁿ).
pub fn block_unitary(f: &HalfLineGrid, model: &ShiftModel) -> Result<BlockDecomposition> {
    if ((f.ratio - model.ratio()) / model.ratio()).abs() > 1e-12 {
        return Err(HardyError::OutOfRange(format!(
            "grid ratio {} does not match the cell ratio {}",
            f.ratio,
            model.ratio()
        )));
    }
    let m_a = dilation_index(model.a, f.ratio)?;
    let w = model.window as i64;
    let blocks: Vec<Vec<Complex64>> = (-w..=w)
        .map(|n| {
            let scale = model.a.powf(-(n as f64) / 2.0);
            model
                .cell
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let k = model.cell_start + i as i64;
                    f.at(k - n * m_a) * model.phase(n, *t) * scale
                })
                .collect()
        })
        .collect();
    let norms_sq: Vec<f64> = blocks.iter().map(|h| model.cell_norm_sq(h)).collect();
    let total: f64 = norms_sq.iter().sum();
    let reference = f.norm_sq();
    let defect = if reference > 0.0 { (total - reference).abs() / reference } else { total };
    Ok(BlockDecomposition { blocks, norms_sq, total, reference, defect })
}

/// (Tg)_n = c_n g_{n+1} on window blocks; the last block has no successor.
pub fn left_shift(model: &ShiftModel, blocks: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let w = model.window as i64;
    (-w..=w)
        .map(|n| {
            let i = (n + w) as usize;
            match blocks.get(i + 1) {
                Some(next) => next.iter().zip(&model.cell).map(|(g, t)| g * model.weight(n, *t)).collect(),
                None => vec![ZERO; model.cell.len()],
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaradusVerdict {
    ConsistentWithCaradus,
    NotConsistent,
    /// λ = 0: reported without verdict.
    Descriptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaradusEntry {
    pub window: usize,
    pub kernel_proxy: usize,
    pub surjectivity_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaradusReport {
    pub lambda: Complex64,
    pub entries: Vec<CaradusEntry>,
    pub verdict: CaradusVerdict,
}

/// Finite sections of T̃ − λ, where (T̃x)_n = k_n x_{n−1}.
///
/// The operator acts pointwise in t, so the section is block diagonal over the
/// cell nodes and its singular values are the union of the scalar sections'.
/// Kernel proxy: singular values below 1e−8 of the square section on −M..=M.
/// Surjectivity proxy: smallest singular value of the section with the extra
/// column n = −M−1.
pub fn caradus_precheck(model: &ShiftModel, lambda: Complex64, windows: &[usize]) -> CaradusReport {
    let entries: Vec<CaradusEntry> = windows
        .iter()
        .map(|&m| {
            let per_node: Vec<(usize, f64)> = model
                .cell
                .par_iter()
                .map(|&t| {
                    let size = 2 * m + 1;
                    let mi = m as i64;
                    let rect = DMatrix::from_fn(size, size + 1, |r, c| {
                        let n = r as i64 - mi;
                        let col = c as i64 - mi - 1;
                        if col == n {
                            -lambda
                        } else if col == n - 1 {
                            Complex64::new(model.reversed_weight(n, t), 0.0)
                        } else {
                            ZERO
                        }
                    });
                    let square = rect.columns(1, size).into_owned();
                    let kernel = square.singular_values().iter().filter(|s| **s < KERNEL_SV_TOL).count();
                    let surj = rect.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
                    (kernel, surj)
                })
                .collect();
            CaradusEntry {
                window: m,
                kernel_proxy: per_node.iter().map(|p| p.0).sum(),
                surjectivity_proxy: per_node.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let verdict = if lambda == ZERO {
        CaradusVerdict::Descriptive
    } else {
        let growing = entries.windows(2).all(|p| p[1].kernel_proxy > p[0].kernel_proxy);
        let bounded = entries.iter().all(|e| e.surjectivity_proxy > 1e-3);
        if growing && bounded && !entries.is_empty() {
            CaradusVerdict::ConsistentWithCaradus
        } else {
            CaradusVerdict::NotConsistent
        }
    };
    CaradusReport { lambda, entries, verdict }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub residual: f64,
    pub verdict: ShiftVerdict,
}

/// shift_eigenvector with x_0 ≡ 1 over a λ list, in parallel.
pub fn spectral_map(model: &ShiftModel, lambdas: &[Complex64]) -> Vec<SpectralPoint> {
    let ones = vec![Complex64::new(1.0, 0.0); model.cell.len()];
    lambdas
        .par_iter()
        .map(|&lambda| match shift_eigenvector(model, lambda, &ones) {
            Ok(e) => SpectralPoint { lambda, residual: e.residual, verdict: e.verdict },
            Err(_) => SpectralPoint { lambda, residual: f64::NAN, verdict: ShiftVerdict::NotEigenvalue },
        })
        .collect()
}

pub fn write_spectral_csv<W: Write>(out: W, points: &[SpectralPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re_lambda", "im_lambda", "residual", "verdict"])?;
    for p in points {
        let verdict = match p.verdict {
            ShiftVerdict::Eigenvector => "eigenvector",
            ShiftVerdict::NotEigenvalue => "not_eigenvalue",
        };
        w.write_record(&[p.lambda.re.to_string(), p.lambda.im.to_string(), p.residual.to_string(), verdict.into()])?;
    }
    w.flush().map_err(|e| HardyError::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_grid(a: f64, k: usize) -> HalfLineGrid {
        HalfLineGrid::for_dilation(|t| c((-t).exp(), 0.0), a, k).unwrap()
    }

    #[test]
    fn laplace_transforms() {
        let g = exp_grid(2.0, 16);
        let v = paley_wiener(&g, c(1.0, 0.0)).unwrap();
        assert!((v.value - c(0.5, 0.0)).norm() < 1e-8 && !v.decay_warning);
        let te = HalfLineGrid::for_dilation(|t| c(t * (-t).exp(), 0.0), 2.0, 16).unwrap();
        assert!((paley_wiener(&te, c(2.0, 0.0)).unwrap().value - c(1.0 / 9.0, 0.0)).norm() < 1e-8);
        let w = c(0.7, 3.0);
        assert!((paley_wiener(&g, w).unwrap().value - 1.0 / (w + 1.0)).norm() < 1e-8);
        assert!(paley_wiener(&g, c(0.0, 1.0)).is_err());
        let slow = HalfLineGrid::sample(|_| c(1.0, 0.0), 1.1, 1e-6, 10.0).unwrap();
        assert!(paley_wiener(&slow, c(1.0, 0.0)).unwrap().decay_warning);
    }

    #[test]
    fn isometry() {
        let g = exp_grid(2.0, 16);
        assert!((g.norm_sq() - 0.5).abs() < 1e-10);
        let pf = h2_halfplane_norm_sq(|w| 1.0 / (w + 1.0), 0.0, 256);
        assert!((pf - 0.5).abs() < 1e-10);
        let pf2 = h2_halfplane_norm_sq(|w| 1.0 / ((w + 1.0) * (w + 1.0)), 0.0, 256);
        assert!((pf2 - 0.25).abs() < 1e-10);
        // coarser grids still agree to 1%
        assert!((g.coarsen().norm_sq() - g.norm_sq()).abs() < 0.01 * g.norm_sq());
    }

    #[test]
    fn dilation() {
        let g = exp_grid(2.0, 8);
        let id = w_operator(&g, 1.0, ZERO).unwrap();
        assert_eq!(id, g);
        let w = w_operator(&g, 2.0, c(1.0, 0.0)).unwrap();
        for j in w.start..=w.end() {
            let t = w.t(j);
            assert!((w.at(j) - c(0.5 * (-t).exp(), 0.0)).norm() < 1e-14);
        }
        assert!(w_operator(&g, 3.0, ZERO).is_err());
    }

    #[test]
    fn intertwining() {
        let (a, b) = (2.0, c(1.0, 0.5));
        let g = exp_grid(a, 16);
        let wf = w_operator(&g, a, b).unwrap();
        for k in 0..10 {
            let w = c(0.5 + 0.3 * k as f64, -2.0 + 0.5 * k as f64);
            let lhs = paley_wiener(&wf, w).unwrap().value;
            let rhs = paley_wiener(&g, a * w + b).unwrap().value;
            assert!((lhs - rhs).norm() < 1e-8, "{w}");
        }
    }

    #[test]
    fn shift_weights() {
        let m = build_shift_model(2.0, c(1.0, 0.0), 40, 8).unwrap();
        assert!((m.weight(0, 1.0) - 0.428882).abs() < 1e-6);
        assert_eq!((m.tail_minus, m.tail_plus), (2f64.powf(-0.5), 0.0));
        assert!((m.cell[0] - 1.0).abs() < 1e-15 && (m.cell[8] - 2.0).abs() < 1e-14);
        for t in &m.cell {
            // k_{−8} = c_8 is within its first-order bound of 2^{−1/2}
            let k = m.reversed_weight(-8, *t);
            assert!((k - m.tail_minus).abs() <= m.tail_minus * 2f64.powi(-9) * t);
        }
        let lo = build_shift_model(0.5, c(1.0, 0.0), 10, 4).unwrap();
        assert!((lo.cell[0] - 0.5).abs() < 1e-15 && (lo.cell[4] - 1.0).abs() < 1e-14);
        assert_eq!((lo.tail_minus, lo.tail_plus), (0.0, 2f64.sqrt()));
        assert!(build_shift_model(1.0, c(1.0, 0.0), 10, 4).is_err());
    }

    #[test]
    fn eigenvectors_inside_and_outside() {
        let m = build_shift_model(2.0, c(1.0, 0.0), 40, 8).unwrap();
        let ones = vec![c(1.0, 0.0); 9];
        let e = shift_eigenvector(&m, c(0.5, 0.0), &ones).unwrap();
        assert_eq!(e.verdict, ShiftVerdict::Eigenvector);
        assert!(e.residual < 1e-12);
        assert!((e.ratio_minus - e.expected_minus).abs() < 1e-3);
        let out = shift_eigenvector(&m, c(0.7071 + 1e-3, 0.0), &ones).unwrap();
        assert_eq!(out.verdict, ShiftVerdict::NotEigenvalue);
        assert!(shift_eigenvector(&m, ZERO, &ones).is_err());

        let flat = build_shift_model(2.0, c(0.0, 1.0), 40, 8).unwrap();
        for l in [0.1, 0.5, 0.7, 1.0, 3.0] {
            let e = shift_eigenvector(&flat, c(l, 0.0), &ones).unwrap();
            assert_eq!(e.verdict, ShiftVerdict::NotEigenvalue, "{l}");
        }
        let type1 = build_shift_model(0.5, c(1.0, 0.0), 40, 8).unwrap();
        assert_eq!(shift_eigenvector(&type1, c(0.5, 0.0), &ones).unwrap().verdict, ShiftVerdict::NotEigenvalue);
    }

    #[test]
    fn block_map() {
        let m = build_shift_model(2.0, c(1.0, 0.3), 30, 8).unwrap();
        let g = exp_grid(2.0, 8);
        let d = block_unitary(&g, &m).unwrap();
        assert!(d.defect < 1e-6);
        assert!(d.defect_against(0.5) < 1e-6);

        let cell_only = HalfLineGrid::sample(|t| if t > 1.0 + 1e-9 && t < 2.0 - 1e-9 { c(1.0, 0.0) } else { ZERO }, 2f64.powf(0.125), 1e-3, 10.0).unwrap();
        let d = block_unitary(&cell_only, &m).unwrap();
        assert_eq!(d.norms_sq.iter().filter(|v| **v > 0.0).count(), 1);

        // Ψ∘W = T∘Ψ
        let wf = w_operator(&g, 2.0, m.b).unwrap();
        let lhs = block_unitary(&wf, &m).unwrap().blocks;
        let rhs = left_shift(&m, &d_blocks(&g, &m));
        for n in 0..lhs.len() - 1 {
            for (x, y) in lhs[n].iter().zip(&rhs[n]) {
                assert!((x - y).norm() < 1e-12, "n={n}");
            }
        }
    }

    fn d_blocks(g: &HalfLineGrid, m: &ShiftModel) -> Vec<Vec<Complex64>> {
        block_unitary(g, m).unwrap().blocks
    }

    #[test]
    fn caradus_sections() {
        let m = build_shift_model(2.0, c(1.0, 0.0), 40, 4).unwrap();
        let far = caradus_precheck(&m, c(10.0, 0.0), &[10, 20]);
        assert!(far.entries.iter().all(|e| e.kernel_proxy == 0 && e.surjectivity_proxy > 1.0));
        let inside = caradus_precheck(&m, c(0.5, 0.0), &[20, 40, 80]);
        assert!(inside.entries.iter().all(|e| e.surjectivity_proxy > 1e-3));
        assert!(inside.entries.windows(2).all(|p| p[1].kernel_proxy >= p[0].kernel_proxy));
        assert_eq!(caradus_precheck(&m, ZERO, &[5]).verdict, CaradusVerdict::Descriptive);
    }

    #[test]
    fn spectral_csv() {
        let m = build_shift_model(2.0, c(1.0, 0.0), 20, 4).unwrap();
        let pts = spectral_map(&m, &[c(0.3, 0.0), c(2.0, 0.0), ZERO]);
        assert_eq!(pts[0].verdict, ShiftVerdict::Eigenvector);
        assert_eq!(pts[1].verdict, ShiftVerdict::NotEigenvalue);
        let mut buf = Vec::new();
        write_spectral_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("re_lambda,im_lambda,residual,verdict\n0.3,0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
