//! Linear fractional symbols z ↦ (αz+β)/(γz+δ), their fixed points, and the
//! universality verdicts for composition-operator translates C − λ.
//!
//! Maps are stored projectively normalized: δ = 1 when δ ≠ 0, otherwise γ = 1.
//! The Cayley transform γ(z) = (1+z)/(1−z) carries 𝔻 onto the right half-plane.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for "on the unit circle" and for the boundary self-map sample test.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Number of boundary samples used by the self-map test.
pub const BOUNDARY_SAMPLES: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Disk,
    HalfPlane,
    /// No self-map constraint; used for conformal changes of variable such as
    /// the Cayley transform itself.
    Sphere,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Disk => "disk",
            Domain::HalfPlane => "half-plane",
            Domain::Sphere => "sphere",
        }
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedPoint {
    Finite(Complex64),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtendedPoint::Finite(z) => Some(z),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }

    /// Modulus, with ∞ reported as `f64::INFINITY`.
    pub fn modulus(self) -> f64 {
        self.finite().map_or(f64::INFINITY, |z| z.norm())
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedPoint::Finite(z) => write!(f, "{z}"),
            ExtendedPoint::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub domain: Domain,
}

impl MoebiusMap {
    /// Validated constructor. Disk maps must send 𝔻 into 𝔻; half-plane maps
    /// are accepted as given (the affine criterion is checked by classification).
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64, domain: Domain) -> Result<Self> {
        let m = Self::unchecked(alpha, beta, gamma, delta, domain)?;
        if domain == Domain::Disk {
            m.check_disk_self_map()?;
        }
        Ok(m)
    }

    /// Normalizes and rejects only degenerate coefficient sets.
    pub fn unchecked(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64, domain: Domain) -> Result<Self> {
        let scale = [alpha, beta, gamma, delta].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return Err(HardyError::DegenerateMap);
        }
        let det = alpha * delta - beta * gamma;
        if det.norm() <= 1e-14 * scale * scale {
            return Err(HardyError::DegenerateMap);
        }
        let mut m = Self { alpha, beta, gamma, delta, domain };
        m.normalize();
        Ok(m)
    }

    fn normalize(&mut self) {
        let scale = [self.alpha, self.beta, self.gamma, self.delta]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let pivot = if self.delta.norm() > 1e-15 * scale { self.delta } else { self.gamma };
        self.alpha /= pivot;
        self.beta /= pivot;
        self.gamma /= pivot;
        self.delta /= pivot;
        // exact zeros keep the affine fast paths exact
        if self.gamma.norm() <= 1e-16 * scale / pivot.norm() {
            self.gamma = ZERO;
        }
    }

    pub fn identity(domain: Domain) -> Self {
        Self { alpha: ONE, beta: ZERO, gamma: ZERO, delta: ONE, domain }
    }

    /// φ_a(z) = a z + (1 − a), the canonical hyperbolic non-automorphism.
    pub fn disk_affine(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(HardyError::OutOfRange(format!("affine disk symbol needs 0 < a < 1, got {a}")));
        }
        Ok(Self {
            alpha: Complex64::new(a, 0.0),
            beta: Complex64::new(1.0 - a, 0.0),
            gamma: ZERO,
            delta: ONE,
            domain: Domain::Disk,
        })
    }

    /// h(z) = (z + a)/(a z + 1), the hyperbolic automorphism fixing ±1.
    pub fn canonical_automorphism(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(HardyError::OutOfRange(format!("automorphism parameter needs 0 < a < 1, got {a}")));
        }
        let a = Complex64::new(a, 0.0);
        Self::new(ONE, a, a, ONE, Domain::Disk)
    }

    /// ψ(w) = a w + b on the half-plane.
    pub fn halfplane_affine(a: Complex64, b: Complex64) -> Result<Self> {
        Self::unchecked(a, b, ZERO, ONE, Domain::HalfPlane)
    }

    /// γ(z) = (1 + z)/(1 − z).
    pub fn cayley() -> Self {
        Self { alpha: -ONE, beta: -ONE, gamma: ONE, delta: -ONE, domain: Domain::Sphere }.normalized()
    }

    /// γ^{-1}(w) = (w − 1)/(w + 1).
    pub fn cayley_inverse() -> Self {
        Self { alpha: ONE, beta: -ONE, gamma: ONE, delta: ONE, domain: Domain::Sphere }
    }

    fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn determinant(&self) -> Complex64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn is_affine(&self) -> bool {
        self.gamma == ZERO
    }

    pub fn is_identity(&self) -> bool {
        self.gamma == ZERO && self.beta.norm() < 1e-15 && (self.alpha - self.delta).norm() < 1e-15 * self.delta.norm()
    }

    /// Image of a finite point; the pole maps to ∞.
    pub fn apply(&self, z: Complex64) -> ExtendedPoint {
        let den = self.gamma * z + self.delta;
        if den == ZERO {
            ExtendedPoint::Infinity
        } else {
            ExtendedPoint::Finite((self.alpha * z + self.beta) / den)
        }
    }

    /// Image of a finite point as a complex number (∞ becomes a non-finite value).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.alpha * z + self.beta) / (self.gamma * z + self.delta)
    }

    pub fn apply_extended(&self, p: ExtendedPoint) -> ExtendedPoint {
        match p {
            ExtendedPoint::Finite(z) => self.apply(z),
            ExtendedPoint::Infinity if self.gamma == ZERO => ExtendedPoint::Infinity,
            ExtendedPoint::Infinity => ExtendedPoint::Finite(self.alpha / self.gamma),
        }
    }

    /// φ'(z) = (αδ − βγ)/(γz + δ)².
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.gamma * z + self.delta;
        self.determinant() / (den * den)
    }

    pub fn inverse(&self) -> Self {
        Self { alpha: self.delta, beta: -self.beta, gamma: -self.gamma, delta: self.alpha, domain: Domain::Sphere }
            .normalized()
    }

    /// self ∘ other, tagged with `domain`.
    pub fn compose(&self, other: &Self, domain: Domain) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.gamma,
            beta: self.alpha * other.beta + self.beta * other.delta,
            gamma: self.gamma * other.alpha + self.delta * other.gamma,
            delta: self.gamma * other.beta + self.delta * other.delta,
            domain,
        }
        .normalized()
    }

    /// Largest coefficient difference after normalization.
    pub fn coefficient_defect(&self, other: &Self) -> f64 {
        [
            self.alpha - other.alpha,
            self.beta - other.beta,
            self.gamma - other.gamma,
            self.delta - other.delta,
        ]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
    }

    /// Checks pole outside the closed disk, φ(0) ∈ 𝔻, and |φ| ≤ 1 on a boundary sample.
    pub fn check_disk_self_map(&self) -> Result<()> {
        if self.delta.norm() <= self.gamma.norm() {
            return Err(HardyError::NotDiskSelfMap(format!(
                "pole at {} lies in the closed disk",
                self.apply_extended(ExtendedPoint::Infinity).finite().map_or(ZERO, |_| -self.delta / self.gamma)
            )));
        }
        if self.eval(ZERO).norm() >= 1.0 {
            return Err(HardyError::NotDiskSelfMap(format!("phi(0) = {} is not in the disk", self.eval(ZERO))));
        }
        for j in 0..BOUNDARY_SAMPLES {
            let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / BOUNDARY_SAMPLES as f64);
            let w = self.eval(zeta);
            if w.norm() > 1.0 + BOUNDARY_TOL {
                return Err(HardyError::NotDiskSelfMap(format!("|phi({zeta})| = {} > 1", w.norm())));
            }
        }
        Ok(())
    }

    /// Whether the map sends 𝕋 onto 𝕋 (checked on the boundary sample).
    pub fn is_disk_automorphism(&self) -> bool {
        (0..BOUNDARY_SAMPLES).all(|j| {
            let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / BOUNDARY_SAMPLES as f64);
            (self.eval(zeta).norm() - 1.0).abs() <= BOUNDARY_TOL
        })
    }

    /// Center and radius of φ(𝔻) for a map with pole outside the closed disk.
    pub fn image_disk(&self) -> (Complex64, f64) {
        let d = self.delta.norm_sqr() - self.gamma.norm_sqr();
        let center = (self.beta * self.delta.conj() - self.alpha * self.gamma.conj()) / d;
        (center, self.determinant().norm() / d)
    }
}

/// Roots of γz² + (δ − α)z − β = 0; ∞ when γ = 0, twice when also α = δ.
pub fn fixed_points(m: &MoebiusMap) -> (ExtendedPoint, ExtendedPoint) {
    let (a, b, c) = (m.gamma, m.delta - m.alpha, -m.beta);
    if a == ZERO {
        if b.norm() <= 1e-15 * m.delta.norm().max(m.alpha.norm()) {
            return (ExtendedPoint::Infinity, ExtendedPoint::Infinity);
        }
        return (ExtendedPoint::Finite(-c / b), ExtendedPoint::Infinity);
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    // pick the sign that avoids cancellation, then Vieta for the partner
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    if q == ZERO {
        return (ExtendedPoint::Finite(ZERO), ExtendedPoint::Finite(ZERO));
    }
    let r1 = q / a;
    let r2 = c / q;
    (ExtendedPoint::Finite(r1), ExtendedPoint::Finite(r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    InteriorFixed,
    ParabolicBoundary,
    HyperbolicAutomorphism,
    HyperbolicNonAutomorphism,
    HalfPlaneAutomorphism,
    HalfPlaneParabolicType,
    TypeI,
    TypeII,
}

/// λ-region {inner < |λ| < outer}; inner = 0 denotes the punctured disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRegion {
    pub inner: f64,
    pub outer: f64,
}

impl LambdaRegion {
    pub fn contains(&self, lambda: Complex64) -> bool {
        let r = lambda.norm();
        r > self.inner && r < self.outer
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolClass {
    pub kind: SymbolKind,
    pub fixed_points: (ExtendedPoint, ExtendedPoint),
    pub derivative_at_attracting: Complex64,
    pub universal_translate: bool,
    pub lambda_region: Option<LambdaRegion>,
    /// Set for the identity and other maps whose fixed-point data is not informative.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Inside,
    OnCircle,
    Outside,
}

fn locate(p: ExtendedPoint) -> Location {
    let r = p.modulus();
    if (r - 1.0).abs() <= BOUNDARY_TOL {
        Location::OnCircle
    } else if r < 1.0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

fn same_point(p: ExtendedPoint, q: ExtendedPoint) -> bool {
    match (p, q) {
        (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => (a - b).norm() <= BOUNDARY_TOL,
        (ExtendedPoint::Infinity, ExtendedPoint::Infinity) => true,
        _ => false,
    }
}

pub fn classify_disk(m: &MoebiusMap) -> Result<SymbolClass> {
    if m.domain != Domain::Disk {
        return Err(HardyError::WrongDomain { expected: "disk", found: m.domain.name() });
    }
    m.check_disk_self_map()?;
    let fps = fixed_points(m);

    if m.is_identity() {
        return Ok(SymbolClass {
            kind: SymbolKind::InteriorFixed,
            fixed_points: fps,
            derivative_at_attracting: ONE,
            universal_translate: false,
            lambda_region: None,
            degenerate: true,
        });
    }

    let deriv = |p: ExtendedPoint| p.finite().map_or(ONE, |z| m.derivative(z));
    let (l0, l1) = (locate(fps.0), locate(fps.1));

    let interior = [fps.0, fps.1].into_iter().find(|p| locate(*p) == Location::Inside);
    if let Some(p) = interior {
        return Ok(SymbolClass {
            kind: SymbolKind::InteriorFixed,
            fixed_points: fps,
            derivative_at_attracting: deriv(p),
            universal_translate: false,
            lambda_region: None,
            degenerate: false,
        });
    }

    if same_point(fps.0, fps.1) {
        return Ok(SymbolClass {
            kind: SymbolKind::ParabolicBoundary,
            fixed_points: fps,
            derivative_at_attracting: deriv(fps.0),
            universal_translate: false,
            lambda_region: None,
            degenerate: false,
        });
    }

    match (l0, l1) {
        (Location::OnCircle, Location::OnCircle) => {
            // the attracting point is the one with |φ'| < 1
            let (d0, d1) = (deriv(fps.0), deriv(fps.1));
            let att = if d0.norm() <= d1.norm() { d0 } else { d1 };
            let r = att.norm();
            let auto = m.is_disk_automorphism();
            Ok(SymbolClass {
                kind: if auto { SymbolKind::HyperbolicAutomorphism } else { SymbolKind::HyperbolicNonAutomorphism },
                fixed_points: fps,
                derivative_at_attracting: att,
                universal_translate: true,
                lambda_region: Some(if auto {
                    LambdaRegion { inner: r.sqrt(), outer: 1.0 / r.sqrt() }
                } else {
                    LambdaRegion { inner: 0.0, outer: 1.0 / r.sqrt() }
                }),
                degenerate: false,
            })
        }
        (Location::OnCircle, Location::Outside) | (Location::Outside, Location::OnCircle) => {
            let zeta = if l0 == Location::OnCircle { fps.0 } else { fps.1 };
            let a = deriv(zeta);
            Ok(SymbolClass {
                kind: SymbolKind::HyperbolicNonAutomorphism,
                fixed_points: fps,
                derivative_at_attracting: a,
                universal_translate: true,
                lambda_region: Some(LambdaRegion { inner: 0.0, outer: 1.0 / a.norm().sqrt() }),
                degenerate: false,
            })
        }
        _ => Err(HardyError::NotDiskSelfMap(format!(
            "no fixed point in the closed disk ({}, {})",
            fps.0, fps.1
        ))),
    }
}

/// Affine coefficients (a, b) of ψ(w) = a w + b.
pub fn affine_coefficients(m: &MoebiusMap) -> Result<(Complex64, Complex64)> {
    if !m.is_affine() {
        return Err(HardyError::InvalidHalfPlaneSymbol("symbol is not affine".into()));
    }
    Ok((m.alpha / m.delta, m.beta / m.delta))
}

pub fn classify_halfplane(m: &MoebiusMap) -> Result<SymbolClass> {
    if m.domain != Domain::HalfPlane {
        return Err(HardyError::WrongDomain { expected: "half-plane", found: m.domain.name() });
    }
    let (a, b) = affine_coefficients(m)?;
    if a.im.abs() > 1e-12 * a.norm() || a.re <= 0.0 {
        return Err(HardyError::InvalidHalfPlaneSymbol(format!("need a > 0, got a = {a}")));
    }
    if b.re < -1e-12 {
        return Err(HardyError::InvalidHalfPlaneSymbol(format!("need Re(b) >= 0, got b = {b}")));
    }
    let a = a.re;
    let fps = fixed_points(m);
    let degenerate = m.is_identity();
    let automorphism = b.re <= 1e-12;
    let unit = (a - 1.0).abs() <= 1e-12;
    let (kind, region) = if automorphism {
        (SymbolKind::HalfPlaneAutomorphism, None)
    } else if unit {
        (SymbolKind::HalfPlaneParabolicType, None)
    } else if a > 1.0 {
        (SymbolKind::TypeII, Some(LambdaRegion { inner: 0.0, outer: a.powf(-0.5) }))
    } else {
        (SymbolKind::TypeI, None)
    };
    Ok(SymbolClass {
        kind,
        fixed_points: fps,
        derivative_at_attracting: Complex64::new(a, 0.0),
        universal_translate: kind == SymbolKind::TypeII,
        lambda_region: region,
        degenerate,
    })
}

/// lim_{w→∞} w/ψ(w) = 1/a for affine ψ(w) = a w + b.
pub fn angular_derivative_at_infinity(m: &MoebiusMap) -> Result<f64> {
    let (a, _) = affine_coefficients(m)?;
    if a.im.abs() > 1e-12 * a.norm() || a.re <= 0.0 {
        return Err(HardyError::InvalidHalfPlaneSymbol(format!("need a > 0, got a = {a}")));
    }
    Ok(1.0 / a.re)
}

/// φ_{a^n}(z) = a^n z + (1 − a^n); n = 0 is the identity.
pub fn iterate_affine(a: f64, n: u32) -> Result<MoebiusMap> {
    if !(a > 0.0 && a < 1.0) {
        return Err(HardyError::OutOfRange(format!("affine disk symbol needs 0 < a < 1, got {a}")));
    }
    if n == 0 {
        return Ok(MoebiusMap::identity(Domain::Disk));
    }
    MoebiusMap::disk_affine(a.powi(n as i32))
}

/// Φ = γ^{-1} ∘ ψ ∘ γ for an affine half-plane symbol ψ.
pub fn cayley_conjugate(m: &MoebiusMap) -> Result<MoebiusMap> {
    if m.domain != Domain::HalfPlane {
        return Err(HardyError::WrongDomain { expected: "half-plane", found: m.domain.name() });
    }
    affine_coefficients(m)?;
    let inner = m.compose(&MoebiusMap::cayley(), Domain::Sphere);
    Ok(MoebiusMap::cayley_inverse().compose(&inner, Domain::Disk))
}

/// ψ = γ ∘ φ ∘ γ^{-1}; affine exactly when φ fixes 1.
pub fn halfplane_conjugate(m: &MoebiusMap) -> Result<MoebiusMap> {
    if m.domain != Domain::Disk {
        return Err(HardyError::WrongDomain { expected: "disk", found: m.domain.name() });
    }
    let inner = m.compose(&MoebiusMap::cayley_inverse(), Domain::Sphere);
    Ok(MoebiusMap::cayley().compose(&inner, Domain::HalfPlane))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn near(p: ExtendedPoint, z: Complex64) -> bool {
        p.finite().is_some_and(|w| (w - z).norm() < 1e-12)
    }

    #[test]
    fn fixed_points_of_basic_maps() {
        let phi = MoebiusMap::disk_affine(0.5).unwrap();
        let (p, q) = fixed_points(&phi);
        assert!(near(p, ONE) && q.is_infinite());

        let id = MoebiusMap::identity(Domain::Disk);
        assert_eq!(fixed_points(&id), (ExtendedPoint::Infinity, ExtendedPoint::Infinity));
        assert!(classify_disk(&id).unwrap().degenerate);

        let h = MoebiusMap::canonical_automorphism(0.5).unwrap();
        let (p, q) = fixed_points(&h);
        assert!((near(p, ONE) && near(q, -ONE)) || (near(p, -ONE) && near(q, ONE)));
    }

    #[test]
    fn disk_classification() {
        let phi = MoebiusMap::disk_affine(0.5).unwrap();
        let cl = classify_disk(&phi).unwrap();
        assert_eq!(cl.kind, SymbolKind::HyperbolicNonAutomorphism);
        assert!(cl.universal_translate);
        let region = cl.lambda_region.unwrap();
        assert_eq!(region.inner, 0.0);
        assert!((region.outer - 2f64.sqrt()).abs() < 1e-12);

        let h = MoebiusMap::canonical_automorphism(0.5).unwrap();
        let cl = classify_disk(&h).unwrap();
        assert_eq!(cl.kind, SymbolKind::HyperbolicAutomorphism);
        assert!(cl.universal_translate);
        assert!((cl.derivative_at_attracting - c(1.0 / 3.0, 0.0)).norm() < 1e-12);

        let half = MoebiusMap::new(c(0.5, 0.0), ZERO, ZERO, ONE, Domain::Disk).unwrap();
        let cl = classify_disk(&half).unwrap();
        assert_eq!(cl.kind, SymbolKind::InteriorFixed);
        assert!(!cl.universal_translate);

        // 1/(2 - z): double fixed point at 1
        let par = MoebiusMap::new(ZERO, ONE, -ONE, c(2.0, 0.0), Domain::Disk).unwrap();
        assert_eq!(classify_disk(&par).unwrap().kind, SymbolKind::ParabolicBoundary);
    }

    #[test]
    fn rejects_non_self_maps() {
        assert!(matches!(
            MoebiusMap::new(c(2.0, 0.0), ZERO, ZERO, ONE, Domain::Disk),
            Err(HardyError::NotDiskSelfMap(_))
        ));
        assert!(matches!(
            MoebiusMap::new(ONE, ONE, ONE, ONE, Domain::Disk),
            Err(HardyError::DegenerateMap)
        ));
        let shifted = MoebiusMap::unchecked(c(0.5, 0.0), c(0.6, 0.0), ZERO, ONE, Domain::Disk).unwrap();
        assert!(classify_disk(&shifted).is_err());
    }

    #[test]
    fn halfplane_classification() {
        let t2 = MoebiusMap::halfplane_affine(c(2.0, 0.0), ONE).unwrap();
        let cl = classify_halfplane(&t2).unwrap();
        assert_eq!(cl.kind, SymbolKind::TypeII);
        assert!(cl.universal_translate);
        assert!((cl.lambda_region.unwrap().outer - 0.5f64.sqrt()).abs() < 1e-15);

        let t1 = MoebiusMap::halfplane_affine(c(0.5, 0.0), ONE).unwrap();
        let cl = classify_halfplane(&t1).unwrap();
        assert_eq!(cl.kind, SymbolKind::TypeI);
        assert!(!cl.universal_translate);

        let rot = MoebiusMap::halfplane_affine(ONE, c(0.0, 1.0)).unwrap();
        assert_eq!(classify_halfplane(&rot).unwrap().kind, SymbolKind::HalfPlaneAutomorphism);
        let par = MoebiusMap::halfplane_affine(ONE, ONE).unwrap();
        assert_eq!(classify_halfplane(&par).unwrap().kind, SymbolKind::HalfPlaneParabolicType);

        let bad = MoebiusMap::halfplane_affine(c(-1.0, 0.0), ONE).unwrap();
        assert!(classify_halfplane(&bad).is_err());
        let bad = MoebiusMap::halfplane_affine(ONE, c(-1.0, 0.0)).unwrap();
        assert!(classify_halfplane(&bad).is_err());
    }

    #[test]
    fn angular_derivatives() {
        let cases = [(c(2.0, 0.0), ONE, 0.5), (ONE, ZERO, 1.0), (c(0.25, 0.0), c(3.0, 4.0), 4.0)];
        for (a, b, want) in cases {
            let m = MoebiusMap::halfplane_affine(a, b).unwrap();
            assert_eq!(angular_derivative_at_infinity(&m).unwrap(), want);
        }
    }

    #[test]
    fn affine_iterates() {
        let m = iterate_affine(0.5, 2).unwrap();
        assert_eq!((m.alpha, m.beta), (c(0.25, 0.0), c(0.75, 0.0)));
        assert!(iterate_affine(0.5, 0).unwrap().is_identity());
        let phi = MoebiusMap::disk_affine(0.5).unwrap();
        let composed = phi.compose(&iterate_affine(0.5, 2).unwrap(), Domain::Disk);
        assert!(composed.coefficient_defect(&iterate_affine(0.5, 3).unwrap()) < 1e-15);
    }

    #[test]
    fn cayley_conjugation() {
        let psi = MoebiusMap::halfplane_affine(c(2.0, 0.0), ONE).unwrap();
        let phi = cayley_conjugate(&psi).unwrap();
        assert!(phi.coefficient_defect(&MoebiusMap::disk_affine(0.5).unwrap()) < 1e-15);

        let id = cayley_conjugate(&MoebiusMap::identity(Domain::HalfPlane)).unwrap();
        assert!(id.is_identity());

        let psi = MoebiusMap::halfplane_affine(c(4.0, 0.0), c(3.0, 0.0)).unwrap();
        let phi = cayley_conjugate(&psi).unwrap();
        let (g, gi) = (MoebiusMap::cayley(), MoebiusMap::cayley_inverse());
        for j in 0..20 {
            let z = Complex64::from_polar(0.05 + 0.045 * j as f64, 0.7 * j as f64);
            let direct = gi.eval(psi.eval(g.eval(z)));
            assert!((phi.eval(z) - direct).norm() < 1e-12);
        }

        // and back again
        let back = halfplane_conjugate(&MoebiusMap::disk_affine(0.5).unwrap()).unwrap();
        assert!(back.is_affine());
        assert_eq!(classify_halfplane(&back).unwrap().kind, SymbolKind::TypeII);
    }

    #[test]
    fn image_disk_of_affine_symbol() {
        let (center, radius) = MoebiusMap::disk_affine(0.25).unwrap().image_disk();
        assert!((center - c(0.75, 0.0)).norm() < 1e-15);
        assert!((radius - 0.25).abs() < 1e-15);
    }

    #[test]
    fn serializes_with_named_coefficients() {
        let m = MoebiusMap::disk_affine(0.5).unwrap();
        let v = serde_json::to_value(m).unwrap();
        assert_eq!(v["domain"], "disk");
        assert_eq!(v["alpha"], serde_json::json!([0.5, 0.0]));
        let back: MoebiusMap = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
