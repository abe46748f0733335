//! Azimuthal vector potential of a cylindrical solenoid.
//!
//! The solenoid has radius `a`, carries flux `Φ` and occupies `|z| < L`.
//! Its potential is purely azimuthal and independent of the azimuth, so
//! every evaluator here returns the single component `A_φ(ρ, z)`.
//!
//! Finite solenoids are a continuous stack of circular current loops:
//!
//! ```text
//! A_{L,φ}(ρ, z) = Φ/(4π²a) ∫_{−L}^{L} dz′ ∫₀^{2π} dφ′ cos φ′ / √(ρ² + a² + (z − z′)² − 2aρ cos φ′)
//! ```
//!
//! The inner azimuthal integral has the closed form
//! `4 [(2 − k²)K(k) − 2E(k)] / (k² D)` with `D² = (a + ρ)² + (z − z′)²` and
//! `k² = 4aρ / D²`, which gives the cheaper elliptic route.
//!
//! On the solenoid wall (`ρ = a`, `|z| ≤ L`) the integrals diverge; those
//! points are rejected rather than filled in by continuity.

mod elliptic;
mod quadrature;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use elliptic::{elliptic_e, elliptic_k};
pub(crate) use elliptic::loop_bracket_over_k2;
pub use quadrature::{integrate_adaptive, periodic_even_trapezoid, Estimate, QuadratureConfig};

/// Points with `|ρ − a| < BORDER_REL_TOL · a` count as on the wall.
pub const BORDER_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("invalid solenoid: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point (rho = {rho}, z = {z}) lies on the solenoid wall where the potential integrals diverge")]
    OnBorder { rho: f64, z: f64 },
    #[error("quadrature did not converge: estimate {estimate}, error {error} > tolerance {tolerance}")]
    Accuracy { estimate: f64, error: f64, tolerance: f64 },
    #[error("operation requires a finite solenoid length")]
    InfiniteLength,
    #[error("convergence fit failed: {0}")]
    Fit(String),
}

/// Half-length of the solenoid; `Infinite` selects the closed-form gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLength {
    Finite(f64),
    Infinite,
}

impl HalfLength {
    pub fn finite(self) -> Option<f64> {
        match self {
            HalfLength::Finite(l) => Some(l),
            HalfLength::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, HalfLength::Infinite)
    }

    /// Numeric value, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            HalfLength::Infinite
        } else {
            HalfLength::Finite(v)
        }
    }
}

impl fmt::Display for HalfLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfLength::Finite(l) => write!(f, "{l}"),
            HalfLength::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for HalfLength {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "INF" => Ok(HalfLength::Infinite),
            other => other
                .parse::<f64>()
                .map(HalfLength::from_f64)
                .map_err(|e| format!("invalid half-length {other:?}: {e}")),
        }
    }
}

impl Serialize for HalfLength {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            HalfLength::Finite(l) => s.serialize_f64(*l),
            HalfLength::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for HalfLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(HalfLength::from_f64(v)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Physical configuration of the solenoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolenoidSpec {
    pub radius: f64,
    pub flux: f64,
    pub half_length: HalfLength,
    /// Charge-to-light-speed ratio `q/c`; only the product `coupling · flux`
    /// enters the operators.
    pub coupling: f64,
}

impl SolenoidSpec {
    pub fn new(radius: f64, flux: f64, half_length: HalfLength, coupling: f64) -> Result<Self, PotentialError> {
        let spec = Self {
            radius,
            flux,
            half_length,
            coupling,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(PotentialError::InvalidSpec(format!(
                "radius must be positive and finite, got {}",
                self.radius
            )));
        }
        if !self.flux.is_finite() {
            return Err(PotentialError::InvalidSpec(format!("flux must be finite, got {}", self.flux)));
        }
        if !self.coupling.is_finite() {
            return Err(PotentialError::InvalidSpec(format!(
                "coupling must be finite, got {}",
                self.coupling
            )));
        }
        if let HalfLength::Finite(l) = self.half_length {
            if !(l > 0.0) {
                return Err(PotentialError::InvalidSpec(format!(
                    "half-length must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_half_length(mut self, half_length: HalfLength) -> Self {
        self.half_length = half_length;
        self
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }

    /// `coupling · Φ / 2π`; non-integer values give observable phase shifts.
    pub fn flux_parameter(&self) -> f64 {
        self.coupling * self.flux / (2.0 * PI)
    }

    fn prefactor(&self) -> f64 {
        self.flux / (4.0 * PI * PI * self.radius)
    }
}

/// Evaluation point. Outputs never depend on the azimuth, so it is omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coords", rename_all = "snake_case")]
pub enum FieldPoint {
    Cylindrical { rho: f64, z: f64 },
    Spherical { r: f64, theta: f64 },
}

impl FieldPoint {
    pub fn planar(rho: f64) -> Self {
        FieldPoint::Cylindrical { rho, z: 0.0 }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            FieldPoint::Cylindrical { rho, .. } => rho,
            FieldPoint::Spherical { r, theta } => r * theta.sin(),
        }
    }

    pub fn z(&self) -> f64 {
        match *self {
            FieldPoint::Cylindrical { z, .. } => z,
            // cos(π/2) is not exactly zero in floating point; snap so that
            // equatorial points coincide with the planar evaluation.
            FieldPoint::Spherical { theta, .. } if theta == std::f64::consts::FRAC_PI_2 => 0.0,
            FieldPoint::Spherical { r, theta } => r * theta.cos(),
        }
    }

    /// True when the point sits on the lateral wall, within `rel_tol · a`.
    pub fn on_border_with(&self, spec: &SolenoidSpec, rel_tol: f64) -> bool {
        (self.rho() - spec.radius).abs() < rel_tol * spec.radius && self.z().abs() <= spec.half_length.value()
    }

    pub fn on_border(&self, spec: &SolenoidSpec) -> bool {
        self.on_border_with(spec, BORDER_REL_TOL)
    }

    fn validate(&self) -> Result<(), PotentialError> {
        let ok = match *self {
            FieldPoint::Cylindrical { rho, z } => rho >= 0.0 && rho.is_finite() && z.is_finite(),
            FieldPoint::Spherical { r, theta } => {
                r >= 0.0 && r.is_finite() && (0.0..=PI).contains(&theta)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(PotentialError::Domain(format!("invalid field point {self:?}")))
        }
    }
}

/// Infinite-solenoid gauge: `Φ/(2πρ)` outside, `Φρ/(2πa²)` inside.
pub fn a_phi_infinite(point: &FieldPoint, spec: &SolenoidSpec) -> f64 {
    a_phi_infinite_rho(point.rho(), spec)
}

pub fn a_phi_infinite_rho(rho: f64, spec: &SolenoidSpec) -> f64 {
    let a = spec.radius;
    if rho >= a {
        spec.flux / (2.0 * PI * rho)
    } else {
        spec.flux * rho / (2.0 * PI * a * a)
    }
}

/// Which reduction of the loop integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMethod {
    /// Direct double integral.
    Quadrature,
    /// Closed-form azimuthal integral through K and E.
    Elliptic,
}

/// Planar (`z = 0`) potential by direct double quadrature.
pub fn a_phi_finite_plane_quadrature(
    rho: f64,
    spec: &SolenoidSpec,
    quad: &QuadratureConfig,
) -> Result<f64, PotentialError> {
    a_phi_finite(&FieldPoint::planar(rho), spec, quad, PotentialMethod::Quadrature)
}

/// Planar (`z = 0`) potential through complete elliptic integrals.
pub fn a_phi_finite_elliptic(rho: f64, spec: &SolenoidSpec, quad: &QuadratureConfig) -> Result<f64, PotentialError> {
    a_phi_finite(&FieldPoint::planar(rho), spec, quad, PotentialMethod::Elliptic)
}

/// Off-plane potential by direct double quadrature.
pub fn a_phi_finite_3d(point: &FieldPoint, spec: &SolenoidSpec, quad: &QuadratureConfig) -> Result<f64, PotentialError> {
    a_phi_finite(point, spec, quad, PotentialMethod::Quadrature)
}

/// Potential of the solenoid at `point`.
///
/// `HalfLength::Infinite` routes to [`a_phi_infinite`]. The integrand is
/// even under `(z, z′) → (−z, −z′)`, so only `|z|` is used; in the plane the
/// axial integral is folded onto `[0, L]`.
pub fn a_phi_finite(
    point: &FieldPoint,
    spec: &SolenoidSpec,
    quad: &QuadratureConfig,
    method: PotentialMethod,
) -> Result<f64, PotentialError> {
    spec.validate()?;
    quad.validate()?;
    point.validate()?;
    let rho = point.rho();
    let z = point.z().abs();
    if point.on_border(spec) {
        return Err(PotentialError::OnBorder { rho, z: point.z() });
    }
    let half_length = match spec.half_length {
        HalfLength::Infinite => return Ok(a_phi_infinite_rho(rho, spec)),
        HalfLength::Finite(l) => l,
    };
    if rho == 0.0 || spec.flux == 0.0 {
        return Ok(0.0);
    }
    let a = spec.radius;
    let axial = |zp: f64| -> Result<f64, PotentialError> {
        let dz = z - zp;
        match method {
            PotentialMethod::Quadrature => {
                let p = rho * rho + a * a + dz * dz;
                let q = 2.0 * a * rho;
                periodic_even_trapezoid(|phi| phi.cos() / (p - q * phi.cos()).sqrt(), quad).map(|e| e.value)
            }
            PotentialMethod::Elliptic => {
                let d2 = (a + rho) * (a + rho) + dz * dz;
                let k = (4.0 * a * rho / d2).sqrt().min(1.0);
                Ok(4.0 * loop_bracket_over_k2(k)? / d2.sqrt())
            }
        }
    };
    let axial_integral = integrate_axial(axial, z, half_length, quad)?;
    Ok(spec.prefactor() * axial_integral)
}

/// `∫_{−L}^{L} g(z′) dz′`, split at the observation height so the near-wall
/// peak of the integrand sits on a panel boundary.
fn integrate_axial<G>(g: G, z: f64, half_length: f64, quad: &QuadratureConfig) -> Result<f64, PotentialError>
where
    G: Fn(f64) -> Result<f64, PotentialError>,
{
    let mut failure: Option<PotentialError> = None;
    let mut guarded = |zp: f64| match g(zp) {
        Ok(v) => v,
        Err(e) => {
            if failure.is_none() {
                failure = Some(e);
            }
            0.0
        }
    };
    let total = if z == 0.0 {
        2.0 * integrate_adaptive(&mut guarded, 0.0, half_length, quad)?.value
    } else {
        let split = z.min(half_length);
        let lower = integrate_adaptive(&mut guarded, -half_length, split, quad)?.value;
        let upper = integrate_adaptive(&mut guarded, split, half_length, quad)?.value;
        lower + upper
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Far-field closed form for `ρ = r sin θ ≫ a`:
///
/// ```text
/// (Φ/2π) · r sin θ / (r² + a² − r² cos² θ) · [α(L − r cos θ) + β(L + r cos θ)] / (2αβ)
/// α = √(r² + a² + L² + 2 r L cos θ),  β = √(r² + a² + L² − 2 r L cos θ)
/// ```
///
/// For `L = ∞` the last factor is 1.
pub fn far_field_approx(point: &FieldPoint, spec: &SolenoidSpec) -> f64 {
    let rho = point.rho();
    let z = point.z();
    let a = spec.radius;
    let r2 = rho * rho + z * z;
    let base = spec.flux / (2.0 * PI) * rho / (r2 + a * a - z * z);
    match spec.half_length {
        HalfLength::Infinite => base,
        HalfLength::Finite(l) => {
            let common = r2 + a * a + l * l;
            let alpha = (common + 2.0 * z * l).sqrt();
            let beta = (common - 2.0 * z * l).sqrt();
            base * (alpha * (l - z) + beta * (l + z)) / (2.0 * alpha * beta)
        }
    }
}

/// Power-law fit `|A_φ − A_{L,φ}| ≈ prefactor · L^{−exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Least-squares slope of `log|err|` against `log L`, sign flipped.
pub fn fit_power_law(lengths: &[f64], errors: &[f64]) -> Result<RateFit, PotentialError> {
    if lengths.len() != errors.len() {
        return Err(PotentialError::Fit("length and error lists differ in size".into()));
    }
    if lengths.len() < 4 {
        return Err(PotentialError::Fit(format!(
            "need at least 4 points, got {}",
            lengths.len()
        )));
    }
    if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(PotentialError::Fit("lengths must be positive and finite".into()));
    }
    if errors.iter().any(|&e| !(e.abs() > 0.0) || !e.is_finite()) {
        return Err(PotentialError::Fit(
            "zero difference reached (machine-precision floor); use a smaller L range".into(),
        ));
    }
    let xs: Vec<f64> = lengths.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(PotentialError::Fit("all lengths are equal".into()));
    }
    let slope = sxy / sxx;
    if slope == 0.0 {
        return Err(PotentialError::Fit(
            "differences do not decay with L; exponent undefined".into(),
        ));
    }
    Ok(RateFit {
        exponent: -slope,
        prefactor: (my - slope * mx).exp(),
    })
}

/// Fits the decay of the finite-length error at radius `rho` over `lengths`.
pub fn fit_convergence_rate(
    rho: f64,
    spec: &SolenoidSpec,
    lengths: &[f64],
    quad: &QuadratureConfig,
) -> Result<RateFit, PotentialError> {
    if lengths.len() < 4 {
        return Err(PotentialError::Fit(format!(
            "need at least 4 lengths, got {}",
            lengths.len()
        )));
    }
    if lengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PotentialError::Fit("lengths must be strictly ascending".into()));
    }
    if lengths.iter().any(|l| !l.is_finite()) {
        return Err(PotentialError::InfiniteLength);
    }
    if lengths[lengths.len() - 1] < 10.0 * lengths[0] {
        return Err(PotentialError::Fit("lengths must span at least one decade".into()));
    }
    let point = FieldPoint::planar(rho);
    let reference = a_phi_infinite(&point, spec);
    let errors = lengths
        .iter()
        .map(|&l| {
            let finite = spec.with_half_length(HalfLength::Finite(l));
            a_phi_finite(&point, &finite, quad, PotentialMethod::Quadrature).map(|v| reference - v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    fit_power_law(lengths, &errors)
}
