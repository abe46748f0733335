//! One-dimensional quadrature used by the potential evaluators.
//!
//! Two rules live here: a globally adaptive 15-point Gauss–Kronrod scheme for
//! the axial (z′) integrals, and a doubling trapezoid rule for the smooth
//! 2π-periodic azimuthal integrals.

use serde::{Deserialize, Serialize};

use super::PotentialError;

/// Tolerances shared by every adaptive integral in the potential module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, PotentialError> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(PotentialError::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(PotentialError::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(PotentialError::InvalidConfig(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value and error estimate of a converged integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// Kronrod abscissae on [-1, 1] (positive half, descending); every odd
// index is also a Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[lo, hi]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance or `max_subdivisions` panels are in play.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate, PotentialError> {
    if lo == hi {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut panels = vec![gauss_kronrod_15(&mut f, lo, hi)];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(PotentialError::Accuracy {
                estimate: value,
                error,
                tolerance: cfg.target(0.0),
            });
        }
        if error <= cfg.target(value) {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(PotentialError::Accuracy {
                estimate: value,
                error,
                tolerance: cfg.target(value),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // Panel can no longer be split in floating point.
            return Err(PotentialError::Accuracy {
                estimate: value,
                error,
                tolerance: cfg.target(value),
            });
        }
        panels.push(gauss_kronrod_15(&mut f, p.lo, mid));
        panels.push(gauss_kronrod_15(&mut f, mid, p.hi));
    }
}

const TRAPEZOID_START: usize = 16;
const TRAPEZOID_MAX: usize = 1 << 22;

/// `∫₀^{2π} g(φ) dφ` for a smooth, 2π-periodic, even `g`.
///
/// The trapezoid rule on `[0, π]` is refined by doubling (old nodes reused)
/// until two successive levels agree. For analytic periodic integrands the
/// error decays geometrically in the node count.
pub fn periodic_even_trapezoid<G: FnMut(f64) -> f64>(
    mut g: G,
    cfg: &QuadratureConfig,
) -> Result<Estimate, PotentialError> {
    use std::f64::consts::PI;

    let mut n = TRAPEZOID_START;
    // Endpoints carry half weight on [0, π].
    let mut sum = 0.5 * (g(0.0) + g(PI));
    let mut abs_sum = sum.abs();
    for j in 1..n {
        let v = g(PI * j as f64 / n as f64);
        sum += v;
        abs_sum += v.abs();
    }
    let mut prev = 2.0 * sum * PI / n as f64;
    loop {
        let doubled = 2 * n;
        for j in (1..doubled).step_by(2) {
            let v = g(PI * j as f64 / doubled as f64);
            sum += v;
            abs_sum += v.abs();
        }
        n = doubled;
        let h = PI / n as f64;
        let current = 2.0 * sum * h;
        let error = (current - prev).abs();
        let floor = 64.0 * f64::EPSILON * 2.0 * abs_sum * h;
        let target = cfg.target(current).max(floor);
        if error <= target {
            return Ok(Estimate {
                value: current,
                error,
            });
        }
        if n >= TRAPEZOID_MAX {
            return Err(PotentialError::Accuracy {
                estimate: current,
                error,
                tolerance: target,
            });
        }
        prev = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate_adaptive(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, &QuadratureConfig::default())
            .unwrap();
        assert_relative_eq!(est.value, 64.0 / 6.0 - 4.0, max_relative = 1e-14);
    }

    #[test]
    fn log_singularity_converges() {
        let est = integrate_adaptive(|x: f64| x.ln(), 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(est.value, -1.0, max_relative = 1e-9);
    }

    #[test]
    fn reports_accuracy_failure() {
        let cfg = QuadratureConfig::new(1e-15, 1e-15, 2).unwrap();
        let res = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &cfg);
        assert!(matches!(res, Err(PotentialError::Accuracy { .. })));
    }

    #[test]
    fn trapezoid_spectral_on_periodic() {
        // ∫₀^{2π} dφ / (2 − cos φ) = 2π/√3
        let est = periodic_even_trapezoid(|p| 1.0 / (2.0 - p.cos()), &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(est.value, 2.0 * PI / 3f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-8, 0).is_err());
    }
}
