use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::operator::{Barrier, Grid2D};
use crate::potential::{HalfLength, QuadratureConfig, SolenoidSpec};

/// Gaussian bump `exp(−|x − c|²/(2w²))`, cut to zero inside the disk and on
/// the outer ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub name: String,
    pub center: [f64; 2],
    pub width: f64,
}

impl Probe {
    pub fn new(name: impl Into<String>, center: [f64; 2], width: f64) -> Self {
        Self {
            name: name.into(),
            center,
            width,
        }
    }

    pub fn validate(&self, grid: &Grid2D, spec: &SolenoidSpec) -> Result<(), ExperimentError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(ExperimentError::Plan(format!(
                "probe {:?} needs a positive width",
                self.name
            )));
        }
        let [cx, cy] = self.center;
        let to_disk = cx.hypot(cy) - spec.radius;
        let to_wall = grid.extent - cx.abs().max(cy.abs());
        if to_disk <= 2.0 * self.width || to_wall <= 2.0 * self.width {
            return Err(ExperimentError::Plan(format!(
                "probe {:?} must sit more than two widths from the disk and the wall \
                 (disk gap {to_disk:.3}, wall gap {to_wall:.3}, width {})",
                self.name, self.width
            )));
        }
        Ok(())
    }

    /// Full-grid samples of the bump.
    pub fn sample(&self, grid: &Grid2D, spec: &SolenoidSpec) -> Vec<Complex64> {
        let [cx, cy] = self.center;
        let two_w2 = 2.0 * self.width * self.width;
        (0..grid.node_count())
            .map(|node| {
                if grid.is_boundary(node) || grid.inside_disk(node, spec.radius) {
                    return Complex64::new(0.0, 0.0);
                }
                let [x, y] = grid.position(node);
                Complex64::new((-((x - cx).powi(2) + (y - cy).powi(2)) / two_w2).exp(), 0.0)
            })
            .collect()
    }

    /// Grid nodes within three widths of the centre.
    pub fn support(&self, grid: &Grid2D) -> Vec<usize> {
        let [cx, cy] = self.center;
        (0..grid.node_count())
            .filter(|&node| {
                let [x, y] = grid.position(node);
                (x - cx).hypot(y - cy) <= 3.0 * self.width
            })
            .collect()
    }
}

/// Barrier sweep at a fixed solenoid length; the reference is the hard wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpermeabilityPlan {
    pub half_length: HalfLength,
    pub n_schedule: Vec<Barrier>,
}

/// Length sweep at a fixed barrier; the reference is the infinite solenoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthPlan {
    pub barrier: Barrier,
    pub length_schedule: Vec<HalfLength>,
}

/// Schedules for the three limit paths towards the Aharonov–Bohm operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramPlan {
    pub n_schedule: Vec<f64>,
    pub length_schedule: Vec<f64>,
    /// Include the path pairing `n_j` with `L_j`.
    pub diagonal: bool,
    /// Pairwise agreement required of the final path vectors, relative to `‖ψ‖`.
    pub agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub grid: Grid2D,
    /// Template; its half-length is replaced by each sweep.
    pub spec: SolenoidSpec,
    pub quadrature: QuadratureConfig,
    pub impermeability: ImpermeabilityPlan,
    pub length: LengthPlan,
    pub diagram: DiagramPlan,
    pub probes: Vec<Probe>,
    pub solver_tol: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let a = 1.0;
        Self {
            grid: Grid2D {
                extent: 6.0 * a,
                points_per_side: 64,
            },
            spec: SolenoidSpec {
                radius: a,
                flux: 2.0 * std::f64::consts::PI,
                half_length: HalfLength::Finite(4.0 * a),
                coupling: 0.5,
            },
            quadrature: QuadratureConfig::default(),
            impermeability: ImpermeabilityPlan {
                half_length: HalfLength::Finite(4.0 * a),
                n_schedule: [1e1, 1e2, 1e3, 1e4].map(Barrier::Finite).to_vec(),
            },
            length: LengthPlan {
                barrier: Barrier::Finite(1e2),
                length_schedule: [2.0, 4.0, 8.0, 16.0].map(|l| HalfLength::Finite(l * a)).to_vec(),
            },
            diagram: DiagramPlan {
                n_schedule: (1..=8).map(|e| 10f64.powi(e)).collect(),
                length_schedule: (1..=8).map(|e| 2f64.powi(e) * a).collect(),
                diagonal: true,
                agreement: 1e-3,
            },
            probes: vec![
                Probe::new("east", [3.0 * a, 0.0], 0.5 * a),
                Probe::new("north_west", [-2.0 * a, 2.5 * a], 0.5 * a),
            ],
            solver_tol: 1e-8,
        }
    }
}

fn strictly_increasing<T: Copy>(values: &[T], key: impl Fn(T) -> f64, what: &str) -> Result<(), ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::Plan(format!("{what} is empty")));
    }
    if values.windows(2).any(|w| !(key(w[0]) < key(w[1]))) {
        return Err(ExperimentError::Plan(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

pub(crate) fn barrier_key(b: Barrier) -> f64 {
    match b {
        Barrier::Finite(n) => n,
        Barrier::HardWall => f64::INFINITY,
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.grid.validate()?;
        self.spec.validate()?;
        self.quadrature.validate()?;
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return Err(ExperimentError::Plan(format!(
                "solver_tol must lie in (0, 1), got {}",
                self.solver_tol
            )));
        }
        for b in &self.impermeability.n_schedule {
            b.validate()?;
        }
        self.length.barrier.validate()?;
        strictly_increasing(&self.impermeability.n_schedule, barrier_key, "impermeability.n_schedule")?;
        strictly_increasing(&self.length.length_schedule, HalfLength::value, "length.length_schedule")?;
        if self.length.length_schedule.iter().any(|l| l.value() <= 0.0) {
            return Err(ExperimentError::Plan("lengths must be positive".into()));
        }
        if self.impermeability.half_length.value() <= 0.0 {
            return Err(ExperimentError::Plan("impermeability.half_length must be positive".into()));
        }
        let d = &self.diagram;
        strictly_increasing(&d.n_schedule, |x| x, "diagram.n_schedule")?;
        strictly_increasing(&d.length_schedule, |x| x, "diagram.length_schedule")?;
        if d.n_schedule.iter().any(|n| !(n.is_finite() && *n >= 0.0))
            || d.length_schedule.iter().any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(ExperimentError::Plan(
                "diagram schedules must hold finite values (n ≥ 0, L > 0)".into(),
            ));
        }
        if d.diagonal && d.n_schedule.len() != d.length_schedule.len() {
            return Err(ExperimentError::Plan(format!(
                "diagonal path pairs n_j with L_j but schedules have {} and {} entries",
                d.n_schedule.len(),
                d.length_schedule.len()
            )));
        }
        if !(d.agreement > 0.0) {
            return Err(ExperimentError::Plan("diagram.agreement must be positive".into()));
        }
        if self.probes.is_empty() {
            return Err(ExperimentError::Plan("at least one probe is required".into()));
        }
        for p in &self.probes {
            p.validate(&self.grid, &self.spec)?;
        }
        Ok(())
    }

    pub fn spec_with(&self, half_length: HalfLength) -> SolenoidSpec {
        self.spec.with_half_length(half_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_is_valid_and_round_trips() {
        let plan = ExperimentPlan::default();
        plan.validate().unwrap();
        assert!(plan.grid.warnings(&plan.spec).is_empty());
        let text = serde_json::to_string(&plan).unwrap();
        let back: ExperimentPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn rejects_bad_schedules_and_probes() {
        let mut plan = ExperimentPlan::default();
        plan.impermeability.n_schedule = vec![Barrier::Finite(10.0), Barrier::Finite(10.0)];
        assert!(plan.validate().is_err());

        let mut plan = ExperimentPlan::default();
        plan.impermeability.n_schedule.push(Barrier::HardWall);
        plan.length.length_schedule.push(HalfLength::Infinite);
        plan.validate().unwrap();

        let mut plan = ExperimentPlan::default();
        plan.probes.push(Probe::new("close", [1.5, 0.0], 0.5));
        assert!(plan.validate().is_err());

        let mut plan = ExperimentPlan::default();
        plan.diagram.length_schedule.pop();
        assert!(plan.validate().is_err());
        plan.diagram.diagonal = false;
        plan.validate().unwrap();
    }

    #[test]
    fn probe_vanishes_inside_disk() {
        let plan = ExperimentPlan::default();
        let psi = plan.probes[0].sample(&plan.grid, &plan.spec);
        for (node, v) in psi.iter().enumerate() {
            if plan.grid.inside_disk(node, 1.0) || plan.grid.is_boundary(node) {
                assert_eq!(v.norm(), 0.0);
            }
        }
        assert!(psi.iter().any(|v| v.re > 0.9));
    }
}
