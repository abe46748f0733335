//! Run configuration document.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "solenoid": { "radius": 1.0, "flux": 6.283185307179586, "coupling": 0.5, "half_length": 4.0 },
//!   "grid": { "extent": 6.0, "points_per_side": 64 },
//!   "quadrature": { "abs_tol": 1e-13, "rel_tol": 1e-10, "max_subdivisions": 2000 },
//!   "experiment": { "solver_tol": 1e-8, "probes": [ ... ], "impermeability": { ... }, "length": { ... }, "diagram": { ... } }
//! }
//! ```
//!
//! `radius`, `flux` and `coupling` are mandatory. Everything else falls back to
//! the library defaults. Unknown keys are rejected at every level.

use std::path::Path;

use serde::Deserialize;

use abflux::experiment::{DiagramPlan, ExperimentPlan, ImpermeabilityPlan, LengthPlan, Probe};
use abflux::operator::Grid2D;
use abflux::potential::{HalfLength, QuadratureConfig, SolenoidSpec};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolenoidSection {
    pub radius: f64,
    pub flux: f64,
    pub coupling: f64,
    #[serde(default)]
    pub half_length: Option<HalfLength>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub solver_tol: Option<f64>,
    pub probes: Option<Vec<Probe>>,
    pub impermeability: Option<ImpermeabilityPlan>,
    pub length: Option<LengthPlan>,
    pub diagram: Option<DiagramPlan>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub solenoid: SolenoidSection,
    #[serde(default)]
    pub grid: Option<Grid2D>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let mut plan = ExperimentPlan::default();
        let s = &self.solenoid;
        plan.spec = SolenoidSpec::new(
            s.radius,
            s.flux,
            s.half_length.unwrap_or(plan.spec.half_length),
            s.coupling,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(g) = self.grid {
            plan.grid = g;
        }
        if let Some(q) = self.quadrature {
            plan.quadrature = q;
        }
        let e = self.experiment.clone();
        if let Some(v) = e.solver_tol {
            plan.solver_tol = v;
        }
        if let Some(v) = e.probes {
            plan.probes = v;
        }
        if let Some(v) = e.impermeability {
            plan.impermeability = v;
        }
        if let Some(v) = e.length {
            plan.length = v;
        }
        if let Some(v) = e.diagram {
            plan.diagram = v;
        }
        plan.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(plan)
    }
}
