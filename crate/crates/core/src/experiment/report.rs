use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExperimentPlan;
use crate::potential::RateFit;

/// Distances along one path for one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub probe: String,
    pub probe_norm: f64,
    pub distances: Vec<f64>,
    /// Distances divided by the probe norm.
    pub relative: Vec<f64>,
    pub fit: Option<RateFit>,
    pub alarm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_mass_fraction: Option<Vec<f64>>,
    /// `sup |A_L − A|` over the probe support, per point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_gap: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub name: String,
    pub parameter: String,
    pub reference: String,
    pub points: Vec<String>,
    pub series: Vec<SeriesReport>,
}

impl PathReport {
    pub fn alarm(&self) -> bool {
        self.series.iter().any(|s| s.alarm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResidual {
    pub probe: String,
    /// Relative distances between the final path vectors.
    pub pairwise: Vec<(String, f64)>,
    /// Relative distance of each final path vector to the reference.
    pub to_reference: Vec<(String, f64)>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutativityReport {
    pub reference: String,
    pub threshold: f64,
    pub residual: f64,
    pub agree: bool,
    pub probes: Vec<ProbeResidual>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: String,
    pub version: String,
    pub shift: String,
    pub plan: ExperimentPlan,
    pub paths: Vec<PathReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutativity: Option<CommutativityReport>,
    /// Only filled on request, so that default reports are reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Twelve significant digits.
pub(crate) fn num(v: f64) -> String {
    format!("{v:.11e}")
}

impl ConvergenceReport {
    pub fn alarm(&self) -> bool {
        self.paths.iter().any(PathReport::alarm) || self.commutativity.as_ref().is_some_and(|c| !c.agree)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialise")
    }

    fn csv_header(&self, out: &mut String, columns: &str) {
        let g = &self.plan.grid;
        let s = &self.plan.spec;
        let _ = writeln!(out, "# abflux {} report, version {}", self.kind, self.version);
        let _ = writeln!(
            out,
            "# grid extent {} points_per_side {}; radius {} flux {} coupling {}; solver_tol {}; shift {}",
            g.extent, g.points_per_side, s.radius, s.flux, s.coupling, self.plan.solver_tol, self.shift
        );
        if let Some(t) = &self.timings {
            let _ = writeln!(out, "# wall_seconds {:.3} threads {}", t.wall_seconds, t.threads);
        }
        let _ = writeln!(out, "# columns: {columns}");
        let _ = writeln!(out, "{columns}");
    }

    /// One row per (path, probe, schedule point).
    pub fn paths_csv(&self) -> String {
        let mut out = String::new();
        self.csv_header(
            &mut out,
            "path,probe,parameter,point,distance,relative,interior_mass_fraction,potential_gap",
        );
        for path in &self.paths {
            for s in &path.series {
                for (i, point) in path.points.iter().enumerate() {
                    let opt = |v: &Option<Vec<f64>>| v.as_ref().map(|v| num(v[i])).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        path.name,
                        s.probe,
                        path.parameter,
                        point,
                        num(s.distances[i]),
                        num(s.relative[i]),
                        opt(&s.interior_mass_fraction),
                        opt(&s.potential_gap)
                    );
                }
            }
        }
        out
    }

    /// One row per (probe, comparison) of the final path vectors.
    pub fn commutativity_csv(&self) -> Option<String> {
        let c = self.commutativity.as_ref()?;
        let mut out = String::new();
        self.csv_header(&mut out, "probe,kind,pair,relative_distance");
        for p in &c.probes {
            for (pair, v) in &p.pairwise {
                let _ = writeln!(out, "{},pairwise,{},{}", p.probe, pair, num(*v));
            }
            for (path, v) in &p.to_reference {
                let _ = writeln!(out, "{},to_reference,{},{}", p.probe, path, num(*v));
            }
        }
        Some(out)
    }

    /// One human-readable line per path plus the commutativity residual.
    pub fn verdict_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .paths
            .iter()
            .map(|p| {
                let finals: Vec<String> = p
                    .series
                    .iter()
                    .map(|s| format!("{}={:.3e}", s.probe, s.relative.last().copied().unwrap_or(0.0)))
                    .collect();
                format!(
                    "{}: {} (final relative distance {})",
                    p.name,
                    if p.alarm() { "alarm" } else { "converged" },
                    finals.join(", ")
                )
            })
            .collect();
        if let Some(c) = &self.commutativity {
            lines.push(format!(
                "commutativity residual {:.3e} (threshold {:.1e}): {}",
                c.residual,
                c.threshold,
                if c.agree { "agree" } else { "alarm" }
            ));
        }
        lines
    }
}
