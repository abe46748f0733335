use std::fmt::Write as _;

use clap::Args;

use abflux::potential::{
    a_phi_finite, a_phi_finite_3d, a_phi_infinite, far_field_approx, fit_convergence_rate, FieldPoint, HalfLength,
    PotentialError, PotentialMethod, QuadratureConfig, SolenoidSpec,
};

use super::{emit, num};
use crate::{CliError, Method, PotentialCommand};

#[derive(Args, Clone, Debug)]
pub struct PointArgs {
    /// Cylindrical radius ρ
    #[arg(long, conflicts_with_all = ["r", "theta"])]
    rho: Option<f64>,
    /// Axial coordinate z (with --rho)
    #[arg(long, default_value_t = 0.0, conflicts_with_all = ["r", "theta"])]
    z: f64,
    /// Spherical radius r
    #[arg(long, requires = "theta")]
    r: Option<f64>,
    /// Polar angle θ in radians
    #[arg(long, requires = "r")]
    theta: Option<f64>,
}

impl PointArgs {
    fn point(&self) -> Result<FieldPoint, CliError> {
        match (self.rho, self.r, self.theta) {
            (Some(rho), None, None) => Ok(FieldPoint::Cylindrical { rho, z: self.z }),
            (None, Some(r), Some(theta)) => Ok(FieldPoint::Spherical { r, theta }),
            _ => Err(CliError::Config("give either --rho [--z] or --r with --theta".into())),
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Quadrature => "quadrature",
        Method::Elliptic => "elliptic",
        Method::ThreeD => "three-d",
        Method::FarField => "far-field",
        Method::Infinite => "infinite",
    }
}

fn evaluate(point: &FieldPoint, spec: &SolenoidSpec, quad: &QuadratureConfig, method: Method) -> Result<f64, PotentialError> {
    match method {
        Method::Quadrature => a_phi_finite(point, spec, quad, PotentialMethod::Quadrature),
        Method::Elliptic => a_phi_finite(point, spec, quad, PotentialMethod::Elliptic),
        Method::ThreeD => a_phi_finite_3d(point, spec, quad),
        Method::FarField => Ok(far_field_approx(point, spec)),
        Method::Infinite => Ok(a_phi_infinite(point, spec)),
    }
}

fn status(err: &PotentialError) -> String {
    match err {
        PotentialError::OnBorder { .. } => "border".into(),
        other => format!("error: {}", other.to_string().replace(',', ";")),
    }
}

fn header(out: &mut String, title: &str, spec: &SolenoidSpec, columns: &str) {
    let _ = writeln!(out, "# abflux potential {title}");
    let _ = writeln!(
        out,
        "# radius {} flux {} coupling {} half_length {}",
        spec.radius, spec.flux, spec.coupling, spec.half_length
    );
    let _ = writeln!(out, "# columns: {columns}");
    let _ = writeln!(out, "{columns}");
}

/// Appends one row per point and returns how many succeeded.
fn rows(
    out: &mut String,
    points: &[(String, FieldPoint)],
    spec: &SolenoidSpec,
    quad: &QuadratureConfig,
    method: Method,
) -> usize {
    let mut ok = 0;
    for (coords, p) in points {
        match evaluate(p, spec, quad, method) {
            Ok(v) => {
                ok += 1;
                let _ = writeln!(out, "{coords},{},{},ok", method_name(method), num(v));
            }
            Err(e) => {
                let _ = writeln!(out, "{coords},{},,{}", method_name(method), status(&e));
            }
        }
    }
    ok
}

fn require_some(ok: usize) -> Result<(), CliError> {
    if ok == 0 {
        Err(CliError::Numerical("no point could be evaluated".into()))
    } else {
        Ok(())
    }
}

fn coords(p: &FieldPoint) -> String {
    match *p {
        FieldPoint::Cylindrical { rho, z } => format!("{rho},{z}"),
        FieldPoint::Spherical { r, theta } => format!("{r},{theta}"),
    }
}

pub fn run(cmd: PotentialCommand) -> Result<(), CliError> {
    match cmd {
        PotentialCommand::Eval { physics, point, method } => {
            let cfg = physics.load()?;
            let spec = physics.spec(cfg.as_ref(), HalfLength::Infinite)?;
            let quad = physics.quadrature(cfg.as_ref());
            let p = point.point()?;
            let cols = match p {
                FieldPoint::Cylindrical { .. } => "rho,z,method,value,status",
                FieldPoint::Spherical { .. } => "r,theta,method,value,status",
            };
            let mut out = String::new();
            header(&mut out, "eval", &spec, cols);
            let ok = rows(&mut out, &[(coords(&p), p)], &spec, &quad, method);
            emit(None, &out)?;
            require_some(ok)
        }
        PotentialCommand::Table {
            physics,
            min,
            max,
            count,
            theta,
            method,
            out: path,
        } => {
            let cfg = physics.load()?;
            let spec = physics.spec(cfg.as_ref(), HalfLength::Infinite)?;
            let quad = physics.quadrature(cfg.as_ref());
            if count == 0 || !(min <= max) || !min.is_finite() || !max.is_finite() {
                return Err(CliError::Config("table needs count ≥ 1 and finite min ≤ max".into()));
            }
            let radii: Vec<f64> = (0..count)
                .map(|i| {
                    if count == 1 {
                        min
                    } else {
                        min + (max - min) * i as f64 / (count - 1) as f64
                    }
                })
                .collect();
            let points: Vec<(String, FieldPoint)> = if theta.is_empty() {
                radii.iter().map(|&rho| FieldPoint::Cylindrical { rho, z: 0.0 }).map(|p| (coords(&p), p)).collect()
            } else {
                theta
                    .iter()
                    .flat_map(|&t| radii.iter().map(move |&r| FieldPoint::Spherical { r, theta: t }))
                    .map(|p| (coords(&p), p))
                    .collect()
            };
            let cols = if theta.is_empty() {
                "rho,z,method,value,status"
            } else {
                "r,theta,method,value,status"
            };
            let mut text = String::new();
            header(&mut text, "table", &spec, cols);
            let ok = rows(&mut text, &points, &spec, &quad, method);
            emit(path.as_deref(), &text)?;
            require_some(ok)
        }
        PotentialCommand::Rate { physics, rho, lengths } => {
            let cfg = physics.load()?;
            let spec = physics.spec(cfg.as_ref(), HalfLength::Finite(lengths.first().copied().unwrap_or(1.0)))?;
            let quad = physics.quadrature(cfg.as_ref());
            let fit = fit_convergence_rate(rho, &spec, &lengths, &quad).map_err(|e| match e {
                PotentialError::Fit(_) | PotentialError::InfiniteLength | PotentialError::InvalidSpec(_) => {
                    CliError::Config(e.to_string())
                }
                other => CliError::Numerical(other.to_string()),
            })?;
            let infinite = a_phi_infinite(&FieldPoint::planar(rho), &spec);
            let mut out = String::new();
            header(&mut out, "rate", &spec, "kind,rho,L,value");
            for &l in &lengths {
                let s = spec.with_half_length(HalfLength::Finite(l));
                let finite = a_phi_finite(&FieldPoint::planar(rho), &s, &quad, PotentialMethod::Elliptic)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                let _ = writeln!(out, "difference,{rho},{l},{}", num(infinite - finite));
            }
            let _ = writeln!(out, "exponent,{rho},,{}", num(fit.exponent));
            let _ = writeln!(out, "prefactor,{rho},,{}", num(fit.prefactor));
            emit(None, &out)
        }
        PotentialCommand::Compare { physics, rho, out: path } => {
            let cfg = physics.load()?;
            let spec = physics.spec(cfg.as_ref(), HalfLength::Finite(5.0))?;
            let quad = physics.quadrature(cfg.as_ref());
            let mut text = String::new();
            header(
                &mut text,
                "compare",
                &spec,
                "rho,quadrature,elliptic,far_field,infinite,rel_quadrature_elliptic,status",
            );
            let mut ok = 0;
            for &r in &rho {
                let p = FieldPoint::planar(r);
                let q = evaluate(&p, &spec, &quad, Method::Quadrature);
                let e = evaluate(&p, &spec, &quad, Method::Elliptic);
                let ff = num(far_field_approx(&p, &spec));
                let inf = num(a_phi_infinite(&p, &spec));
                match (q, e) {
                    (Ok(q), Ok(e)) => {
                        ok += 1;
                        let rel = if e == 0.0 { (q - e).abs() } else { ((q - e) / e).abs() };
                        let _ = writeln!(text, "{r},{},{},{ff},{inf},{},ok", num(q), num(e), num(rel));
                    }
                    (Err(err), _) | (_, Err(err)) => {
                        let _ = writeln!(text, "{r},,,{ff},{inf},,{}", status(&err));
                    }
                }
            }
            emit(path.as_deref(), &text)?;
            require_some(ok)
        }
    }
}
