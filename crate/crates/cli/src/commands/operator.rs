use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abflux::operator::{
    assemble, build_gauge_field, lowest_eigenvalues, rectangle_loop, DiscreteHamiltonian, GaugeField, Grid2D,
    OperatorError,
};
use abflux::potential::{HalfLength, SolenoidSpec};
use abflux::resolvent::DIRECT_FALLBACK_MAX_DIM;

use super::{emit, num};
use crate::{CliError, LatticeArgs, OperatorCommand};

fn op_err(e: OperatorError) -> CliError {
    match e {
        OperatorError::Config(m) => CliError::Config(m),
        other => CliError::Numerical(other.to_string()),
    }
}

struct Built {
    grid: Grid2D,
    spec: SolenoidSpec,
    gauge: GaugeField,
    h: DiscreteHamiltonian,
}

fn build(lattice: &LatticeArgs) -> Result<Built, CliError> {
    let cfg = lattice.physics.load()?;
    let spec = lattice.physics.spec(cfg.as_ref(), HalfLength::Infinite)?;
    let grid = lattice.grid(cfg.as_ref())?;
    for w in grid.warnings(&spec) {
        eprintln!("abflux: warning: {w}");
    }
    let quad = lattice.physics.quadrature(cfg.as_ref());
    let gauge = build_gauge_field(&grid, &spec, &quad).map_err(op_err)?;
    let h = assemble(&grid, &gauge, lattice.barrier, &spec).map_err(op_err)?;
    Ok(Built { grid, spec, gauge, h })
}

fn guard(h: &DiscreteHamiltonian, allow_large: bool) -> Result<(), CliError> {
    if h.dim() > DIRECT_FALLBACK_MAX_DIM && !allow_large {
        return Err(CliError::Guard(format!(
            "operator dimension {} exceeds {DIRECT_FALLBACK_MAX_DIM}; pass --allow-large to proceed",
            h.dim()
        )));
    }
    Ok(())
}

fn header(out: &mut String, title: &str, b: &Built, columns: &str) {
    let _ = writeln!(out, "# abflux operator {title}");
    let _ = writeln!(
        out,
        "# grid extent {} points_per_side {}; radius {} flux {} coupling {} half_length {}; barrier {} variant {} dimension {}",
        b.grid.extent,
        b.grid.points_per_side,
        b.spec.radius,
        b.spec.flux,
        b.spec.coupling,
        b.spec.half_length,
        b.h.meta().barrier,
        b.h.meta().variant,
        b.h.dim()
    );
    let _ = writeln!(out, "# columns: {columns}");
    let _ = writeln!(out, "{columns}");
}

pub fn run(cmd: OperatorCommand) -> Result<(), CliError> {
    match cmd {
        OperatorCommand::Assemble { lattice, out } => {
            let b = build(&lattice)?;
            let mut buf = Vec::new();
            b.h.write_triplets(&mut buf).expect("writing to memory");
            emit(Some(&out), &String::from_utf8(buf).expect("ascii output"))?;
            println!("wrote {} entries (dimension {}) to {}", b.h.matrix().nnz(), b.h.dim(), out.display());
            Ok(())
        }
        OperatorCommand::Spectrum {
            lattice,
            count,
            allow_large,
        } => {
            let b = build(&lattice)?;
            guard(&b.h, allow_large)?;
            let values = lowest_eigenvalues(&b.h, count).map_err(op_err)?;
            let mut out = String::new();
            header(&mut out, "spectrum", &b, "index,eigenvalue");
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{i},{}", num(*v));
            }
            emit(None, &out)
        }
        OperatorCommand::GaugeCheck { lattice } => {
            let b = build(&lattice)?;
            let g = &b.grid;
            let n = g.n();
            let target = b.spec.coupling * b.spec.flux;
            let mut out = String::new();
            header(&mut out, "gauge-check", &b, "check,detail,value,reference");

            // squares centred on the disk, from just outside it to just inside the wall
            let lo_min = g.nearest_index(-(b.spec.radius + g.spacing()).min(g.extent));
            let mut checked = 0;
            for lo in (1..=lo_min).rev().step_by((lo_min / 4).max(1)) {
                let hi = n - 1 - lo;
                if hi <= lo || g.coord(hi) <= b.spec.radius {
                    continue;
                }
                let sum = b.gauge.loop_phase(&rectangle_loop(g, lo, lo, hi, hi)).map_err(op_err)?;
                let _ = writeln!(out, "enclosing_loop,half_side={},{},{}", g.coord(hi), num(sum), num(target));
                checked += 1;
            }
            if checked == 0 {
                return Err(CliError::Config("grid too small for an enclosing loop".into()));
            }

            let mut worst: f64 = 0.0;
            for iy in 0..n - 1 {
                for ix in 0..n - 1 {
                    let corners = [g.node(ix, iy), g.node(ix + 1, iy), g.node(ix + 1, iy + 1), g.node(ix, iy + 1)];
                    if corners.iter().any(|&c| g.position(c)[0].hypot(g.position(c)[1]) <= b.spec.radius + g.spacing()) {
                        continue;
                    }
                    worst = worst.max(b.gauge.loop_phase(&corners).map_err(op_err)?.abs());
                }
            }
            let _ = writeln!(out, "max_exterior_plaquette,,{},{}", num(worst), num(0.0));

            if b.h.dim() <= DIRECT_FALLBACK_MAX_DIM {
                let count = 6.min(b.h.dim());
                let base = lowest_eigenvalues(&b.h, count).map_err(op_err)?;
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                let chi: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-PI..PI)).collect();
                let moved = lowest_eigenvalues(&b.h.gauge_transform(&chi).map_err(op_err)?, count).map_err(op_err)?;
                let shift = base.iter().zip(&moved).fold(0.0_f64, |m, (a, c)| m.max((a - c).abs()));
                let _ = writeln!(out, "gauge_spectrum_shift,lowest_{count},{},{}", num(shift), num(0.0));
            }
            emit(None, &out)
        }
    }
}
