use std::collections::HashMap;

use rayon::prelude::*;

use super::{Grid2D, OperatorError};
use crate::potential::{
    a_phi_finite, a_phi_infinite_rho, FieldPoint, HalfLength, PotentialMethod, QuadratureConfig, SolenoidSpec,
    BORDER_REL_TOL,
};

/// Peierls phases `θ_{jk} ≈ (q/c) ∫_j^k A·dl` on every lattice edge.
///
/// Only the rightward and upward edge of each node is stored; the reversed
/// edge reads back the negated value, so `θ_{kj} = −θ_{jk}` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    n: usize,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
}

impl GaugeField {
    pub fn zero(grid: &Grid2D) -> Self {
        Self {
            n: grid.n(),
            horizontal: vec![0.0; grid.node_count()],
            vertical: vec![0.0; grid.node_count()],
        }
    }

    /// Phase on the directed edge `from → to`; `None` unless they are lattice neighbours.
    pub fn phase(&self, from: usize, to: usize) -> Option<f64> {
        let n = self.n;
        let (fx, tx) = (from % n, to % n);
        if to == from + 1 && tx == fx + 1 {
            Some(self.horizontal[from])
        } else if from == to + 1 && fx == tx + 1 {
            Some(-self.horizontal[to])
        } else if to == from + n {
            Some(self.vertical[from])
        } else if from == to + n {
            Some(-self.vertical[to])
        } else {
            None
        }
    }

    /// Sum of phases along a closed node path (the first node is not repeated).
    pub fn loop_phase(&self, path: &[usize]) -> Result<f64, OperatorError> {
        let mut total = 0.0;
        for (i, &from) in path.iter().enumerate() {
            let to = path[(i + 1) % path.len()];
            total += self.phase(from, to).ok_or_else(|| {
                OperatorError::Config(format!("nodes {from} and {to} are not lattice neighbours"))
            })?;
        }
        Ok(total)
    }

    pub fn max_abs_phase(&self) -> f64 {
        self.horizontal
            .iter()
            .chain(&self.vertical)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Counter-clockwise node loop around the lattice rectangle `[ix0, ix1] × [iy0, iy1]`.
pub fn rectangle_loop(grid: &Grid2D, ix0: usize, iy0: usize, ix1: usize, iy1: usize) -> Vec<usize> {
    assert!(ix0 < ix1 && iy0 < iy1 && ix1 < grid.n() && iy1 < grid.n());
    let mut path = Vec::new();
    path.extend((ix0..ix1).map(|ix| grid.node(ix, iy0)));
    path.extend((iy0..iy1).map(|iy| grid.node(ix1, iy)));
    path.extend((ix0 + 1..=ix1).rev().map(|ix| grid.node(ix, iy1)));
    path.extend((iy0 + 1..=iy1).rev().map(|iy| grid.node(ix0, iy)));
    path
}

/// Radius at which the potential is sampled for a midpoint at `rho`.
/// Midpoints on the wall are pushed outward by twice the border tolerance.
fn sample_radius(rho: f64, spec: &SolenoidSpec) -> f64 {
    let a = spec.radius;
    if (rho - a).abs() < BORDER_REL_TOL * a {
        a * (1.0 + 2.0 * BORDER_REL_TOL)
    } else {
        rho
    }
}

/// Midpoint-rule phase for the straight edge `p0 → p1`, given the azimuthal
/// potential profile `A_φ(ρ)`.
pub fn midpoint_phase(p0: [f64; 2], p1: [f64; 2], spec: &SolenoidSpec, profile: impl Fn(f64) -> f64) -> f64 {
    let mx = 0.5 * (p0[0] + p1[0]);
    let my = 0.5 * (p0[1] + p1[1]);
    let rho = mx.hypot(my);
    if rho == 0.0 {
        return 0.0;
    }
    let tangent = (-my * (p1[0] - p0[0]) + mx * (p1[1] - p0[1])) / rho;
    spec.coupling * profile(sample_radius(rho, spec)) * tangent
}

fn edge_midpoint_radius(grid: &Grid2D, from: usize, to: usize) -> f64 {
    let [x0, y0] = grid.position(from);
    let [x1, y1] = grid.position(to);
    (0.5 * (x0 + x1)).hypot(0.5 * (y0 + y1))
}

/// Evaluates `A_φ` once per distinct sampling radius.
fn tabulate_profile(
    grid: &Grid2D,
    spec: &SolenoidSpec,
    quad: &QuadratureConfig,
) -> Result<HashMap<u64, f64>, OperatorError> {
    let n = grid.n();
    let mut radii: Vec<f64> = Vec::with_capacity(2 * grid.node_count());
    for node in 0..grid.node_count() {
        let (ix, iy) = grid.indices(node);
        if ix + 1 < n {
            radii.push(sample_radius(edge_midpoint_radius(grid, node, node + 1), spec));
        }
        if iy + 1 < n {
            radii.push(sample_radius(edge_midpoint_radius(grid, node, node + n), spec));
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let values = radii
        .par_iter()
        .map(|&rho| match spec.half_length {
            HalfLength::Infinite => Ok(a_phi_infinite_rho(rho, spec)),
            HalfLength::Finite(_) => a_phi_finite(&FieldPoint::planar(rho), spec, quad, PotentialMethod::Elliptic),
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(radii.iter().map(|r| r.to_bits()).zip(values).collect())
}

/// Peierls phases for the in-plane restriction of the solenoid potential.
///
/// Finite solenoids use the elliptic reduction of the loop integral; the
/// infinite solenoid uses the closed-form gauge.
pub fn build_gauge_field(
    grid: &Grid2D,
    spec: &SolenoidSpec,
    quad: &QuadratureConfig,
) -> Result<GaugeField, OperatorError> {
    grid.validate()?;
    spec.validate()?;
    let mut field = GaugeField::zero(grid);
    if spec.flux == 0.0 || spec.coupling == 0.0 {
        return Ok(field);
    }
    let table = tabulate_profile(grid, spec, quad)?;
    let profile = |rho: f64| table[&rho.to_bits()];
    let n = grid.n();
    for node in 0..grid.node_count() {
        let (ix, iy) = grid.indices(node);
        let p0 = grid.position(node);
        if ix + 1 < n {
            field.horizontal[node] = midpoint_phase(p0, grid.position(node + 1), spec, profile);
        }
        if iy + 1 < n {
            field.vertical[node] = midpoint_phase(p0, grid.position(node + n), spec, profile);
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(l: HalfLength) -> SolenoidSpec {
        SolenoidSpec::new(1.0, 2.0 * PI, l, 0.5).unwrap()
    }

    /// Exact `(q/c) ∫ A·dl` along a straight segment outside the disk for the
    /// infinite solenoid: `(q/c) Φ/(2π)` times the swept polar angle.
    fn exact_outside_segment(p0: [f64; 2], p1: [f64; 2], s: &SolenoidSpec) -> f64 {
        let cross = p0[0] * p1[1] - p0[1] * p1[0];
        let dot = p0[0] * p1[0] + p0[1] * p1[1];
        s.coupling * s.flux / (2.0 * PI) * cross.atan2(dot)
    }

    fn plaquette_sum(center: [f64; 2], h: f64, s: &SolenoidSpec) -> (f64, f64) {
        let c = [
            [center[0] - h / 2.0, center[1] - h / 2.0],
            [center[0] + h / 2.0, center[1] - h / 2.0],
            [center[0] + h / 2.0, center[1] + h / 2.0],
            [center[0] - h / 2.0, center[1] + h / 2.0],
        ];
        let profile = |rho: f64| a_phi_infinite_rho(rho, s);
        let mut mid = 0.0;
        let mut exact = 0.0;
        for i in 0..4 {
            mid += midpoint_phase(c[i], c[(i + 1) % 4], s, profile);
            exact += exact_outside_segment(c[i], c[(i + 1) % 4], s);
        }
        (mid, exact)
    }

    #[test]
    fn zero_flux_gives_zero_phases() {
        let g = Grid2D::new(4.0, 16).unwrap();
        let f = build_gauge_field(&g, &spec(HalfLength::Finite(3.0)).with_flux(0.0), &QuadratureConfig::default())
            .unwrap();
        assert_eq!(f.max_abs_phase(), 0.0);
    }

    #[test]
    fn antisymmetry_is_exact() {
        let g = Grid2D::new(4.0, 16).unwrap();
        let f = build_gauge_field(&g, &spec(HalfLength::Infinite), &QuadratureConfig::default()).unwrap();
        for node in 0..g.node_count() {
            for nb in g.neighbours(node) {
                assert_eq!(f.phase(node, nb).unwrap(), -f.phase(nb, node).unwrap());
            }
        }
        assert!(f.phase(0, 2).is_none());
        // no wrap-around between rows
        assert!(f.phase(15, 16).is_none());
    }

    #[test]
    fn plaquette_outside_disk_is_flux_free_at_high_order() {
        let s = spec(HalfLength::Infinite);
        let center = [2.3, 1.1];
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| {
                let (mid, exact) = plaquette_sum(center, h, &s);
                assert!(exact.abs() < 1e-14);
                (mid - exact).abs()
            })
            .collect();
        assert!(errs[0] < 1e-3);
        // at least third order per plaquette
        assert!(errs[0] / errs[1] > 7.0, "{errs:?}");
        assert!(errs[1] / errs[2] > 7.0, "{errs:?}");
    }

    #[test]
    fn enclosing_loop_carries_full_flux() {
        let s = spec(HalfLength::Infinite);
        let g = Grid2D::new(6.0, 64).unwrap();
        let f = build_gauge_field(&g, &s, &QuadratureConfig::default()).unwrap();
        let target = s.coupling * s.flux;
        for (lo, hi) in [(16, 47), (8, 55), (20, 40)] {
            let sum = f.loop_phase(&rectangle_loop(&g, lo, lo, hi, hi)).unwrap();
            assert!((sum - target).abs() < 5.0 * g.spacing(), "{sum} vs {target}");
        }
        // loop in one quadrant, away from the disk
        let off = f.loop_phase(&rectangle_loop(&g, 45, 45, 55, 55)).unwrap();
        assert!(off.abs() < 1e-3);
    }

    #[test]
    fn finite_length_field_encloses_less_flux() {
        let g = Grid2D::new(4.0, 32).unwrap();
        let q = QuadratureConfig::default();
        let inf = build_gauge_field(&g, &spec(HalfLength::Infinite), &q).unwrap();
        let fin = build_gauge_field(&g, &spec(HalfLength::Finite(4.0)), &q).unwrap();
        let path = rectangle_loop(&g, 4, 4, 27, 27);
        let full = inf.loop_phase(&path).unwrap();
        let part = fin.loop_phase(&path).unwrap();
        assert!(part > 0.0 && part < full);
    }
}
