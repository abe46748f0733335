use serde::{Deserialize, Serialize};

use super::OperatorError;
use crate::potential::SolenoidSpec;

/// Uniform `N × N` lattice on the square `[−R, R]²`.
///
/// Nodes on the outer edge of the square carry the Dirichlet truncation and
/// are never unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2D {
    pub extent: f64,
    pub points_per_side: usize,
}

impl Grid2D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(extent: f64, points_per_side: usize) -> Result<Self, OperatorError> {
        let grid = Self {
            extent,
            points_per_side,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(OperatorError::Config(format!(
                "grid extent must be positive, got {}",
                self.extent
            )));
        }
        if self.points_per_side < Self::MIN_POINTS {
            return Err(OperatorError::Config(format!(
                "grid needs at least {} points per side, got {}",
                Self::MIN_POINTS,
                self.points_per_side
            )));
        }
        Ok(())
    }

    /// Soft geometry checks: the disk should sit well inside the box and be
    /// resolved by several cells.
    pub fn warnings(&self, spec: &SolenoidSpec) -> Vec<String> {
        let mut out = Vec::new();
        if spec.radius >= self.extent / 2.0 {
            out.push(format!(
                "solenoid radius {} is not below half the box extent {}",
                spec.radius, self.extent
            ));
        }
        if self.spacing() >= spec.radius / 4.0 {
            out.push(format!(
                "grid spacing {:.4} does not resolve the disk (want h < a/4 = {:.4})",
                self.spacing(),
                spec.radius / 4.0
            ));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.points_per_side
    }

    pub fn node_count(&self) -> usize {
        self.points_per_side * self.points_per_side
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.points_per_side - 1) as f64
    }

    /// Coordinate of lattice line `i`; exactly antisymmetric about the centre.
    pub fn coord(&self, i: usize) -> f64 {
        let last = (self.points_per_side - 1) as f64;
        self.extent * (2.0 * i as f64 - last) / last
    }

    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.points_per_side + ix
    }

    pub fn indices(&self, node: usize) -> (usize, usize) {
        (node % self.points_per_side, node / self.points_per_side)
    }

    pub fn position(&self, node: usize) -> [f64; 2] {
        let (ix, iy) = self.indices(node);
        [self.coord(ix), self.coord(iy)]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let (ix, iy) = self.indices(node);
        let last = self.points_per_side - 1;
        ix == 0 || iy == 0 || ix == last || iy == last
    }

    /// Cell-centre disk membership: strictly inside iff `ρ < a`.
    pub fn inside_disk(&self, node: usize, radius: f64) -> bool {
        let [x, y] = self.position(node);
        x.hypot(y) < radius
    }

    /// Lattice neighbours (left, right, down, up) that exist on the grid.
    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> {
        let (ix, iy) = self.indices(node);
        let n = self.points_per_side;
        [
            (ix > 0).then(|| node - 1),
            (ix + 1 < n).then(|| node + 1),
            (iy > 0).then(|| node - n),
            (iy + 1 < n).then(|| node + n),
        ]
        .into_iter()
        .flatten()
    }

    /// Lattice line closest to coordinate `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let last = (self.points_per_side - 1) as f64;
        (((x / self.extent) * last + last) / 2.0).round().clamp(0.0, last) as usize
    }

    /// Same box with the spacing halved (`2N − 1` points); old lines are kept.
    pub fn refined(&self) -> Self {
        Self {
            extent: self.extent,
            points_per_side: 2 * self.points_per_side - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::HalfLength;

    #[test]
    fn coordinates_are_symmetric() {
        let g = Grid2D::new(6.0, 64).unwrap();
        assert_eq!(g.coord(0), -6.0);
        assert_eq!(g.coord(63), 6.0);
        for i in 0..64 {
            assert_eq!(g.coord(i), -g.coord(63 - i));
        }
        assert!((g.spacing() - 12.0 / 63.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_keeps_lines() {
        let g = Grid2D::new(8.0, 16).unwrap();
        let f = g.refined();
        for i in 0..16 {
            assert!((g.coord(i) - f.coord(2 * i)).abs() < 1e-14);
        }
        assert_eq!(f.nearest_index(g.coord(5)), 10);
    }

    #[test]
    fn rejects_tiny_grid_and_warns() {
        assert!(Grid2D::new(1.0, 7).is_err());
        assert!(Grid2D::new(0.0, 10).is_err());
        let spec = SolenoidSpec::new(1.0, 1.0, HalfLength::Infinite, 1.0).unwrap();
        assert!(Grid2D::new(6.0, 64).unwrap().warnings(&spec).is_empty());
        assert_eq!(Grid2D::new(1.5, 8).unwrap().warnings(&spec).len(), 2);
    }
}
