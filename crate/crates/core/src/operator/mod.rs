//! Magnetic Schrödinger operators on a uniform square lattice.
//!
//! The continuum operator `(−i∇ − (q/c)A)² + V` is discretised with Peierls
//! phases on the five-point stencil, so that `θ_{jk} = (q/c)∫_j^k A·dl` enters
//! as `e^{−iθ_{jk}}` on the link from `j` to `k`. The plane is truncated to
//! `[−R, R]²` with Dirichlet conditions on the outer ring.

mod gauge;
mod grid;
mod hamiltonian;

use thiserror::Error;

pub use gauge::{build_gauge_field, midpoint_phase, rectangle_loop, GaugeField};
pub use grid::Grid2D;
pub use hamiltonian::{assemble, Barrier, DiscreteHamiltonian, OperatorMeta, Variant};

use crate::linalg::{smallest_eigenvalues, EigenConfig, EigenError};
use crate::potential::{PotentialError, QuadratureConfig, SolenoidSpec};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("invalid operator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Gauge field and assembly in one step.
pub fn build_hamiltonian(
    grid: &Grid2D,
    spec: &SolenoidSpec,
    barrier: Barrier,
    quad: &QuadratureConfig,
) -> Result<DiscreteHamiltonian, OperatorError> {
    let gauge = build_gauge_field(grid, spec, quad)?;
    assemble(grid, &gauge, barrier, spec)
}

/// Lowest `count` eigenvalues of the lattice operator, ascending.
pub fn lowest_eigenvalues(h: &DiscreteHamiltonian, count: usize) -> Result<Vec<f64>, OperatorError> {
    Ok(smallest_eigenvalues(h.matrix(), count, &EigenConfig::default())?)
}
