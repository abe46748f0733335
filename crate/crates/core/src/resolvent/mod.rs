//! Resolvents `R_z(H) = (H − z)⁻¹` of lattice Hamiltonians and the distances
//! between them.
//!
//! Vectors handed to [`resolvent_distance`] and [`embedded_resolvent`] live on
//! the full grid. Each operator sees only its own active nodes: the input is
//! restricted to them and the solution is zero-padded back, so operators with
//! different node sets (permeable disk versus removed disk) are compared in
//! one space. Norms are the lattice `L²` norm `‖v‖ = h (Σ |v_j|²)^{1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{gmres_shifted, BandedLu, GmresConfig};
use crate::operator::{DiscreteHamiltonian, Grid2D};
use crate::potential::SolenoidSpec;

/// Largest system for which a failed Krylov solve falls back to banded LU.
pub const DIRECT_FALLBACK_MAX_DIM: usize = 20_000;

pub const DEFAULT_TOL: f64 = 1e-8;

/// The imaginary unit, the default resolvent shift.
pub const SHIFT_I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolventError {
    #[error("resolvent shift must have nonzero imaginary part, got {0}")]
    RealShift(Complex64),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("vector has length {got}, operator expects {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("operators live on different grids")]
    GridMismatch,
    #[error("solver stopped at relative residual {residual:e} after {iterations} iterations (target {tol:e})")]
    NotConverged { residual: f64, iterations: usize, tol: f64 },
    #[error("direct factorisation hit a zero pivot at row {0}")]
    Factorisation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStrategy {
    /// Krylov first, banded LU if it stalls and the system is small enough.
    #[default]
    Auto,
    Krylov,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Krylov,
    Direct,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolventQuery<'a> {
    pub operator: &'a DiscreteHamiltonian,
    pub shift: Complex64,
    /// Right-hand side on the operator's active nodes.
    pub rhs: &'a [Complex64],
    pub tol: f64,
}

impl<'a> ResolventQuery<'a> {
    pub fn new(operator: &'a DiscreteHamiltonian, rhs: &'a [Complex64]) -> Self {
        Self {
            operator,
            shift: SHIFT_I,
            rhs,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_shift(self, shift: Complex64) -> Self {
        Self { shift, ..self }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    fn validate(&self) -> Result<(), ResolventError> {
        if self.shift.im == 0.0 || !self.shift.is_finite() {
            return Err(ResolventError::RealShift(self.shift));
        }
        if !(self.tol > 0.0) {
            return Err(ResolventError::Tolerance(self.tol));
        }
        if self.rhs.len() != self.operator.dim() {
            return Err(ResolventError::Dimension {
                got: self.rhs.len(),
                expected: self.operator.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventResult {
    pub solution: Vec<Complex64>,
    /// Euclidean norm of `ψ − (H − z)x`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

fn euclid(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(h: &DiscreteHamiltonian, shift: Complex64, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let hx = h.matrix().mul_vec(x);
    b.iter().zip(&hx).zip(x).map(|((b, hx), x)| b - (hx - shift * x)).collect()
}

fn solve_direct(q: &ResolventQuery<'_>) -> Result<ResolventResult, ResolventError> {
    let lu = BandedLu::factor(q.operator.matrix(), q.shift).map_err(|e| ResolventError::Factorisation(e.row))?;
    let mut x = lu.solve(q.rhs);
    let target = q.tol * euclid(q.rhs);
    let mut r = residual(q.operator, q.shift, &x, q.rhs);
    let mut steps = 1;
    // iterative refinement
    while euclid(&r) > target && steps < 4 {
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        r = residual(q.operator, q.shift, &x, q.rhs);
        steps += 1;
    }
    let residual_norm = euclid(&r);
    if residual_norm > target {
        return Err(ResolventError::NotConverged {
            residual: residual_norm / euclid(q.rhs),
            iterations: steps,
            tol: q.tol,
        });
    }
    Ok(ResolventResult {
        solution: x,
        residual_norm,
        iterations: steps,
        method: SolveMethod::Direct,
    })
}

fn solve_krylov(q: &ResolventQuery<'_>) -> Result<ResolventResult, ResolventError> {
    let cfg = GmresConfig {
        tol: q.tol,
        ..GmresConfig::default()
    };
    let out = gmres_shifted(q.operator.matrix(), q.shift, q.rhs, &cfg);
    if !out.converged {
        return Err(ResolventError::NotConverged {
            residual: out.residual,
            iterations: out.iterations,
            tol: q.tol,
        });
    }
    Ok(ResolventResult {
        residual_norm: out.residual * euclid(q.rhs),
        solution: out.x,
        iterations: out.iterations,
        method: SolveMethod::Krylov,
    })
}

/// Solves `(H − z)x = ψ` with the default strategy.
pub fn apply_resolvent(q: &ResolventQuery<'_>) -> Result<ResolventResult, ResolventError> {
    apply_resolvent_with(q, SolverStrategy::Auto)
}

pub fn apply_resolvent_with(q: &ResolventQuery<'_>, strategy: SolverStrategy) -> Result<ResolventResult, ResolventError> {
    q.validate()?;
    match strategy {
        SolverStrategy::Krylov => solve_krylov(q),
        SolverStrategy::Direct => solve_direct(q),
        SolverStrategy::Auto => match solve_krylov(q) {
            Err(ResolventError::NotConverged { .. }) if q.operator.dim() <= DIRECT_FALLBACK_MAX_DIM => solve_direct(q),
            other => other,
        },
    }
}

/// Restriction of full-grid vectors to an operator's active nodes, and the
/// zero-padding embedding back.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    node_count: usize,
    nodes: Vec<usize>,
}

impl Projection {
    pub fn of(h: &DiscreteHamiltonian) -> Self {
        Self {
            node_count: h.grid().node_count(),
            nodes: h.active_nodes().to_vec(),
        }
    }

    /// Zero-padded restriction `EPψ`, again a full-grid vector.
    pub fn apply(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.embed(&self.restrict(full))
    }

    pub fn restrict(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.nodes.iter().map(|&n| full[n]).collect()
    }

    pub fn embed(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.node_count];
        for (&n, &v) in self.nodes.iter().zip(x) {
            out[n] = v;
        }
        out
    }
}

/// Lattice `L²` norm of a full-grid vector.
pub fn grid_norm(v: &[Complex64], grid: &Grid2D) -> f64 {
    grid.spacing() * euclid(v)
}

pub fn grid_distance(u: &[Complex64], v: &[Complex64], grid: &Grid2D) -> f64 {
    grid.spacing() * u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// `E R_z(H) P ψ` for a full-grid `ψ`.
pub fn embedded_resolvent(
    h: &DiscreteHamiltonian,
    psi: &[Complex64],
    shift: Complex64,
    tol: f64,
) -> Result<Vec<Complex64>, ResolventError> {
    if psi.len() != h.grid().node_count() {
        return Err(ResolventError::Dimension {
            got: psi.len(),
            expected: h.grid().node_count(),
        });
    }
    let p = Projection::of(h);
    let rhs = p.restrict(psi);
    let q = ResolventQuery::new(h, &rhs).with_shift(shift).with_tol(tol);
    Ok(p.embed(&apply_resolvent(&q)?.solution))
}

/// `‖E₁R_i(H₁)P₁ψ − E₂R_i(H₂)P₂ψ‖` in the lattice norm.
pub fn resolvent_distance(
    h1: &DiscreteHamiltonian,
    h2: &DiscreteHamiltonian,
    psi: &[Complex64],
    tol: f64,
) -> Result<f64, ResolventError> {
    if h1.grid() != h2.grid() {
        return Err(ResolventError::GridMismatch);
    }
    let x1 = embedded_resolvent(h1, psi, SHIFT_I, tol)?;
    let x2 = embedded_resolvent(h2, psi, SHIFT_I, tol)?;
    Ok(grid_distance(&x1, &x2, h1.grid()))
}

/// `h² Σ_{ρ_j < a} |ψ_j|²` for a full-grid vector.
pub fn interior_mass(psi: &[Complex64], grid: &Grid2D, spec: &SolenoidSpec) -> f64 {
    let h2 = grid.spacing().powi(2);
    psi.iter()
        .enumerate()
        .filter(|&(node, _)| grid.inside_disk(node, spec.radius))
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * h2
}

/// Interior mass divided by `‖ψ‖²`; zero for the zero vector.
pub fn interior_mass_fraction(psi: &[Complex64], grid: &Grid2D, spec: &SolenoidSpec) -> f64 {
    let total = grid_norm(psi, grid).powi(2);
    if total == 0.0 {
        0.0
    } else {
        interior_mass(psi, grid, spec) / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_hamiltonian, Barrier};
    use crate::potential::{HalfLength, QuadratureConfig};
    use std::f64::consts::PI;

    fn op(barrier: Barrier) -> (DiscreteHamiltonian, SolenoidSpec) {
        let spec = SolenoidSpec::new(1.0, 2.0 * PI, HalfLength::Finite(4.0), 0.5).unwrap();
        let grid = Grid2D::new(4.0, 24).unwrap();
        (
            build_hamiltonian(&grid, &spec, barrier, &QuadratureConfig::default()).unwrap(),
            spec,
        )
    }

    fn bump(grid: &Grid2D) -> Vec<Complex64> {
        (0..grid.node_count())
            .map(|n| {
                let [x, y] = grid.position(n);
                Complex64::new((-((x - 2.0).powi(2) + y * y) / 0.25).exp(), 0.0)
            })
            .collect()
    }

    #[test]
    fn query_validation() {
        let (h, _) = op(Barrier::Finite(1.0));
        let rhs = vec![Complex64::new(1.0, 0.0); h.dim()];
        let q = ResolventQuery::new(&h, &rhs);
        assert!(matches!(
            apply_resolvent(&q.with_shift(Complex64::new(2.0, 0.0))),
            Err(ResolventError::RealShift(_))
        ));
        assert!(matches!(apply_resolvent(&q.with_tol(0.0)), Err(ResolventError::Tolerance(_))));
        let short = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            apply_resolvent(&ResolventQuery::new(&h, &short)),
            Err(ResolventError::Dimension { .. })
        ));
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let (h, _) = op(Barrier::HardWall);
        let rhs = vec![Complex64::new(0.0, 0.0); h.dim()];
        let r = apply_resolvent(&ResolventQuery::new(&h, &rhs)).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.solution.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn krylov_and_direct_agree() {
        let (h, _) = op(Barrier::Finite(1e4));
        let rhs = Projection::of(&h).restrict(&bump(h.grid()));
        let q = ResolventQuery::new(&h, &rhs).with_tol(1e-10);
        let k = apply_resolvent_with(&q, SolverStrategy::Krylov).unwrap();
        let d = apply_resolvent_with(&q, SolverStrategy::Direct).unwrap();
        assert_eq!(d.method, SolveMethod::Direct);
        assert!(k.residual_norm <= 1e-10 * euclid(&rhs));
        let diff = euclid(&k.solution.iter().zip(&d.solution).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(diff <= 3e-10 * euclid(&rhs));
    }

    #[test]
    fn projection_is_idempotent_and_contracting() {
        let (h, _) = op(Barrier::HardWall);
        let p = Projection::of(&h);
        let v: Vec<Complex64> = (0..h.grid().node_count())
            .map(|n| Complex64::new((n as f64).cos(), (n as f64 * 0.3).sin()))
            .collect();
        let once = p.apply(&v);
        assert_eq!(p.apply(&once), once);
        assert!(euclid(&once) <= euclid(&v));
    }

    #[test]
    fn interior_mass_counts() {
        let (h, spec) = op(Barrier::Finite(1.0));
        let grid = *h.grid();
        let ones = vec![Complex64::new(1.0, 0.0); grid.node_count()];
        let inside = (0..grid.node_count()).filter(|&n| grid.inside_disk(n, 1.0)).count();
        let frac = interior_mass_fraction(&ones, &grid, &spec);
        assert!((frac - inside as f64 / grid.node_count() as f64).abs() < 1e-15);
        let outside: Vec<Complex64> = (0..grid.node_count())
            .map(|n| Complex64::new(if grid.inside_disk(n, 1.0) { 0.0 } else { 1.0 }, 0.0))
            .collect();
        assert_eq!(interior_mass(&outside, &grid, &spec), 0.0);
        assert_eq!(interior_mass_fraction(&vec![Complex64::new(0.0, 0.0); 4], &grid, &spec), 0.0);
    }

    #[test]
    fn self_distance_vanishes() {
        let (h, _) = op(Barrier::Finite(100.0));
        let psi = bump(h.grid());
        let d = resolvent_distance(&h, &h, &psi, DEFAULT_TOL).unwrap();
        assert!(d <= 2.0 * DEFAULT_TOL * grid_norm(&psi, h.grid()));
    }
}
