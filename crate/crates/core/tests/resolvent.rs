use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use abflux::linalg::CsrMatrix;
use abflux::operator::{build_hamiltonian, Barrier, DiscreteHamiltonian, Grid2D};
use abflux::potential::{HalfLength, QuadratureConfig, SolenoidSpec};
use abflux::resolvent::{
    apply_resolvent_with, embedded_resolvent, grid_norm, interior_mass_fraction, resolvent_distance, ResolventQuery,
    SolverStrategy, DEFAULT_TOL, SHIFT_I,
};
use abflux::linalg::{gmres_shifted, GmresConfig};

fn spec(l: HalfLength) -> SolenoidSpec {
    SolenoidSpec::new(1.0, 2.0 * PI, l, 0.5).unwrap()
}

fn grid() -> Grid2D {
    Grid2D::new(5.0, 32).unwrap()
}

fn op(l: HalfLength, b: Barrier) -> DiscreteHamiltonian {
    build_hamiltonian(&grid(), &spec(l), b, &QuadratureConfig::default()).unwrap()
}

fn bump(g: &Grid2D, cx: f64, cy: f64) -> Vec<Complex64> {
    (0..g.node_count())
        .map(|n| {
            if g.inside_disk(n, 1.0) || g.is_boundary(n) {
                return Complex64::new(0.0, 0.0);
            }
            let [x, y] = g.position(n);
            Complex64::new((-((x - cx).powi(2) + (y - cy).powi(2)) / 0.5).exp(), 0.0)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diagonal_operator_solves_entrywise(
        diag in prop::collection::vec(-50.0f64..50.0, 1..40),
        rhs_re in prop::collection::vec(-1.0f64..1.0, 40),
        rhs_im in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let n = diag.len();
        let d: Vec<Complex64> = diag.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let m = CsrMatrix::from_diagonal(&d);
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(rhs_re[i], rhs_im[i])).collect();
        let out = gmres_shifted(&m, SHIFT_I, &b, &GmresConfig::default());
        prop_assert!(out.converged);
        for i in 0..n {
            let want = b[i] / (d[i] - SHIFT_I);
            prop_assert!((out.x[i] - want).norm() <= 1e-7 * b[i].norm().max(1e-12) + 1e-12);
        }
    }
}

#[test]
fn triangle_inequality_on_operator_triples() {
    let psi = bump(&grid(), 2.5, 0.5);
    let ops = [
        op(HalfLength::Finite(2.0), Barrier::Finite(10.0)),
        op(HalfLength::Finite(8.0), Barrier::Finite(1e3)),
        op(HalfLength::Infinite, Barrier::HardWall),
        op(HalfLength::Finite(3.0), Barrier::HardWall),
    ];
    let slack = 4.0 * DEFAULT_TOL * grid_norm(&psi, &grid());
    for a in 0..ops.len() {
        for b in 0..ops.len() {
            for c in 0..ops.len() {
                let ac = resolvent_distance(&ops[a], &ops[c], &psi, DEFAULT_TOL).unwrap();
                let ab = resolvent_distance(&ops[a], &ops[b], &psi, DEFAULT_TOL).unwrap();
                let bc = resolvent_distance(&ops[b], &ops[c], &psi, DEFAULT_TOL).unwrap();
                assert!(ac <= ab + bc + slack);
            }
        }
    }
}

#[test]
fn impermeability_distances_decrease_with_vanishing_interior_mass() {
    let g = grid();
    let psi = bump(&g, 2.5, 0.5);
    let wall = op(HalfLength::Finite(4.0), Barrier::HardWall);
    let mut last_d = f64::INFINITY;
    let mut last_m = f64::INFINITY;
    for n in [10.0, 1e2, 1e3, 1e4] {
        let h = op(HalfLength::Finite(4.0), Barrier::Finite(n));
        let d = resolvent_distance(&h, &wall, &psi, DEFAULT_TOL).unwrap();
        let m = interior_mass_fraction(
            &embedded_resolvent(&h, &psi, SHIFT_I, DEFAULT_TOL).unwrap(),
            &g,
            &spec(HalfLength::Finite(4.0)),
        );
        assert!(d < last_d && m < last_m, "n={n}: {d} {m}");
        last_d = d;
        last_m = m;
    }
}

#[test]
fn repeated_queries_are_bit_identical() {
    let h = op(HalfLength::Finite(4.0), Barrier::Finite(100.0));
    let psi = bump(&grid(), -2.0, 2.0);
    let a = embedded_resolvent(&h, &psi, SHIFT_I, DEFAULT_TOL).unwrap();
    let b = embedded_resolvent(&h, &psi, SHIFT_I, DEFAULT_TOL).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shift_two_i_preserves_the_impermeability_ordering() {
    let g = grid();
    let psi = bump(&g, 2.5, 0.5);
    let wall = op(HalfLength::Finite(4.0), Barrier::HardWall);
    let p = abflux::resolvent::Projection::of(&wall);
    let rhs = p.restrict(&psi);
    let w = apply_resolvent_with(
        &ResolventQuery::new(&wall, &rhs).with_shift(Complex64::new(0.0, 2.0)),
        SolverStrategy::Auto,
    )
    .unwrap();
    let wall_vec = p.embed(&w.solution);
    let mut last = f64::INFINITY;
    for n in [10.0, 1e2, 1e3, 1e4] {
        let h = op(HalfLength::Finite(4.0), Barrier::Finite(n));
        let x = embedded_resolvent(&h, &psi, Complex64::new(0.0, 2.0), DEFAULT_TOL).unwrap();
        let d = abflux::resolvent::grid_distance(&x, &wall_vec, &g);
        assert!(d < last);
        last = d;
    }
}
