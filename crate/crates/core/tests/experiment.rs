use abflux::experiment::{
    run_commutativity_check, run_impermeability_sweep, run_length_sweep, ExperimentPlan, Probe,
};
use abflux::operator::{Barrier, Grid2D};
use abflux::potential::HalfLength;

/// Small plan that keeps these tests quick.
fn small_plan() -> ExperimentPlan {
    let mut plan = ExperimentPlan::default();
    plan.grid = Grid2D::new(5.0, 32).unwrap();
    plan.probes = vec![Probe::new("east", [2.6, 0.0], 0.4)];
    plan.diagram.n_schedule = vec![1e2, 1e4, 1e6, 1e8];
    plan.diagram.length_schedule = vec![8.0, 32.0, 128.0, 512.0];
    plan
}

#[test]
fn hard_wall_point_has_zero_distance() {
    let mut plan = small_plan();
    plan.impermeability.n_schedule.push(Barrier::HardWall);
    let report = run_impermeability_sweep(&plan).unwrap();
    let s = &report.paths[0].series[0];
    assert_eq!(*s.distances.last().unwrap(), 0.0);
    assert_eq!(*s.interior_mass_fraction.as_ref().unwrap().last().unwrap(), 0.0);
    assert!(!report.alarm());
}

#[test]
fn infinite_length_point_and_zero_flux_control() {
    let mut plan = small_plan();
    plan.length.length_schedule.push(HalfLength::Infinite);
    let report = run_length_sweep(&plan).unwrap();
    let s = &report.paths[0].series[0];
    assert_eq!(*s.distances.last().unwrap(), 0.0);
    let gaps = s.potential_gap.as_ref().unwrap();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));

    plan.spec = plan.spec.with_flux(0.0);
    let zero = run_length_sweep(&plan).unwrap();
    for d in &zero.paths[0].series[0].distances {
        assert_eq!(*d, 0.0);
    }
}

#[test]
fn reports_are_reproducible() {
    let plan = small_plan();
    let a = run_commutativity_check(&plan).unwrap();
    let b = run_commutativity_check(&plan).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.paths_csv(), b.paths_csv());
    assert_eq!(a.commutativity_csv(), b.commutativity_csv());
}

#[test]
fn final_estimate_depends_only_on_schedule_end() {
    let plan = small_plan();
    let mut shorter = plan.clone();
    shorter.diagram.n_schedule = vec![1e5, 1e8];
    shorter.diagram.length_schedule = vec![64.0, 512.0];
    let a = run_commutativity_check(&plan).unwrap();
    let b = run_commutativity_check(&shorter).unwrap();
    assert_eq!(
        a.commutativity.unwrap().probes[0].to_reference,
        b.commutativity.unwrap().probes[0].to_reference
    );
}

#[test]
fn diagram_paths_converge_on_small_grid() {
    let report = run_commutativity_check(&small_plan()).unwrap();
    let c = report.commutativity.as_ref().unwrap();
    assert!(c.agree, "{:?}", report.verdict_lines());
    assert_eq!(report.paths.len(), 5);
    assert!(!report.alarm());
    assert_eq!(report.verdict_lines().len(), 6);
    let csv = report.paths_csv();
    assert!(csv.lines().next().unwrap().starts_with('#'));
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    // header row plus one row per (path, point) for the single probe
    assert_eq!(rows, 1 + 5 * 4);
}

#[test]
fn zero_flux_diagram_is_nearly_exact() {
    let mut plan = small_plan();
    plan.spec = plan.spec.with_flux(0.0);
    let report = run_commutativity_check(&plan).unwrap();
    assert!(report.commutativity.unwrap().residual <= 10.0 * plan.solver_tol);
}
