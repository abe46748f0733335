//! Resolvent-distance sweeps along the limits `n → ∞` (impermeable wall) and
//! `L → ∞` (infinite solenoid), and the three-path comparison against the
//! Aharonov–Bohm operator.
//!
//! Every sweep point is an independent assemble-and-solve, run in parallel;
//! results are gathered in schedule order so reports do not depend on the
//! thread count.

mod plan;
mod report;

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

pub use plan::{DiagramPlan, ExperimentPlan, ImpermeabilityPlan, LengthPlan, Probe};
pub use report::{CommutativityReport, ConvergenceReport, PathReport, ProbeResidual, SeriesReport, Timings};

use crate::operator::{build_hamiltonian, Barrier, OperatorError};
use crate::potential::{a_phi_finite, a_phi_infinite_rho, fit_power_law, FieldPoint, HalfLength, PotentialError, PotentialMethod, RateFit};
use crate::resolvent::{embedded_resolvent, grid_distance, grid_norm, interior_mass_fraction, ResolventError, SHIFT_I};
use plan::barrier_key;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

type Key = (u64, u64);

fn key(l: HalfLength, b: Barrier) -> Key {
    (l.value().to_bits(), barrier_key(b).to_bits())
}

struct SampledProbe {
    probe: Probe,
    psi: Vec<Complex64>,
    norm: f64,
}

/// Probe vectors plus a table of resolvent vectors keyed by operator.
struct Bench<'a> {
    plan: &'a ExperimentPlan,
    probes: Vec<SampledProbe>,
    vectors: HashMap<Key, Vec<Vec<Complex64>>>,
}

impl<'a> Bench<'a> {
    fn new(plan: &'a ExperimentPlan) -> Result<Self, ExperimentError> {
        plan.validate()?;
        let probes = plan
            .probes
            .iter()
            .map(|p| {
                let psi = p.sample(&plan.grid, &plan.spec);
                let norm = grid_norm(&psi, &plan.grid);
                SampledProbe {
                    probe: p.clone(),
                    psi,
                    norm,
                }
            })
            .collect();
        Ok(Self {
            plan,
            probes,
            vectors: HashMap::new(),
        })
    }

    /// Solves every listed operator not yet in the table.
    fn solve(&mut self, configs: &[(HalfLength, Barrier)]) -> Result<(), ExperimentError> {
        let mut todo: Vec<(HalfLength, Barrier)> = Vec::new();
        for &(l, b) in configs {
            if !self.vectors.contains_key(&key(l, b)) && !todo.iter().any(|&(l2, b2)| key(l2, b2) == key(l, b)) {
                todo.push((l, b));
            }
        }
        let plan = self.plan;
        let probes = &self.probes;
        let solved = todo
            .par_iter()
            .map(|&(l, b)| -> Result<Vec<Vec<Complex64>>, ExperimentError> {
                let h = build_hamiltonian(&plan.grid, &plan.spec_with(l), b, &plan.quadrature)?;
                probes
                    .iter()
                    .map(|p| Ok(embedded_resolvent(&h, &p.psi, SHIFT_I, plan.solver_tol)?))
                    .collect()
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (&(l, b), v) in todo.iter().zip(solved) {
            self.vectors.insert(key(l, b), v);
        }
        Ok(())
    }

    fn vector(&self, l: HalfLength, b: Barrier, probe: usize) -> &[Complex64] {
        &self.vectors[&key(l, b)][probe]
    }

    fn distance(&self, x: (HalfLength, Barrier), y: (HalfLength, Barrier), probe: usize) -> f64 {
        grid_distance(self.vector(x.0, x.1, probe), self.vector(y.0, y.1, probe), &self.plan.grid)
    }

    /// Solver slack below which a relative distance counts as zero.
    fn floor(&self) -> f64 {
        10.0 * self.plan.solver_tol
    }

    /// One path: distances from each point to `reference`, per probe.
    fn path(
        &mut self,
        name: &str,
        parameter: &str,
        reference: (HalfLength, Barrier),
        points: &[(HalfLength, Barrier)],
        labels: Vec<String>,
        fit_abscissa: &[f64],
    ) -> Result<PathReport, ExperimentError> {
        let mut all = points.to_vec();
        all.push(reference);
        self.solve(&all)?;
        let floor = self.floor();
        let series = (0..self.probes.len())
            .map(|i| {
                let norm = self.probes[i].norm;
                let distances: Vec<f64> = points.iter().map(|&p| self.distance(p, reference, i)).collect();
                let relative: Vec<f64> = distances.iter().map(|d| d / norm).collect();
                SeriesReport {
                    probe: self.probes[i].probe.name.clone(),
                    probe_norm: norm,
                    fit: decay_fit(fit_abscissa, &relative, floor),
                    alarm: tail_alarm(&relative, floor),
                    distances,
                    relative,
                    interior_mass_fraction: None,
                    potential_gap: None,
                }
            })
            .collect();
        Ok(PathReport {
            name: name.to_string(),
            parameter: parameter.to_string(),
            reference: describe(reference),
            points: labels,
            series,
        })
    }
}

fn describe((l, b): (HalfLength, Barrier)) -> String {
    format!("L={l};n={b}")
}

/// Power-law fit over finite abscissae whose distance is above the floor.
fn decay_fit(x: &[f64], rel: &[f64], floor: f64) -> Option<RateFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(rel)
        .filter(|(x, y)| x.is_finite() && **x > 0.0 && **y > floor)
        .map(|(x, y)| (*x, *y))
        .unzip();
    fit_power_law(&xs, &ys).ok()
}

/// True when a path fails to settle: the final distance exceeds the first,
/// or the last three are not nonincreasing. Values under `floor` count as 0.
pub fn tail_alarm(relative: &[f64], floor: f64) -> bool {
    let eff: Vec<f64> = relative.iter().map(|&v| if v <= floor { 0.0 } else { v }).collect();
    let Some((&last, _)) = eff.split_last() else {
        return false;
    };
    if last > eff[0] {
        return true;
    }
    let tail = &eff[eff.len().saturating_sub(3)..];
    tail.windows(2).any(|w| w[1] > w[0])
}

fn new_report(kind: &str, plan: &ExperimentPlan, paths: Vec<PathReport>) -> ConvergenceReport {
    ConvergenceReport {
        kind: kind.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        shift: "i".to_string(),
        plan: plan.clone(),
        paths,
        commutativity: None,
        timings: None,
    }
}

/// Barrier sweep `H_{L,n} → H_{L,∞}` at the plan's fixed length.
pub fn run_impermeability_sweep(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    let mut bench = Bench::new(plan)?;
    let l = plan.impermeability.half_length;
    let schedule = &plan.impermeability.n_schedule;
    let points: Vec<_> = schedule.iter().map(|&b| (l, b)).collect();
    let x: Vec<f64> = schedule.iter().map(|&b| barrier_key(b)).collect();
    let mut path = bench.path(
        "impermeability",
        "n",
        (l, Barrier::HardWall),
        &points,
        schedule.iter().map(|b| b.to_string()).collect(),
        &x,
    )?;
    for (i, s) in path.series.iter_mut().enumerate() {
        s.interior_mass_fraction = Some(
            points
                .iter()
                .map(|&(l, b)| interior_mass_fraction(bench.vector(l, b, i), &plan.grid, &plan.spec))
                .collect(),
        );
    }
    Ok(new_report("impermeability", plan, vec![path]))
}

/// `sup |A_L(ρ) − A(ρ)|` over the nodes of a probe's support.
fn potential_gap(plan: &ExperimentPlan, probe: &Probe, l: HalfLength) -> Result<f64, ExperimentError> {
    let spec = plan.spec_with(l);
    if l.is_infinite() {
        return Ok(0.0);
    }
    let mut gap: f64 = 0.0;
    for node in probe.support(&plan.grid) {
        let [x, y] = plan.grid.position(node);
        let rho = x.hypot(y);
        let point = FieldPoint::planar(rho);
        if point.on_border(&spec) {
            continue;
        }
        let finite = a_phi_finite(&point, &spec, &plan.quadrature, PotentialMethod::Elliptic)?;
        gap = gap.max((finite - a_phi_infinite_rho(rho, &spec)).abs());
    }
    Ok(gap)
}

/// Length sweep `H_{L,n} → H_{∞,n}` at the plan's fixed barrier.
pub fn run_length_sweep(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    let mut bench = Bench::new(plan)?;
    let b = plan.length.barrier;
    let schedule = &plan.length.length_schedule;
    let points: Vec<_> = schedule.iter().map(|&l| (l, b)).collect();
    let x: Vec<f64> = schedule.iter().map(|l| l.value()).collect();
    let mut path = bench.path(
        "length",
        "L",
        (HalfLength::Infinite, b),
        &points,
        schedule.iter().map(|l| l.to_string()).collect(),
        &x,
    )?;
    for (s, probe) in path.series.iter_mut().zip(&plan.probes) {
        s.potential_gap = Some(
            schedule
                .par_iter()
                .map(|&l| potential_gap(plan, probe, l))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(new_report("length", plan, vec![path]))
}

/// The three limit paths towards `H_AB` and their final-vector agreement.
///
/// * A: `n → ∞` at the largest `L`, then `L → ∞` along hard-wall operators.
/// * B: `L → ∞` at the largest `n`, then `n → ∞` along infinite-gauge operators.
/// * C: `n_j` and `L_j` together.
///
/// The final estimates are `R_i(H_{L_max,∞})`, `R_i(H_{∞,n_max})` and
/// `R_i(H_{L_max,n_max})` applied to `P₀ψ`.
pub fn run_commutativity_check(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    let mut bench = Bench::new(plan)?;
    let d = &plan.diagram;
    let ls: Vec<HalfLength> = d.length_schedule.iter().map(|&l| HalfLength::Finite(l)).collect();
    let ns: Vec<Barrier> = d.n_schedule.iter().map(|&n| Barrier::Finite(n)).collect();
    let l_max = *ls.last().expect("validated nonempty");
    let n_max = *ns.last().expect("validated nonempty");
    let ab = (HalfLength::Infinite, Barrier::HardWall);
    let l_labels: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
    let n_labels: Vec<String> = ns.iter().map(|n| n.to_string()).collect();

    let mut configs: Vec<(HalfLength, Barrier)> = vec![ab];
    configs.extend(ns.iter().map(|&n| (l_max, n)));
    configs.extend(ls.iter().map(|&l| (l, Barrier::HardWall)));
    configs.extend(ls.iter().map(|&l| (l, n_max)));
    configs.extend(ns.iter().map(|&n| (HalfLength::Infinite, n)));
    if d.diagonal {
        configs.extend(ls.iter().zip(&ns).map(|(&l, &n)| (l, n)));
    }
    bench.solve(&configs)?;

    let mut paths = vec![
        bench.path(
            "A1_impermeability_at_max_length",
            "n",
            (l_max, Barrier::HardWall),
            &ns.iter().map(|&n| (l_max, n)).collect::<Vec<_>>(),
            n_labels.clone(),
            &d.n_schedule,
        )?,
        bench.path(
            "A2_length_of_hard_wall",
            "L",
            ab,
            &ls.iter().map(|&l| (l, Barrier::HardWall)).collect::<Vec<_>>(),
            l_labels.clone(),
            &d.length_schedule,
        )?,
        bench.path(
            "B1_length_at_max_barrier",
            "L",
            (HalfLength::Infinite, n_max),
            &ls.iter().map(|&l| (l, n_max)).collect::<Vec<_>>(),
            l_labels.clone(),
            &d.length_schedule,
        )?,
        bench.path(
            "B2_impermeability_of_infinite_gauge",
            "n",
            ab,
            &ns.iter().map(|&n| (HalfLength::Infinite, n)).collect::<Vec<_>>(),
            n_labels.clone(),
            &d.n_schedule,
        )?,
    ];
    if d.diagonal {
        paths.push(bench.path(
            "C_diagonal",
            "L",
            ab,
            &ls.iter().zip(&ns).map(|(&l, &n)| (l, n)).collect::<Vec<_>>(),
            ls.iter().zip(&ns).map(|(l, n)| format!("L={l};n={n}")).collect(),
            &d.length_schedule,
        )?);
    }

    let mut finals = vec![("A", (l_max, Barrier::HardWall)), ("B", (HalfLength::Infinite, n_max))];
    if d.diagonal {
        finals.push(("C", (l_max, n_max)));
    }
    let probes: Vec<ProbeResidual> = (0..bench.probes.len())
        .map(|i| {
            let norm = bench.probes[i].norm;
            let to_reference = finals
                .iter()
                .map(|&(name, cfg)| (name.to_string(), bench.distance(cfg, ab, i) / norm))
                .collect::<Vec<_>>();
            let mut pairwise = Vec::new();
            for (j, &(na, ca)) in finals.iter().enumerate() {
                for &(nb, cb) in &finals[j + 1..] {
                    pairwise.push((format!("{na}-{nb}"), bench.distance(ca, cb, i) / norm));
                }
            }
            let residual = pairwise
                .iter()
                .chain(&to_reference)
                .fold(0.0_f64, |m, (_, v)| m.max(*v));
            ProbeResidual {
                probe: bench.probes[i].probe.name.clone(),
                pairwise,
                to_reference,
                residual,
            }
        })
        .collect();
    let residual = probes.iter().fold(0.0_f64, |m, p| m.max(p.residual));
    let mut report = new_report("diagram", plan, paths);
    report.commutativity = Some(CommutativityReport {
        reference: describe(ab),
        threshold: d.agreement,
        residual,
        agree: residual <= d.agreement,
        probes,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_alarm_rules() {
        assert!(!tail_alarm(&[1.0, 0.5, 0.2, 0.1], 1e-7));
        assert!(tail_alarm(&[1.0, 0.5, 0.2, 0.3], 1e-7));
        assert!(tail_alarm(&[0.1, 0.5, 0.2], 1e-7));
        // noise below the floor is ignored
        assert!(!tail_alarm(&[1e-9, 3e-9, 2e-9, 5e-9], 1e-7));
        assert!(!tail_alarm(&[], 1e-7));
    }

    #[test]
    fn decay_fit_skips_floor_and_infinite_points() {
        let x = [10.0, 100.0, 1000.0, 1e4, f64::INFINITY];
        let y = [1e-1, 1e-2, 1e-3, 1e-4, 0.0];
        let fit = decay_fit(&x, &y, 1e-7).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert!(decay_fit(&x[..3], &y[..3], 1e-7).is_none());
    }
}
