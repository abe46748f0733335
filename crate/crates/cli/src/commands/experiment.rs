use std::path::Path;
use std::time::Instant;

use abflux::experiment::{
    run_commutativity_check, run_impermeability_sweep, run_length_sweep, ConvergenceReport, ExperimentError, Timings,
};
use abflux::operator::OperatorError;

use super::emit;
use crate::config::RunConfig;
use crate::{CliError, ExperimentArgs, ExperimentCommand};

fn classify(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Plan(m) => CliError::Config(m),
        ExperimentError::Operator(OperatorError::Config(m)) => CliError::Config(m),
        other => CliError::Numerical(other.to_string()),
    }
}

fn write_incomplete(dir: &Path, kind: &str, error: &str) {
    let body = serde_json::json!({ "kind": kind, "complete": false, "error": error });
    let _ = emit(
        Some(&dir.join(format!("{kind}.json"))),
        &serde_json::to_string_pretty(&body).expect("static json"),
    );
}

fn write_report(dir: &Path, report: &ConvergenceReport) -> Result<(), CliError> {
    let kind = &report.kind;
    emit(Some(&dir.join(format!("{kind}.json"))), &report.to_json())?;
    emit(Some(&dir.join(format!("{kind}_paths.csv"))), &report.paths_csv())?;
    if let Some(csv) = report.commutativity_csv() {
        emit(Some(&dir.join(format!("{kind}_commutativity.csv"))), &csv)?;
    }
    Ok(())
}

pub fn run(cmd: ExperimentCommand) -> Result<(), CliError> {
    let (kind, args, runner): (&str, ExperimentArgs, fn(&_) -> Result<ConvergenceReport, ExperimentError>) = match cmd {
        ExperimentCommand::Impermeability(a) => ("impermeability", a, run_impermeability_sweep),
        ExperimentCommand::Length(a) => ("length", a, run_length_sweep),
        ExperimentCommand::Diagram(a) => ("diagram", a, run_commutativity_check),
    };
    let plan = RunConfig::load(&args.config)?.plan()?;
    for w in plan.grid.warnings(&plan.spec) {
        eprintln!("abflux: warning: {w}");
    }
    let start = Instant::now();
    let mut report = match runner(&plan) {
        Ok(r) => r,
        Err(e) => {
            let err = classify(e);
            if matches!(err, CliError::Numerical(_)) {
                write_incomplete(&args.out, kind, &err.to_string());
            }
            return Err(err);
        }
    };
    if args.timings {
        report.timings = Some(Timings {
            wall_seconds: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        });
    }
    write_report(&args.out, &report)?;
    for line in report.verdict_lines() {
        println!("{line}");
    }
    if report.alarm() {
        return Err(CliError::Alarm(format!("{kind} report flagged a path")));
    }
    Ok(())
}
