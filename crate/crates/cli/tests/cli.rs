use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TWO_PI: &str = "6.283185307179586";

fn abflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abflux"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Data rows of a CSV with '#' comments and a column header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn physics(flux: &str) -> Vec<&str> {
    vec!["--radius", "1", "--flux", flux, "--coupling", "0.5"]
}

#[test]
fn eval_matches_infinite_solenoid_outside_and_vanishes_on_axis() {
    for (rho, expected) in [("2", 0.5), ("0", 0.0), ("4", 0.25)] {
        let mut args = vec!["potential", "eval", "--rho", rho, "--L", "inf"];
        args.extend(physics(TWO_PI));
        let out = abflux(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r = rows(&stdout(&out));
        assert_eq!(r[0][4], "ok");
        let v: f64 = r[0][3].parse().unwrap();
        assert!((v - expected).abs() < 1e-12, "rho {rho}: {v}");
    }
}

#[test]
fn eval_on_the_border_reports_status_and_fails() {
    let mut args = vec!["potential", "eval", "--rho", "1", "--L", "3"];
    args.extend(physics(TWO_PI));
    let out = abflux(&args);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(rows(&stdout(&out))[0][4], "border");
}

#[test]
fn rate_fits_inverse_square_decay() {
    let mut args = vec!["potential", "rate"];
    args.extend(physics(TWO_PI));
    let out = abflux(&args);
    assert!(out.status.success());
    let exponent = rows(&stdout(&out))
        .into_iter()
        .find(|r| r[0] == "exponent")
        .map(|r| r[3].parse::<f64>().unwrap())
        .unwrap();
    assert!((exponent - 2.0).abs() < 0.05, "exponent {exponent}");
}

#[test]
fn missing_physics_and_bad_configs_exit_with_code_2() {
    let out = abflux(&["potential", "eval", "--rho", "2", "--radius", "1", "--flux", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schema_version": 1, "solenoid": {"radius": 1, "flux": 1, "coupling": 1, "colour": 2}}"#,
    )
    .unwrap();
    let out = abflux(&["experiment", "length", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let schedule = dir.path().join("schedule.json");
    std::fs::write(
        &schedule,
        r#"{"schema_version": 1, "solenoid": {"radius": 1, "flux": 1, "coupling": 1},
            "experiment": {"length": {"barrier": 100, "length_schedule": [8, 4]}}}"#,
    )
    .unwrap();
    let out = abflux(&["experiment", "length", "--config", schedule.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = abflux(&["experiment", "diagram", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_spectrum_matches_dirichlet_closed_form() {
    let mut args = vec!["operator", "spectrum", "--n", "0", "--points", "16", "--extent", "6", "--count", "4"];
    args.extend(physics("0"));
    let out = abflux(&args);
    assert!(out.status.success());
    let h = 12.0 / 15.0;
    let mode = |k: f64| 4.0 / (h * h) * (k * std::f64::consts::PI / 30.0).sin().powi(2);
    let expected = [mode(1.0) * 2.0, mode(1.0) + mode(2.0), mode(1.0) + mode(2.0), mode(2.0) * 2.0];
    for (row, e) in rows(&stdout(&out)).iter().zip(expected) {
        let v: f64 = row[1].parse().unwrap();
        assert!((v - e).abs() < 1e-9 * e, "{v} vs {e}");
    }
}

#[test]
fn spectrum_guard_exits_with_code_3() {
    let mut args = vec!["operator", "spectrum", "--points", "160"];
    args.extend(physics("0"));
    let out = abflux(&args);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-large"));
}

#[test]
fn assembled_operator_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = ["a.txt", "b.txt"].iter().map(|f| dir.path().join(f)).collect();
    for f in &files {
        let mut args = vec!["operator", "assemble", "--points", "24", "--n", "1000", "--out", f.to_str().unwrap()];
        args.extend(physics(TWO_PI));
        assert!(abflux(&args).status.success());
    }
    let a = std::fs::read(&files[0]).unwrap();
    assert!(a.starts_with(b"# dimension "));
    assert_eq!(a, std::fs::read(&files[1]).unwrap());
}

#[test]
fn gauge_check_recovers_enclosed_flux() {
    let mut args = vec!["operator", "gauge-check", "--points", "48"];
    args.extend(physics(TWO_PI));
    let out = abflux(&args);
    assert!(out.status.success());
    let r = rows(&stdout(&out));
    let loops: Vec<_> = r.iter().filter(|row| row[0] == "enclosing_loop").collect();
    assert!(!loops.is_empty());
    for row in loops {
        let (v, target): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!((v - target).abs() < 0.01 * target, "{row:?}");
    }
    let shift: f64 = r.iter().find(|row| row[0] == "gauge_spectrum_shift").unwrap()[2].parse().unwrap();
    assert!(shift < 1e-10);
}

#[test]
fn diagram_runs_agree_and_rerun_byte_identically() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg = config("quick.json");
    for d in &dirs {
        let out = abflux(&["experiment", "diagram", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains(": agree"));
    }
    for name in ["diagram.json", "diagram_paths.csv", "diagram_commutativity.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        assert_eq!(a, std::fs::read(dirs[1].path().join(name)).unwrap(), "{name}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("diagram.json")).unwrap()).unwrap();
    assert!(report["commutativity"]["agree"].as_bool().unwrap());
    assert!(report.get("timings").map_or(true, |t| t.is_null()));
}

#[test]
fn zero_flux_diagram_and_timed_sweeps_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("quick.json")).unwrap().replace(TWO_PI, "0.0");
    let cfg = dir.path().join("zero.json");
    std::fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");
    for kind in ["impermeability", "length", "diagram"] {
        let out = abflux(&[
            "--threads",
            "2",
            "experiment",
            kind,
            "--timings",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out_dir.join(format!("{kind}.json"))).unwrap()).unwrap();
        assert_eq!(report["timings"]["threads"].as_u64(), Some(2));
    }
}
