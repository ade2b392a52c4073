use std::path::Path;
use std::process::{Command, Output};

fn kahan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kahan"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// The number after `label` on the first line containing it.
fn value_after(report: &str, label: &str) -> f64 {
    let line = report.lines().find(|l| l.contains(label)).unwrap_or_else(|| panic!("no '{label}' in\n{report}"));
    line[line.find(label).unwrap() + label.len()..].trim().parse().unwrap()
}

#[test]
fn zero_steps_gives_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = quartic\nsteps = 0\n");
    let out = kahan(&["orbit", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["step,x1_0,x1_1", "0,0.31,0.3"]);
    let svg = std::fs::read_to_string(dir.path().join("phase.svg")).unwrap();
    assert!(svg.contains("empty orbit") && !svg.contains("polyline"));
}

#[test]
fn quartic_report_conserves_the_integral() {
    let dir = tempfile::tempdir().unwrap();
    let out = kahan(&["report", "--preset", "quartic"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("2 polynomial(s)"));
    assert!(value_after(&report, "relative drift of P2/P1 over 1001 points:") <= 1e-10);
    let order = value_after(&report, "measured order:");
    assert!((order - 2.0).abs() <= 0.3, "{order}");
}

#[test]
fn variational_beam_is_symplectic() {
    let dir = tempfile::tempdir().unwrap();
    let out = kahan(&["analyze-beam", "--preset", "beam-lag"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("beam.txt")).unwrap();
    let section = &text[text.find("symplecticity of the variational map").unwrap()..];
    assert!(value_after(section, "max defect:") <= 1e-8);
}

#[test]
fn bad_weights_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = beam-sym\n[beam]\nalpha = 0.1, 0.1, 0.1, 0.1, 0.1, 0.4\n");
    let out = kahan(&["report", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = lv\n[parameters]\nalpha = x\n");
    let out = kahan(&["orbit", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn singular_orbits_still_succeed() {
    let dir = tempfile::tempdir().unwrap();
    // x' = x^2 gives x~ = x / (1 - h x), which has no image at x = 1/h
    let cfg = write_config(dir.path(), "order = 1; rhs = x1^2; window = 1; h = 0.5; steps = 20\n");
    let out = kahan(&["report", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("orbit: singular at step"), "{report}");
}

#[test]
fn inline_system_round_trips_through_discretize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "order: 2; rhs: -a*x1^3; window: 0.1, 0.2\n[parameters]\na: 1\n");
    let out = kahan(&["discretize", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("scheme.txt")).unwrap();
    assert!(text.contains("x1' -> "), "{text}");
}

#[test]
fn reports_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(kahan(&["report", "--preset", "lv"], dir.path()).status.success());
    }
    for name in ["report.txt", "orbit.csv", "phase.svg"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
}
