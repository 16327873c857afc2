//! End-to-end checks of the `rotten` binary: exit codes, printed values,
//! file layout, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rotten_core::CompositeSequence;

fn rotten(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotten"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn synth_prints_the_boundary_special_case_and_writes_a_parsable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["synth", "90", "0", "sqrt3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("45.000000"), "missing inner flip angle: {text}");
    assert!(text.contains("180.000000"), "missing inner phase: {text}");
    assert!(text.contains("distance at +f*"), "missing report: {text}");

    let doc = fs::read_to_string(dir.path().join("sequence.seq")).unwrap();
    assert!(doc.starts_with("# rotten synth 90 0 sqrt3"), "header missing: {doc}");
    let seq = CompositeSequence::from_document(&doc).unwrap();
    assert!((seq.pulses()[1].theta().to_degrees() - 45.0).abs() < 1e-10);
}

#[test]
fn synth_rejects_offsets_beyond_the_validity_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["synth", "90", "0", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sqrt(3)"), "stderr: {}", stderr(&out));
    assert!(!dir.path().join("sequence.seq").exists());
}

#[test]
fn identical_invocations_reproduce_files_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = rotten(dir.path(), &["scan", "90", "0", "sqrt3", "-3", "3", "101"]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    assert_eq!(
        fs::read(a.path().join("scan.csv")).unwrap(),
        fs::read(b.path().join("scan.csv")).unwrap()
    );
}

#[test]
fn scan_reports_the_tailored_anchors_and_rejects_a_degenerate_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["scan", "90", "0", "sqrt3", "-3", "3", "601"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("f = 0: lambda_simple = 1.000000000000"), "{text}");
    assert_eq!(text.matches("lambda_composite = 1.000000000000").count(), 2, "{text}");

    let rows = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let data_rows = rows.lines().filter(|l| !l.starts_with('#') && !l.starts_with('f')).count();
    assert_eq!(data_rows, 603, "601 uniform points plus the two tailored anchors");

    let out = rotten(dir.path(), &["scan", "90", "0", "sqrt3", "-3", "3", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trajectory_prints_endpoints_and_writes_all_four_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["trajectory", "rotten", "90", "0", "sqrt3", "sqrt3", "Iz"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("endpoint: (0.0000, -1.0000, 0.0000)"), "{}", stdout(&out));
    for name in
        ["trajectory_xy.svg", "trajectory_xz.svg", "trajectory_yz.svg", "trajectory_samples.csv"]
    {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let svg = fs::read_to_string(dir.path().join("trajectory_xy.svg")).unwrap();
    assert!(svg.starts_with("<!-- rotten trajectory rotten 90 0 sqrt3 sqrt3 Iz"));

    let out = rotten(dir.path(), &["trajectory", "simple", "90", "0", "-", "sqrt3", "Iz"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("endpoint: (0.8660, 0.0000, 0.5000)"), "{}", stdout(&out));
}

#[test]
fn trajectory_rejects_bad_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["trajectory", "simple", "90", "0", "-", "0", "Iq"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rotten(dir.path(), &["trajectory", "simple", "90", "0", "1.0", "0", "Ix"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rotten(dir.path(), &["trajectory", "rotten", "90", "0", "-", "0", "Ix"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_reports_the_expected_phase_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["spectrum", "simple"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("line 1 at 9240 Hz: phase +90.005 deg"), "{text}");
    assert!(text.contains("line 2 at -9240 Hz: phase -90.005 deg"), "{text}");

    let out = rotten(dir.path(), &["spectrum", "rotten"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().filter(|l| l.starts_with("line")) {
        let phase: f64 = line
            .split("phase ")
            .nth(1)
            .and_then(|s| s.strip_suffix(" deg"))
            .unwrap()
            .parse()
            .unwrap();
        assert!(phase.abs() < 0.1, "tailored phase too large: {line}");
    }
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.contains("freq_hz,real,imag,magnitude"));
}

#[test]
fn spectrum_rejects_lines_outside_the_tailorable_range() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("wide.json");
    fs::write(
        &config,
        r#"{
  "lines": [
    { "offset_hz": 9240.0, "amplitude": 1.0 },
    { "offset_hz": -9240.0, "amplitude": 1.0 }
  ],
  "nu1_hz": 4620.0,
  "t2_s": 0.05,
  "dwell_s": 0.00002,
  "points": 12500
}
"#,
    )
    .unwrap();
    let out = rotten(dir.path(), &["spectrum", "rotten", "--config", "wide.json"]);
    assert_eq!(out.status.code(), Some(2), "stdout: {}", stdout(&out));
    assert!(stderr(&out).contains("exceeds sqrt(3)"), "stderr: {}", stderr(&out));

    let out = rotten(dir.path(), &["spectrum", "simple", "--config", "wide.json"]);
    assert_eq!(out.status.code(), Some(0), "simple mode has no tailoring bound");
}

#[test]
fn verify_reports_a_corrupted_file_instead_of_rejecting_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotten(dir.path(), &["synth", "90", "0", "sqrt3"]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("sequence.seq");
    let doc = fs::read_to_string(&path).unwrap();
    fs::write(&path, doc.replace("\"phi_deg\": 180.0", "\"phi_deg\": 145.0")).unwrap();

    let out = rotten(dir.path(), &["verify", "sequence.seq"]);
    assert_eq!(out.status.code(), Some(0), "verification reports, it does not assert");
    let text = stdout(&out);
    let distance: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("distance at +f*: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(distance > 1e-3, "corruption must show up in the distance: {text}");
}

#[test]
fn verify_numeric_agrees_with_a_synthesized_file() {
    let dir = tempfile::tempdir().unwrap();
    rotten(dir.path(), &["synth", "90", "0", "sqrt3"]);
    let out = rotten(dir.path(), &["verify", "sequence.seq", "--numeric"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("converged = true"), "{text}");
    for line in text.lines().filter(|l| l.starts_with("propagator agreement")) {
        let d: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(d < 1e-6, "{line}");
    }

    let out = rotten(dir.path(), &["verify", "sequence.seq", "--numeric", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rotten(dir.path(), &["verify", "missing.seq"]);
    assert_eq!(out.status.code(), Some(2));
}
