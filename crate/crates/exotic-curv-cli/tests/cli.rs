//! End-to-end tests of the `exotic-curv` binary.

use std::path::Path;
use std::process::{Command, Output};

fn exe() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_exotic-curv"));
    c.env_remove("EXOTIC_CURV_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    exe().current_dir(dir).args(args).output().expect("binary runs")
}

const SMALL_SCAN: &str = "seed = 5\ngrid_t = 3\ngrid_theta = 4\nplanes_per_point = 4\nstage = \"fiber_scaled\"\n\n[scan]\nneighborhood = false\n";

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn verify_psi_on_defaults_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--suite", "psi"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/verify.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(json["reports"][0]["id"], "psi");
}

#[test]
fn malformed_config_exits_with_two_and_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\ngrid_t = [\n");
    let out = run(dir.path(), &["--config", &cfg, "verify", "--suite", "psi"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn configuration_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), &["verify", "--suite", "no-such-suite"]).status.code(),
        Some(2)
    );
    assert_eq!(run(dir.path(), &["verify", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["--jobs", "0", "scan"]).status.code(), Some(2));
    let bad_seed = exe()
        .current_dir(dir.path())
        .env("EXOTIC_CURV_SEED", "x")
        .args(["verify", "--suite", "psi"])
        .output()
        .unwrap();
    assert_eq!(bad_seed.status.code(), Some(2));
    let cfg = write_config(dir.path(), "unknown_key = 3\n");
    assert_eq!(run(dir.path(), &["--config", &cfg, "verify"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "file").unwrap();
    let out = run(dir.path(), &["--out", "blocker/sub", "verify", "--suite", "psi"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_from_the_environment_changes_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let hash = |seed: Option<&str>| {
        let mut c = exe();
        c.current_dir(dir.path()).args(["verify", "--suite", "lambda"]);
        if let Some(s) = seed {
            c.env("EXOTIC_CURV_SEED", s);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
        let json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("out/verify.json")).unwrap()).unwrap();
        (
            json["config_hash"].as_str().unwrap().to_string(),
            json["config"].as_str().unwrap().to_string(),
        )
    };
    let (a, _) = hash(None);
    let (b, text) = hash(Some("99"));
    assert_ne!(a, b);
    assert!(text.contains("seed = 99"));
}

#[test]
fn scan_csv_is_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SCAN);
    let csv = |jobs: &str, out: &str| {
        let o = run(
            dir.path(),
            &[
                "--config", &cfg, "--jobs", jobs, "--out", out, "--format", "csv", "scan",
            ],
        );
        assert!(
            matches!(o.status.code(), Some(0) | Some(1)),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(dir.path().join(out).join("scan.csv")).unwrap()
    };
    let a = csv("1", "a");
    assert_eq!(a, csv("1", "b"));
    assert_eq!(a, csv("8", "c"));
}

#[test]
fn scan_summary_matches_the_csv_and_the_heatmap_matches_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SCAN);
    let o = run(dir.path(), &["--config", &cfg, "scan"]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let text = std::fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "sec").unwrap();
    let min = lines
        .map(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/scan_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["global_min"].as_f64().unwrap(), min);
    assert_eq!(summary["counts"]["cells"], 12);
    let svg = std::fs::read_to_string(dir.path().join("out/scan_heatmap.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="cell""#).count(), 12);
    assert!(svg.contains(r#"viewBox="0 0 800 600""#));
}

#[test]
fn zero_locus_profile_contains_the_pi_over_six_intercept() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["profile", "zero-locus"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/profile_zero-locus.csv")).unwrap();
    let hit = text.lines().skip(1).any(|l| {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        (v[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-12 && (v[1] - std::f64::consts::FRAC_PI_6).abs() < 1e-12
    });
    assert!(hit);
    let svg = std::fs::read_to_string(dir.path().join("out/profile_zero-locus.svg")).unwrap();
    assert!(svg.contains("t = pi/6"));
}

#[test]
fn psi_profile_annotates_the_endpoint_and_curvature_changes_sign_below_nu() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), &["profile", "psi", "--format", "csv,svg,json"])
            .status
            .code(),
        Some(0)
    );
    let svg = std::fs::read_to_string(dir.path().join("out/profile_psi.svg")).unwrap();
    assert!(svg.contains("psi(pi/4) = nu_l/2"));
    assert!(dir.path().join("out/profile_psi.json").exists());
    let o = run(dir.path(), &["profile", "meridian-curvature"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("out/profile_meridian-curvature.svg")).unwrap();
    assert!(svg.contains("sign change at t"));
}

#[test]
fn report_config_reproduces_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 4\nC = 0.5\n");
    assert_eq!(
        run(dir.path(), &["--config", &cfg, "verify", "--suite", "lambda"])
            .status
            .code(),
        Some(0)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/verify.json")).unwrap()).unwrap();
    let again = write_config(dir.path(), json["config"].as_str().unwrap());
    assert_eq!(
        run(
            dir.path(),
            &["--config", &again, "--out", "o2", "verify", "--suite", "lambda"]
        )
        .status
        .code(),
        Some(0)
    );
    let json2: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o2/verify.json")).unwrap()).unwrap();
    assert_eq!(json["config_hash"], json2["config_hash"]);
    assert_eq!(json["reports"], json2["reports"]);
}
