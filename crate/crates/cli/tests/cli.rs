use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cubesec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubesec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn square_frame_has_volume_four() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "square.json", r#"{"n":2,"k":2,"vectors":[[1,0],[0,1]]}"#);
    let v = json_stdout(&cubesec(&["--format", "json", "volume", &f]));
    assert!((v["volume"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["facets"], 4);
    assert_eq!(v["tight"], true);
}

#[test]
fn extremal_frame_round_trips_with_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex.json");
    let out = out.to_str().unwrap();
    let status = cubesec(&["construct-extremal", "--n", "5", "--k", "2", "--out", out]).status;
    assert!(status.success());

    let manifest = format!("{out}.manifest.json");
    assert!(Path::new(&manifest).exists());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert!(m.is_object());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(file["n"], 5);

    let v = json_stdout(&cubesec(&["--format", "json", "volume", out]));
    assert!((v["volume"].as_f64().unwrap() - 4.0 * 6f64.sqrt()).abs() < 1e-9);
}

#[test]
fn explicit_partition_and_signs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex.json");
    let out = out.to_str().unwrap();
    let st = cubesec(&[
        "construct-extremal", "--n", "5", "--k", "2", "--partition", "0,1,2/3,4", "--signs", "1,-1,1,1,-1", "--out", out,
    ])
    .status;
    assert!(st.success());
    let v = json_stdout(&cubesec(&["--format", "json", "volume", out]));
    assert!((v["volume"].as_f64().unwrap() - 4.0 * 6f64.sqrt()).abs() < 1e-9);

    // Unparsable input is a usage error; a partition missing an index is a domain error.
    let garbled = cubesec(&["construct-extremal", "--n", "5", "--k", "2", "--partition", "0,x/2,3"]);
    assert_eq!(garbled.status.code(), Some(2));
    let incomplete = cubesec(&["construct-extremal", "--n", "5", "--k", "2", "--partition", "0,1/2,3"]);
    assert_eq!(incomplete.status.code(), Some(3));
}

#[test]
fn rank_deficient_frame_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "flat.json", r#"{"n":2,"k":2,"vectors":[[1,0],[2,0]]}"#);
    assert_eq!(cubesec(&["volume", &f]).status.code(), Some(3));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"n":2"#);
    assert_eq!(cubesec(&["volume", &f]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(cubesec(&["volume", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_the_square_and_fails_off_optimum() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "square.json", r#"{"n":2,"k":2,"vectors":[[1,0],[0,1]]}"#);
    assert_eq!(cubesec(&["verify", &sq]).status.code(), Some(0));
    // Tight but not critical: three unit vectors at 0°, 50°, 110°, whitened.
    let f = write(
        &dir,
        "skew.json",
        r#"{"n":3,"k":2,"vectors":[[0.8123642564501674,-0.046937053834303674],[0.48622180933224124,0.6048165475351458],[-0.3219513425532627,0.7949804128436263]]}"#,
    );
    let out = cubesec(&["verify", &f]);
    assert_ne!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn bounds_are_ordered() {
    let v = json_stdout(&cubesec(&["--format", "json", "bounds", "--n", "5", "--k", "2"]));
    let text = v.to_string();
    assert!(text.contains("9.79795897"), "{text}");
}

#[test]
fn optimize_writes_result_trace_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("opt.json");
    let trace = dir.path().join("trace.csv");
    let v = json_stdout(&cubesec(&[
        "--format", "json", "--seed", "7", "optimize", "--n", "3", "--k", "2", "--restarts", "2", "--iterations", "300",
        "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]));
    let best = v["best_volume"].as_f64().unwrap();
    assert!((best - 4.0 * 2f64.sqrt()).abs() < 1e-6, "{best}");
    assert_eq!(v["exceeds_conjecture"], false);
    assert!(Path::new(&format!("{}.manifest.json", out.display())).exists());
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.lines().any(|l| l == "restart,iteration,volume"));
    // The result file feeds straight into verify (its best frame is used).
    assert_eq!(cubesec(&["verify", out.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn optimize_is_reproducible_for_a_seed() {
    let run = || {
        json_stdout(&cubesec(&[
            "--format", "json", "--seed", "3", "optimize", "--n", "4", "--k", "2", "--restarts", "2", "--iterations", "150",
            "--no-warm-start",
        ]))["best_volume"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(run().to_bits(), run().to_bits());
}

#[test]
fn reproduce_subset_and_failing_tolerance() {
    let ok = cubesec(&["reproduce", "--only", "planar-claims"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS  9 planar-claims"));

    // Round-off alone exceeds a 1e-20 tightness tolerance.
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rep.json");
    let bad = cubesec(&["reproduce", "--only", "9,2", "--eps-tight", "1e-20", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(Path::new(&format!("{}.manifest.json", out.display())).exists());

    assert_eq!(cubesec(&["reproduce", "--only", "no-such-criterion"]).status.code(), Some(2));
}
