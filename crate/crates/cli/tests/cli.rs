use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dect(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dect"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn dect")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = dect(args, cwd);
    assert!(
        out.status.success(),
        "dect {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn compute_octahedron() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.toml"), "shape = \"octahedron\"\n").unwrap();
    ok(
        &["compute", "--config", "c.toml", "--out", "run"],
        tmp.path(),
    );
    let run = tmp.path().join("run");
    let csv = std::fs::read_to_string(run.join("ect.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 17);
    assert!(lines.iter().all(|l| l.split(',').count() == 16));
    let m = manifest(&run);
    assert_eq!(m["results"]["euler_characteristic"], 2);
    assert!(m["results"]["sanity"]
        .as_str()
        .unwrap()
        .contains("equals 2"));
    assert_eq!(m["seed"], 0);
    assert!(m["phases"]
        .as_array()
        .unwrap()
        .iter()
        .any(|p| p["name"] == "ect"));
}

#[test]
fn compute_from_off_file_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let off = "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";
    std::fs::write(tmp.path().join("square.off"), off).unwrap();
    std::fs::write(
        tmp.path().join("c.toml"),
        "input = \"square.off\"\nmode = \"hard\"\n",
    )
    .unwrap();
    ok(
        &[
            "compute",
            "--config",
            "c.toml",
            "--directions",
            "4",
            "--heights",
            "9",
            "--normalize",
            "vertex",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    let m = manifest(&tmp.path().join("run"));
    assert_eq!(m["results"]["euler_characteristic"], 1);
    assert_eq!(m["results"]["shape"], serde_json::json!([4, 9]));
    assert_eq!(m["config"]["normalize"], "vertex");
    // Hard, per-vertex-count: the last column is chi / |V| = 1/4.
    let csv = std::fs::read_to_string(tmp.path().join("run/ect.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.25")));
}

#[test]
fn learn_directions_trend_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "directions = 8\nconstrained = false\nnormalize = \"vertex\"\n";
    std::fs::write(tmp.path().join("c.toml"), cfg).unwrap();
    ok(
        &["learn-directions", "--config", "c.toml", "--out", "run"],
        tmp.path(),
    );
    let run = tmp.path().join("run");
    let m = manifest(&run);
    assert_eq!(m["results"]["moving_average_nonincreasing"], true);
    assert!(m["results"]["final_loss"].as_f64().unwrap() < 1e-3);
    let trace = std::fs::read_to_string(run.join("loss_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1001);
    let dirs = std::fs::read_to_string(run.join("learned_directions.csv")).unwrap();
    assert_eq!(dirs.lines().next(), Some("x0,x1,norm"));
    assert_eq!(dirs.lines().count(), 9);
}

#[test]
fn replay_from_manifest_is_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.toml"),
        "steps = 200\nsource_points = 16\ntarget_points = 64\n",
    )
    .unwrap();
    ok(
        &[
            "optimize-pointcloud",
            "--config",
            "c.toml",
            "--seed",
            "7",
            "--out",
            "a",
        ],
        tmp.path(),
    );
    ok(
        &[
            "optimize-pointcloud",
            "--config",
            "a/manifest.json",
            "--out",
            "b",
        ],
        tmp.path(),
    );
    for name in [
        "loss_trace.csv",
        "fitted_points.csv",
        "fitted_ect.csv",
        "target_ect.csv",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    assert_eq!(manifest(&tmp.path().join("b"))["seed"], 7);
    ok(
        &[
            "optimize-pointcloud",
            "--config",
            "a/config.toml",
            "--out",
            "c",
        ],
        tmp.path(),
    );
    assert_eq!(
        std::fs::read(tmp.path().join("a/loss_trace.csv")).unwrap(),
        std::fs::read(tmp.path().join("c/loss_trace.csv")).unwrap()
    );
}

#[test]
fn classify_writes_checkpoint_and_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.toml"),
        "epochs = 2\nper_class = 10\ndirections = 4\n",
    )
    .unwrap();
    ok(
        &[
            "classify",
            "--config",
            "c.toml",
            "--constrained",
            "false",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    let run = tmp.path().join("run");
    let model = dect_core::classify::load_checkpoint(&run.join("model.ckpt")).unwrap();
    assert_eq!(model.directions.len(), 4);
    assert!(!model.directions.constrained());
    let metrics = std::fs::read_to_string(run.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
    let m = manifest(&run);
    assert!(m["results"]["test_accuracy"].as_f64().is_some());
}

#[test]
fn benchmark_writes_timings() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.toml"),
        "sizes = [200, 400, 800]\nmin_time_ms = 1\n",
    )
    .unwrap();
    ok(
        &["benchmark", "--config", "c.toml", "--out", "run"],
        tmp.path(),
    );
    let timing = std::fs::read_to_string(tmp.path().join("run/timing.csv")).unwrap();
    assert_eq!(
        timing.lines().next(),
        Some("num_points,num_directions,seconds,repeats")
    );
    assert_eq!(timing.lines().count(), 4);
    assert!(manifest(&tmp.path().join("run"))["results"]["loglog_slope"].is_number());
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str], &str); 4] = [
        (
            "",
            &["compute", "--config", "missing.toml"],
            "cannot read config",
        ),
        (
            "heights = 1\n",
            &["compute", "--config", "c.toml"],
            "height",
        ),
        (
            "input = \"bad.edgelist\"\n",
            &["compute", "--config", "c.toml"],
            "bad.edgelist:",
        ),
        (
            "normalize = \"none\"\n",
            &["optimize-pointcloud", "--config", "c.toml"],
            "normalised",
        ),
    ];
    std::fs::write(tmp.path().join("bad.edgelist"), "2 2\n0 0\n1 1\n0 5\n").unwrap();
    for (cfg, args, needle) in cases {
        std::fs::write(tmp.path().join("c.toml"), cfg).unwrap();
        let out = dect(args, tmp.path());
        assert!(!out.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}
