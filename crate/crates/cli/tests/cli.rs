use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_shapshift");

/// A small scenario so every command finishes in seconds.
const SMALL: &[&str] = &[
    "--n-samples", "3000", "--break-index", "2000", "--ramp-len", "500",
    "--n-train", "2000", "--n-val", "500", "--n-trees", "40",
];

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("SHAPSHIFT_MODEL_N_TREES")
        .output()
        .unwrap()
}

fn small(args: &[&str]) -> Vec<String> {
    args.iter().chain(SMALL).map(|s| s.to_string()).collect()
}

fn run_small(dir: &Path, args: &[&str]) -> Output {
    let v = small(args);
    run(dir, &v.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_writes_full_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["synth", "--kind", "sudden", "--case", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("synth.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 22);
    assert_eq!(lines.count(), 29999);
    let meta = fs::read_to_string(dir.path().join("synth.meta")).unwrap();
    assert!(meta.contains("kind=sudden"));

    let again = tempfile::tempdir().unwrap();
    assert!(run(again.path(), &["synth", "--kind", "sudden", "--case", "1"]).status.success());
    assert_eq!(fs::read(again.path().join("synth.csv")).unwrap(), csv.as_bytes());
}

#[test]
fn invalid_kind_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["synth", "--kind", "gradual"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("synth.kind"), "{}", stderr(&o));
}

#[test]
fn reversed_quantiles_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(dir.path(), &["select", "--q-low", "0.9", "--q-high", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "selector.q_lo = 0.2\n").unwrap();
    let o = run(dir.path(), &["synth", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("selector.q_lo"));
    let o = run(dir.path(), &["synth", "--no-such-flag", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN)
        .args(["synth", "--out"])
        .arg(dir.path())
        .env("SHAPSHIFT_BOGUS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["select", "--data.path", "/nonexistent/x.csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn layers_override_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "synth.n_samples = 500\nsynth.break_index = 300\nsynth.seed = 4\n").unwrap();
    let meta = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(BIN);
        c.args(["synth", "--config", cfg.to_str().unwrap(), "--out"]).arg(dir.path()).args(extra);
        if let Some(v) = env {
            c.env("SHAPSHIFT_SYNTH_SEED", v);
        }
        assert!(c.output().unwrap().status.success());
        fs::read_to_string(dir.path().join("synth.meta")).unwrap()
    };
    assert!(meta(&[], None).contains("seed=4"));
    assert!(meta(&[], Some("5")).contains("seed=5"));
    assert!(meta(&["--synth.seed", "6"], Some("5")).contains("seed=6"));
}

#[test]
fn select_writes_trace_and_sorted_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(dir.path(), &["select", "--n-iter-prev", "0", "--shift", "false"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "iteration,n_features,removed,removal_kind,metric_value");
    assert!(lines[lines.len() - 2].contains(",none,"), "{trace}");
    assert!(lines[lines.len() - 1].starts_with("best,"));
    let names = fs::read_to_string(dir.path().join("selected_features.txt")).unwrap();
    let names: Vec<&str> = names.lines().collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(!names.is_empty());
}

#[test]
fn select_on_user_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    let mut text = String::from("a,b,const,target\n");
    for i in 0..400 {
        let a = (i * 37 % 400) as f64 / 400.0;
        let b = (i * 91 % 400) as f64 / 400.0;
        text.push_str(&format!("{a},{b},1,{}\n", 2.0 * a - b));
    }
    fs::write(&csv, text).unwrap();
    let o = run(
        dir.path(),
        &[
            "select", "--path", csv.to_str().unwrap(), "--target", "target", "--mode", "random",
            "--n-iter-prev", "0", "--n-trees", "30", "--min-samples-leaf", "5",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().nth(1).unwrap().contains(",const,infinite-sweep,"), "{trace}");
}

#[test]
fn shap_verifies_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(
        dir.path(),
        &["shap", "--verify", "--verify-exact", "--lagged-inputs", "false", "--max-rows", "50"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("shap.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "row_index");
    assert_eq!(&header[header.len() - 2..], ["base_value", "prediction"]);
    assert_eq!(csv.lines().count(), 51);
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let sum: f64 = v[1..v.len() - 1].iter().sum();
        assert!((sum - v[v.len() - 1]).abs() < 1e-8);
    }
    // 21 features is too many to enumerate
    let o = run_small(dir.path(), &["shap", "--verify-exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_rows_header_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["bench", "--scenario", "sudden", "--case", "1", "--seeds", "1..3", "--n-iter-prev", "2", "--per-seed"];
    let o = run_small(a.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run_small(b.path(), &args).status.success());
    let csv = fs::read_to_string(a.path().join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm,n_features,mae_mean,mae_std,mae_max,mae_min,rmse_mean,rmse_std,rmse_max,rmse_min,r2_mean,r2_std,r2_max,r2_min"
    );
    assert!(lines.len() - 1 >= 7);
    assert!(lines.iter().any(|l| l.starts_with("keep_all,21,")));
    for f in ["bench.csv", "bench_per_seed.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let long = fs::read_to_string(a.path().join("bench_per_seed.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + (lines.len() - 1) * 3);
}
