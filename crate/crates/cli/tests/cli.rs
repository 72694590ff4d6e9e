use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_composite-sgd"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Trace CSV rows with the elapsed column removed.
fn structural(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(1);
            f.join(",")
        })
        .collect()
}

const LASSO: &str = "\
problem = linear-discrete
regularizer = l1
solver = sg,ssg,acsa
K = 200
p = 10
lambda = 0.1
N = 500
seed = 4
trace_every = 50
";

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lasso.cfg", LASSO);
    let o = run(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));

    let out = dir.path().join("out");
    for s in ["sg", "ssg", "acsa"] {
        let text = fs::read_to_string(out.join(format!("trace_{s}_4.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,elapsed_seconds,objective,gap_empirical_best"));
        let its: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(its.first(), Some(&0));
        assert_eq!(its.last(), Some(&501));
        assert!(its.windows(2).all(|w| w[0] < w[1]));
        assert!(!text.contains('\r'));
    }

    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["gap_reference"], "empirical-best");
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    for r in runs {
        let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            [
                "config",
                "final_objective",
                "sigma_sq_pilot",
                "theorem_bound",
                "theorem_bound_smoothed",
                "trace_file",
                "wall_clock_seconds"
            ]
        );
        assert_eq!(r["config"]["K"], "200");
        assert!(r["final_objective"].as_f64().unwrap().is_finite());
        assert!(r["sigma_sq_pilot"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn replay_is_structurally_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lasso.cfg", &LASSO.replace("seed = 4", "seed = 4\nseeds = 3"));
    let mut snapshots = Vec::new();
    for threads in ["1", "4"] {
        let o = bin().args(["run", &cfg]).env("COMPOSITE_SGD_THREADS", threads).output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        let mut snap = Vec::new();
        for s in ["sg", "ssg", "acsa"] {
            for seed in 4..7 {
                snap.push(structural(&dir.path().join(format!("out/trace_{s}_{seed}.csv"))));
            }
        }
        snapshots.push(snap);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn missing_field_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &LASSO.replace("N = 500\n", ""));
    let o = run(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`N`"), "{}", stderr(&o));

    let cfg = write(dir.path(), "bad2.cfg", &format!("{LASSO}colour = red\n"));
    let o = run(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn divergence_exits_3_naming_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.cfg",
        "problem = quadratic\nregularizer = none\nsolver = sg\nlambda = 0\nN = 50\nseed = 0\ncenter = 1e13, 0\n",
    );
    let o = run(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("iteration"), "{}", stderr(&o));
}

#[test]
fn closed_form_gap_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.cfg",
        "problem = quadratic\nregularizer = l1\nsolver = sg\nlambda = 0.5\nN = 100\nseed = 0\ncenter = 2, -1, 0.25\ntrace_every = 10\n",
    );
    let o = run(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/trace_sg_0.csv")).unwrap();
    assert!(text.starts_with("iteration,elapsed_seconds,objective,gap\n"));
    // phi* = 1/2 (0.25 + 0.25 + 0.0625) + 0.5 * 2 = 1.28125
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[2] - 1.28125 - f[3]).abs() < 1e-12);
        assert!(f[3] >= -1e-12);
    }
}

#[test]
fn summary_bounds_recomputed_independently() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.cfg",
        "problem = quadratic\nregularizer = l1\nsolver = sg,ssg\nlambda = 0.2\nN = 98\nseed = 0\ncenter = 1.2, 0, 0, 0\nnoise_sigma_sq = 0.25\n",
    );
    let o = run(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    // D = ||soft(center, 0.2)|| = 1, sigma^2 = 0.25, L = 1, N = 98
    let base = (2.0 + 0.25) / 10.0 + (4.0 + 0.5) / 1e4;
    // ||A|| = lambda, M = p/2, c = 1
    let smoothed = base + 0.2 / 100.0 * (2.0 + 4.5);
    for r in summary["runs"].as_array().unwrap() {
        assert!((r["theorem_bound"].as_f64().unwrap() - base).abs() < 1e-12);
        assert!((r["theorem_bound_smoothed"].as_f64().unwrap() - smoothed).abs() < 1e-12);
    }
}

#[test]
fn compare_merges_three_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let base = LASSO.replace("solver = sg,ssg,acsa\n", "");
    for s in ["sg", "ssg", "acsa"] {
        write(dir.path(), &format!("{s}.cfg"), &format!("{base}solver = {s}\nout = out_{s}\n"));
    }
    let o = run(&["compare", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let merged = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(
        merged.lines().next(),
        Some("iteration,objective_acsa,objective_sg,objective_ssg")
    );
    assert_eq!(merged.lines().count(), 1 + 12);
    let table: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert_eq!(table["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_rejects_single_config_and_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.cfg", LASSO);
    let o = run(&["compare", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    write(dir.path(), "b.cfg", &LASSO.replace("K = 200", "K = 300"));
    let o = run(&["compare", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`K`"), "{}", stderr(&o));
}

#[test]
fn verify_bounds_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.cfg",
        "problem = quadratic\nregularizer = none\nsolver = sg\nlambda = 0\nN = 98\nseed = 0\ncenter = 0.6, -0.8\nnoise_sigma_sq = 0.25\n",
    );
    let o = run(&["verify-bounds", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("over 20 seed(s)") && text.contains("PASS"), "{text}");

    let cfg = write(dir.path(), "one.cfg", &format!("{}seeds = 1\n", fs::read_to_string(&cfg).unwrap()));
    let o = run(&["verify-bounds", &cfg]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("high-variance check"));

    let cfg = write(
        dir.path(),
        "h.cfg",
        "problem = linear-discrete\nregularizer = hierarchical\nsolver = sg\nK = 10\nn = 2\nlambda = 0.1\nN = 10\nseed = 0\n",
    );
    assert_eq!(run(&["verify-bounds", &cfg]).status.code(), Some(2));
}

#[test]
fn generated_data_file_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "gen.cfg", &LASSO.replace("sg,ssg,acsa", "sg"));
    let o = run(&["gen-data", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = fs::read_to_string(dir.path().join("out/data.csv")).unwrap();
    assert!(data.starts_with("y,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10\n"));
    assert_eq!(data.lines().count(), 201);

    assert!(run(&["run", &cfg]).status.success());
    let generated = structural(&dir.path().join("out/trace_sg_4.csv"));
    let cfg = write(
        dir.path(),
        "load.cfg",
        &LASSO.replace("sg,ssg,acsa", "sg").replace("K = 200\n", "data_file = out/data.csv\nout = loaded\n"),
    );
    let o = run(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(structural(&dir.path().join("loaded/trace_sg_4.csv")), generated);
}
