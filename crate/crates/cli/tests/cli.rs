use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn robgap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robgap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn robgap")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = robgap(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fail(dir: &Path, args: &[&str]) -> String {
    let out = robgap(dir, args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should exit 1");
    String::from_utf8(out.stderr).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn theory_reference_row() {
    let dir = TempDir::new().unwrap();
    let csv = ok(dir.path(), &["theory", "--n-grid", "1", "--eps-list", "0,1.6"]);
    let r = rows(&csv);
    assert_eq!(r[0][..3], ["n", "eps", "gap_std"]);
    assert_eq!(r.len(), 3);
    let std: f64 = r[1][2].parse().unwrap();
    assert!((std - 48.3941449038287).abs() < 1e-11);
    assert_eq!(r[1][2], r[1][3], "eps = 0 rows must agree exactly");
    assert_eq!(r[2][5], "std_greater");
}

#[test]
fn theory_root_and_minimum_columns() {
    let dir = TempDir::new().unwrap();
    let csv = ok(dir.path(), &["theory", "--d", "1", "--n-grid", "1", "--eps", "3"]);
    let r = rows(&csv);
    let col = |name: &str| r[0].iter().position(|h| h == name).unwrap();
    let root: f64 = r[1][col("root")].parse().unwrap();
    let min_n: f64 = r[1][col("min_n")].parse().unwrap();
    assert!((root - 0.18746638288197456).abs() < 1e-12);
    assert!((min_n - 0.5547310321921134).abs() < 1e-6);
    assert_eq!(r[1][col("regime")], "always_decreasing");
}

#[test]
fn invalid_parameters_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    assert!(fail(dir.path(), &["theory", "--d", "0"]).contains("`d`"));
    assert!(fail(dir.path(), &["theory", "--sigma=-1"]).contains("`sigma`"));
    assert!(fail(dir.path(), &["theory", "--eps=-0.5"]).contains("eps"));
    assert!(fail(dir.path(), &["mc", "--n-grid", "1.5"]).contains("n_grid"));
    assert!(fail(dir.path(), &["bounds", "--mu-list", "1,2", "--sigma-list", "1", "--eps", "0.1"]).contains("error"));
    assert!(fail(dir.path(), &["bounds", "--mu-list", "1", "--sigma-list", "1", "--eps", "1"]).contains("eps"));
}

#[test]
fn plot_rejects_empty_and_missing_columns() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("empty.csv"), "n,gap_rob\n").unwrap();
    fail(p, &["plot", "--input", "empty.csv", "--out", "empty.svg"]);
    assert!(!p.join("empty.svg").exists());

    ok(p, &["theory", "--n-grid", "1,2", "--out", "t.csv"]);
    let err = fail(p, &["plot", "--input", "t.csv", "--out", "t.svg", "--y", "nope"]);
    assert!(err.contains("`nope`"), "{err}");
    assert!(!p.join("t.svg").exists());

    ok(p, &["plot", "--input", "t.csv", "--out", "t.svg", "--series", "eps", "--log-x"]);
    let svg = std::fs::read_to_string(p.join("t.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn trace_attack_fixed_tau() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("trace.csv"), "example_id,loss,is_member\na,0.1,1\nb,0.9,1\nc,0.8,0\nd,0.2,0\n").unwrap();
    let csv = ok(p, &["attack", "--trace", "trace.csv", "--tau", "0.5"]);
    let r = rows(&csv);
    let col = |name: &str| r[0].iter().position(|h| h == name).unwrap();
    assert_eq!(r[1][col("accuracy")].parse::<f64>().unwrap(), 0.5);
    assert_eq!(r[1][col("tau")].parse::<f64>().unwrap(), 0.5);

    std::fs::write(p.join("bad.csv"), "example_id,loss,is_member\na,0.1,2\n").unwrap();
    let err = fail(p, &["attack", "--trace", "bad.csv", "--tau", "0.5"]);
    assert!(err.contains("line 2"), "{err}");

    std::fs::write(p.join("one.csv"), "example_id,loss,is_member\na,0.1,1\n").unwrap();
    fail(p, &["attack", "--trace", "one.csv", "--tau", "0.5"]);
}

#[test]
fn manifest_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("m.json"),
        r#"{"spec":{"d":3,"mu":1,"sigma":1,"gamma":1},"n_grid":[1,2],"eps_list":[0,0.5],
            "trials":4,"master_seed":7,"outputs":{"root":"out/run"}}"#,
    )
    .unwrap();
    ok(p, &["theory", "--manifest", "m.json"]);
    let a = std::fs::read_to_string(p.join("out/run.csv")).unwrap();
    assert_eq!(rows(&a).len(), 5);
    assert!(p.join("out/run.svg").exists());

    let b = ok(p, &["theory", "--manifest", "m.json", "--d", "6", "--out", "-"]);
    let b = if b.is_empty() { std::fs::read_to_string(p.join("-")).unwrap() } else { b };
    let (ra, rb) = (rows(&a), rows(&b));
    let sa: f64 = ra[1][2].parse().unwrap();
    let sb: f64 = rb[1][2].parse().unwrap();
    assert!((sb - 2.0 * sa).abs() < 1e-12 * sb);

    std::fs::write(p.join("bad.json"), r#"{"trails":4}"#).unwrap();
    assert!(fail(p, &["theory", "--manifest", "bad.json"]).contains("bad.json"));
}

#[test]
fn bounds_worked_values() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let value = |bound: &str, args: &[&str]| -> f64 {
        let r = rows(&ok(p, args));
        let col = r[0].iter().position(|h| h == "value").unwrap();
        let row = r.iter().find(|row| row[0] == bound).unwrap();
        row[col].parse().unwrap()
    };
    assert_eq!(value("original", &["bounds", "--mu-list", "1", "--sigma-list", "1", "--eps", "0.5"]), 1.5);
    let v = value("label_noise", &["bounds", "--mu-list", "1", "--sigma-list", "1", "--eps", "0.1", "--zeta", "0.75"]);
    assert!((v - 8.109302162163289).abs() < 1e-12, "{v}");
}

#[test]
fn mc_and_attack_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let mc = ["mc", "--d", "5", "--n-grid", "2,5", "--eps-list", "0,1", "--trials", "50", "--seed", "3"];
    assert_eq!(ok(p, &mc), ok(p, &mc));
    let mut other = mc.to_vec();
    other[10] = "4";
    assert_ne!(ok(p, &mc), ok(p, &other));

    let at = ["attack", "--d", "5", "--n-grid", "4", "--eps", "0.5", "--trials", "20", "--seed", "1"];
    let a = ok(p, &at);
    assert_eq!(a, ok(p, &at));
    let r = rows(&a);
    assert_eq!(r.len(), 1 + 20 + 1);
    assert_eq!(r[21][0], "aggregate");
}

#[test]
fn gd_train_trace_written() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "mc", "--d", "4", "--gamma", "0.01", "--n-grid", "3", "--eps", "0.5", "--trials", "3", "--solver", "gd",
            "--epochs", "20", "--train-trace", "trace.csv", "--out", "mc.csv",
        ],
    );
    let r = rows(&std::fs::read_to_string(p.join("trace.csv")).unwrap());
    assert_eq!(r[0], ["n", "eps", "epoch", "mean_loss", "objective", "theta_hash"]);
    assert_eq!(r.len(), 1 + 20);
}
