use std::path::Path;
use std::process::{Command, Output};

fn bankcard(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bankcard"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bankcard(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn prepare(dir: &Path) {
    ok(dir, &["gen", "--out", "data", "--n-customers", "300", "--n-branches", "5", "--seed", "2"]);
    ok(dir, &["split", "--data", "data", "--out", "split.csv", "--seed", "2"]);
}

#[test]
fn train_eval_importance_features() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    std::fs::write(dir.join("hyper.kv"), "n_trees = 20\nmax_depth = 3\n").unwrap();
    ok(dir, &[
        "train", "--task", "1", "--data", "data", "--split", "split.csv", "--config", "hyper.kv", "--models", "m1",
        "--predictions", "p1.csv",
    ]);
    let report = ok(dir, &["eval", "--task", "1", "--data", "data", "--predictions", "p1.csv"]);
    assert!(report.starts_with("task = 1\n"));
    assert!(report.contains("\nscore = "));
    let preds = std::fs::read_to_string(dir.join("p1.csv")).unwrap();
    assert!(preds.starts_with("customer_id,branch_id,rank,value\n"));
    assert_eq!((preds.lines().count() - 1) % 5, 0);

    ok(dir, &[
        "train", "--task", "2", "--data", "data", "--split", "split.csv", "--config", "hyper.kv", "--models", "m2",
        "--predictions", "p2.csv",
    ]);
    let report = ok(dir, &["eval", "--task", "2", "--data", "data", "--predictions", "p2.csv"]);
    assert!(report.contains("auc = "));

    let imp = ok(dir, &["importance", "--model", "m1"]);
    assert!(imp.starts_with("feature,importance\n"));
    let total: f64 = imp.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    ok(dir, &["importance", "--model", "m2/model.json", "--out", "imp.csv"]);

    ok(dir, &["features", "--task", "1", "--data", "data", "--split", "split.csv", "--branch", "3", "--out", "f.csv"]);
    let f = std::fs::read_to_string(dir.join("f.csv")).unwrap();
    assert!(f.starts_with("customer_id,age_1,"));
    assert_eq!(f.lines().count(), 301);
}

#[test]
fn tune_writes_a_resumable_log() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    std::fs::write(dir.join("space.kv"), "n_trees = 10 30 log int\neta = 0.05 0.3 log real\n").unwrap();
    let base = [
        "tune", "--task", "2", "--data", "data", "--split", "split.csv", "--space", "space.kv", "--parallel", "2",
        "--log", "trials.csv", "--seed", "1",
    ];
    let mut args = base.to_vec();
    args.extend(["--budget", "4"]);
    ok(dir, &args);
    let mut args = base.to_vec();
    args.extend(["--budget", "6", "--resume", "--out", "best.kv"]);
    ok(dir, &args);
    let log = std::fs::read_to_string(dir.join("trials.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "trial_id,n_trees,eta,loss,status,wall_seconds");
    assert_eq!(log.lines().count(), 7);
    let best = std::fs::read_to_string(dir.join("best.kv")).unwrap();
    assert!(best.contains("n_trees = "));
}

#[test]
fn ablate_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    std::fs::write(dir.join("hyper.kv"), "n_trees = 10\n").unwrap();
    ok(dir, &[
        "ablate", "--data", "data", "--split", "split.csv", "--config", "hyper.kv", "--variant",
        "distance+distance-stats+knn", "--variant", "channel", "--out", "abl.csv",
    ]);
    let t = std::fs::read_to_string(dir.join("abl.csv")).unwrap();
    let names: Vec<&str> = t.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["full", "distance+distance-stats+knn", "channel"]);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);

    // unknown ablation group
    let out = bankcard(dir, &["ablate", "--data", "data", "--split", "split.csv", "--variant", "weather", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));

    // malformed data file
    std::fs::create_dir(dir.join("bad")).unwrap();
    for f in ["customers.csv", "branches.csv", "activities.csv", "visits.csv", "labels_task2.csv"] {
        std::fs::copy(dir.join("data").join(f), dir.join("bad").join(f)).unwrap();
    }
    std::fs::write(dir.join("bad/branches.csv"), "branch_id,x,y\n0,1,1\n1,2,2\n").unwrap();
    let out = bankcard(dir, &["split", "--data", "bad", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    // predictions only for customers without visits: the score is undefined
    let visits = std::fs::read_to_string(dir.join("data/visits.csv")).unwrap();
    let visited: std::collections::HashSet<&str> = visits.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let customers = std::fs::read_to_string(dir.join("data/customers.csv")).unwrap();
    let idle = customers
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .find(|id| !visited.contains(id))
        .expect("some customer never visits");
    let mut p = String::from("customer_id,branch_id,rank,value\n");
    for r in 0..5 {
        p.push_str(&format!("{idle},{r},{},1.0\n", r + 1));
    }
    std::fs::write(dir.join("idle.csv"), p).unwrap();
    let out = bankcard(dir, &["eval", "--task", "1", "--data", "data", "--predictions", "idle.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let out = bankcard(dir, &["train", "--task", "3", "--data", "data"]);
    assert_eq!(out.status.code(), Some(2));
}
