use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wristfuse")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn synth(out: &Path, seed: &str) {
    let o = run(&["synth", "--subjects", "2", "--duration", "240", "--seed", seed, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["S1", "S2"] {
        let mut names: Vec<_> = fs::read_dir(root.join(sub)).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names {
            out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
        }
    }
    out
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("a"), "11");
    synth(&dir.path().join("b"), "11");
    synth(&dir.path().join("c"), "12");
    let a = tree_bytes(&dir.path().join("a"));
    assert_eq!(a.len(), 10);
    assert_eq!(a, tree_bytes(&dir.path().join("b")));
    assert_ne!(a, tree_bytes(&dir.path().join("c")));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();
    assert_eq!(code(&["synth", "--subjects", "1", "--out", out]), 2);
    assert_eq!(code(&["eval", "--data", dir.path().join("missing").to_str().unwrap()]), 2);
    assert_eq!(code(&["bogus"]), 2);

    let data = dir.path().join("data");
    synth(&data, "1");
    let d = data.to_str().unwrap();
    assert_eq!(code(&["eval", "--data", d, "--delta", "1.5"]), 2);
    assert_eq!(code(&["eval", "--data", d, "--set", "nope=1"]), 2);
    assert_eq!(code(&["eval", "--data", d, "--fusion", "median"]), 2);
    assert_eq!(code(&["sweep", "--data", d, "--deltas", ""]), 2);
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "2");
    fs::remove_file(data.join("S2").join("BVP.csv")).unwrap();
    let o = run(&["eval", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing BVP"));
}

#[test]
fn eval_train_and_sweep_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "3");
    let d = data.to_str().unwrap();
    let out = dir.path().join("out");
    let o = run(&["eval", "--data", d, "--fusion", "soft", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next().unwrap(),
        "subject,window,start_time,truth,predicted,selected,gate_probs,cost,baseline_cost"
    );
    let rows = lines.count();
    assert!(rows > 0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let micro = summary.lines().find(|l| l.starts_with("micro")).unwrap();
    assert_eq!(micro.split(',').nth(2).unwrap().parse::<usize>().unwrap(), rows);
    let scopes: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scopes, ["fold", "fold", "micro", "mean"]);
    assert!(out.join("energy.csv").is_file());

    let model = dir.path().join("m.json");
    assert_eq!(code(&["train", "--data", d, "--out", model.to_str().unwrap()]), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["format"], "wristfuse-model");
    assert_eq!(json["version"], 1);
    assert_eq!(code(&["eval", "--data", d, "--model", model.to_str().unwrap()]), 0);
    assert_eq!(code(&["energy", "--model", model.to_str().unwrap()]), 0);

    let sweep_out = dir.path().join("sweep");
    let o = run(&["sweep", "--data", d, "--deltas", "0,0.3,0.7,1", "--out", sweep_out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(sweep_out.join("sweep.csv")).unwrap();
    let energy: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert_eq!(energy.len(), 4);
    assert!(energy.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{energy:?}");
}
