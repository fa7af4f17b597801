use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use zeus_bench::report::{read_csv, read_json, CsvRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zeus-cluster"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn cluster_writes_labelled_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let input = fixture("witness.json");
    let o = run(&[
        "cluster", "--input", input.to_str().unwrap(), "--objectives", "rs,kc", "--slack", "1,3",
        "--k", "2", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["clusters"], serde_json::json!([["a", "b"], ["c", "d"]]));
    assert_eq!(v["values"], serde_json::json!([1.0, 8.0]));
}

#[test]
fn cluster_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("f.json");
    let o = run(&["gen", "--kind", "f", "--n", "60", "--seed", "7", "--output", inst.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut seen = Vec::new();
    for i in 0..3 {
        let out = dir.path().join(format!("c{i}.json"));
        let o = run(&[
            "cluster", "--input", inst.to_str().unwrap(), "--objectives", "f,kc", "--slack", "1,3",
            "--k", "4", "--first-center", "random", "--seed", "11", "--output", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        seen.push(fs::read(&out).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[1], seen[2]);
}

#[test]
fn gen_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["gen", "--kind", "rs", "--n", "30", "--seed", "3", "--output", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    let input = fixture("witness.json");
    let input = input.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let out = out.to_str().unwrap();

    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["cluster", "--input", input])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let unknown = run(&[
        "cluster", "--input", input, "--objectives", "xx", "--slack", "1", "--k", "2", "--output", out,
    ]);
    assert_eq!(code(&unknown), 1);
    let bad_slack = run(&[
        "cluster", "--input", input, "--objectives", "rs,kc", "--slack", "1,1", "--k", "2", "--output", out,
    ]);
    assert_eq!(code(&bad_slack), 1);
    let missing = run(&[
        "cluster", "--input", "/nonexistent.json", "--objectives", "kc", "--slack", "2", "--k", "2",
        "--output", out,
    ]);
    assert_eq!(code(&missing), 1);
    // two stars cannot fill three blocks
    let infeasible = run(&[
        "cluster", "--input", input, "--objectives", "rs,kc", "--slack", "1,3", "--k", "3", "--output", out,
    ]);
    assert_eq!(code(&infeasible), 2, "{}", String::from_utf8_lossy(&infeasible.stderr));
}

#[test]
fn oracle_prints_optimum() {
    let input = fixture("witness.json");
    let o = run(&["oracle", "--input", input.to_str().unwrap(), "--objectives", "rs,kc", "--k", "2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"][0], 1.0);
    assert_eq!(v["enumerated"], 7);
}

fn bench_config(dir: &Path) -> PathBuf {
    let config = dir.join("exp.json");
    let text = fs::read_to_string(fixture("witness_bench.json"))
        .unwrap()
        .replace("witness.json", fixture("witness.json").to_str().unwrap())
        .replace("unused", dir.join("report").to_str().unwrap());
    fs::write(&config, text).unwrap();
    config
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = bench_config(dir.path());
    let o = run(&["bench", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("report");
    let records = read_json(report.join("results.json")).unwrap();
    // 5 algorithms × 2 values of k × 2 slack settings
    assert_eq!(records.len(), 20);
    let csv_text = fs::read_to_string(report.join("results.csv")).unwrap();
    assert_eq!(csv_text.lines().count(), records.len() + 1);
    assert_eq!(
        csv_text.lines().next().unwrap(),
        "algorithm,k,slack,seed,o1_rs,o2_kc,wall_ms,error"
    );
    let rows = read_csv(report.join("results.csv")).unwrap();
    assert_eq!(rows, records.iter().map(CsvRecord::of).collect::<Vec<_>>());
    let svgs = fs::read_dir(&report)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 4);
    assert!(records.iter().all(|r| r.error.is_none()), "{records:?}");
}
