use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ksel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksel")).args(args).output().expect("spawn ksel")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Deterministic regression data: y depends on columns a and c only.
fn write_data(dir: &Path) -> PathBuf {
    let mut s = String::from("a,b,c,d,e,f,y\n");
    let mut state = 0x2545_f491_u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..50 {
        let x: Vec<f64> = (0..6).map(|_| 2.0 * next()).collect();
        let y = 1.5 * x[0] + x[2] * x[2] + 0.05 * next();
        let cells: Vec<String> = x.iter().chain([y].iter()).map(|v| format!("{v}")).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    let path = dir.join("data.csv");
    std::fs::write(&path, s).unwrap();
    path
}

fn select_json(args: &[&str]) -> (i32, Value) {
    let o = ksel(args);
    (code(&o), serde_json::from_str(&stdout(&o)).unwrap_or(Value::Null))
}

fn ranked_names(report: &Value) -> Vec<String> {
    report["ranked"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap().to_string()).collect()
}

#[test]
fn select_emits_report() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let data = data.to_str().unwrap();
    let args = ["select", "--input", data, "--output-col", "y", "--task", "regression", "--method", "hsic-lasso", "--k", "2"];
    let (c, report) = select_json(&args);
    assert_eq!(c, 0);
    assert_eq!(report["ranked"].as_array().unwrap().len(), 2);
    let mut names = ranked_names(&report);
    names.sort();
    assert_eq!(names, ["a", "c"]);
    assert_eq!(report["ranked"][0]["rank"], 1);
    assert!(report["ranked"][0]["index"].as_u64().unwrap() >= 1);
    assert_eq!(report["dataset"]["n_samples"], 50);
    assert_eq!(report["config"]["window"], 10);
    assert_eq!(report["config"]["seed"], 0);
    assert!(report["timings"]["total"].as_f64().unwrap() >= 0.0);
    let (_, again) = select_json(&args);
    assert_eq!(ranked_names(&again), ranked_names(&report));
}

#[test]
fn epsilon_is_forwarded() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let (c, report) = select_json(&[
        "select", "--input", data.to_str().unwrap(), "--output-col", "y", "--method", "nocco-lasso", "--k", "2", "--epsilon", "0.01",
    ]);
    assert_eq!(c, 0);
    assert_eq!(report["method"], "nocco-lasso");
    assert_eq!(report["config"]["nocco_epsilon"], 0.01);
}

#[test]
fn greedy_method_and_csv_format() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let o = ksel(&["select", "--input", data.to_str().unwrap(), "--output-col", "6", "--method", "fhsic", "--k", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "rank,index,name,score,bandwidth");
    assert_eq!(lines.len(), 4);
    // numbers carry the full precision
    let score = lines[1].split(',').nth(3).unwrap();
    assert!(score.contains('e') && score.len() >= 20, "{score}");
}

#[test]
fn precomputed_output_gram_bypasses_builtin_kernel() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    // a delta kernel on the sign of y, supplied as a file
    let text = std::fs::read_to_string(&data).unwrap();
    let y: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let mut gram = String::new();
    for a in &y {
        let row: Vec<&str> = y.iter().map(|b| if (*a > 0.5) == (*b > 0.5) { "1" } else { "0" }).collect();
        writeln!(gram, "{}", row.join(",")).unwrap();
    }
    let gram_path = dir.path().join("gram.csv");
    std::fs::write(&gram_path, gram).unwrap();
    let (c, report) = select_json(&[
        "select", "--input", data.to_str().unwrap(), "--output-col", "y", "--k", "2", "--output-gram", gram_path.to_str().unwrap(),
    ]);
    assert!(c == 0 || c == 3, "{c}");
    assert!(report["diagnostics"]["output_bandwidth"].is_null());
    assert_eq!(report["config"]["output_kernel"]["kind"], "precomputed");

    std::fs::write(&gram_path, "1,0\n0,1\n").unwrap();
    let o = ksel(&["select", "--input", data.to_str().unwrap(), "--output-col", "y", "--k", "2", "--output-gram", gram_path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn bench_table_shape_and_determinism() {
    let args = [
        "bench-synth", "--data", "data2", "--d", "8", "--n", "20,30,40", "--trials", "3", "--methods", "hsic-lasso,nocco-lasso", "--seed", "5",
        "--no-timing",
    ];
    let first = ksel(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let table = stdout(&first);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "kind,method,n,trial,seed,fraction_correct,lambda,flagged,seconds");
    assert_eq!(lines.iter().filter(|l| l.starts_with("trial,")).count(), 2 * 3 * 3);
    assert_eq!(lines.iter().filter(|l| l.starts_with("summary,")).count(), 2 * 3);
    assert_eq!(stdout(&ksel(&args)), table);
}

#[test]
fn path_table_is_self_consistent() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let o = ksel(&["path", "--input", data.to_str().unwrap(), "--output-col", "y", "--count", "6", "--floor", "0.01"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6 * 6);
    for block in rows.chunks(6) {
        let lambda = block[0][0];
        assert!(block.iter().all(|r| r[0] == lambda));
        let recount = block.iter().filter(|r| r[4].parse::<f64>().unwrap() > 0.0).count();
        assert_eq!(recount.to_string(), block[0][1]);
    }
    assert!(rows[..6].iter().all(|r| r[4].parse::<f64>().unwrap() == 0.0));

    let single = ksel(&["path", "--input", data.to_str().unwrap(), "--output-col", "y", "--count", "1"]);
    assert_eq!(stdout(&single).lines().count(), 1 + 6);
}

#[test]
fn writes_to_file_only_on_success() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let out = dir.path().join("report.json");
    let o = ksel(&["select", "--input", data.to_str().unwrap(), "--output-col", "y", "--k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["k"], 2);

    let missing = dir.path().join("nope.json");
    let o = ksel(&["select", "--input", "/nonexistent.csv", "--output-col", "y", "--k", "2", "--out", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!missing.exists());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let data = data.to_str().unwrap();
    assert_eq!(code(&ksel(&["select", "--input", data, "--output-col", "y"])), 1);
    assert_eq!(code(&ksel(&["select", "--input", data, "--output-col", "y", "--k", "2", "--method", "mrmr"])), 1);
    assert_eq!(code(&ksel(&["select", "--input", data, "--output-col", "y", "--k", "0"])), 1);
    assert_eq!(code(&ksel(&["select", "--input", data, "--output-col", "y", "--k", "2", "--epsilon", "-1"])), 1);
    assert_eq!(code(&ksel(&["frobnicate"])), 1);
    assert_eq!(code(&ksel(&["select", "--input", "/nonexistent.csv", "--output-col", "y", "--k", "2"])), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_ksel"))
        .args(["select", "--input", data, "--output-col", "y", "--k", "2"])
        .env("KSEL_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);

    // one sweep cannot converge: the report is still emitted
    let (c, report) = select_json(&["select", "--input", data, "--output-col", "y", "--k", "2", "--max-iters", "1", "--lambda", "1e-4"]);
    assert_eq!(c, 3);
    assert_eq!(report["flagged"], true);
    assert_eq!(report["diagnostics"]["converged"], false);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_ksel"))
            .args(["path", "--input", data.to_str().unwrap(), "--output-col", "y", "--count", "4"])
            .env("KSEL_THREADS", threads)
            .output()
            .unwrap();
        stdout(&o)
    };
    assert_eq!(run("1"), run("3"));
}
