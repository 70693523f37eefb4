//! End-to-end checks of the circtrace binary: golden values, output
//! determinism across thread counts, exit codes, and file output.

use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circtrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn prob_golden_value() {
    let out = run(&["prob", "--gaps", "1,1", "--trace-gaps", "1,0", "--p", "1/2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("exact 1/24"), "got:\n{text}");
    assert!(text.contains("# p=1/2"));

    // decimal input means the same probability
    let dec = run(&["prob", "--gaps", "1,1", "--trace-gaps", "1,0", "--p", "0.5"]);
    assert!(stdout(&dec).contains("exact 1/24"));
}

#[test]
fn prob_json_mirror() {
    let out = run(&[
        "prob",
        "--gaps",
        "1,1",
        "--trace-gaps",
        "1,0",
        "--p",
        "1/2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["exact"], "1/24");
    assert_eq!(v["config"]["subcommand"], "prob");
    assert!(v["decimal"].as_f64().unwrap() > 0.04);
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["prob", "--gaps", "1,1"]);
    assert_eq!(out.status.code(), Some(2), "missing required flags");
    let out = run(&["search-pairs", "--k", "3", "--order", "2"]);
    assert_eq!(out.status.code(), Some(2), "needs a search space");
}

#[test]
fn runtime_errors_exit_1() {
    let out = run(&["prob", "--gaps", "1,1", "--trace-gaps", "1,0", "--p", "3/2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("probability"), "got: {err}");

    let out = run(&["prob", "--gaps", "1,1,1", "--trace-gaps", "1,0", "--p", "1/2"]);
    assert_eq!(out.status.code(), Some(1), "sparsity mismatch is a runtime error");
}

#[test]
fn sample_is_deterministic_and_seed_sensitive() {
    let args = ["sample", "--gaps", "2,3", "--p", "1/3", "--count", "20", "--seed", "11"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 5 + 1 + 20, "header comments + csv");

    let other = run(&["sample", "--gaps", "2,3", "--p", "1/3", "--count", "20", "--seed", "12"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let sweep = |threads: &str| {
        run(&[
            "ratio-sweep",
            "--p",
            "1/2",
            "--n-list",
            "16,32",
            "--samples",
            "100",
            "--seed",
            "7",
            "--threads",
            threads,
        ])
    };
    let (one, four) = (sweep("1"), sweep("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);

    let trials = |threads: &str| {
        run(&[
            "distinguish",
            "--x",
            "0,6",
            "--y",
            "3,3",
            "--p",
            "1/2",
            "--C",
            "0.05",
            "--trials",
            "6",
            "--source",
            "x",
            "--threads",
            threads,
        ])
    };
    let (one, three) = (trials("1"), trials("3"));
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn search_pairs_box_golden() {
    let out = run(&["search-pairs", "--k", "3", "--max-value", "2", "--order", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("pairs_found 1"), "got:\n{text}");
    assert!(text.contains("\"0,1,2\",\"0,2,1\",2,true"));
}

#[test]
fn verify_char_reports_zero_counterexamples() {
    let out = run(&["verify-char", "--k", "3", "--max-value", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("counterexamples 0"));
}

#[test]
fn pair_demo_shows_order_five_separation() {
    let out = run(&["pair-demo"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("x 0,2,3,2,1,1,1,1,2,3,2,0"));
    assert!(text.contains("first_order 5"));
    assert!(text.contains("4,364,true"), "order 4 row with 364 agreeing statistics");
}

#[test]
fn ratio_sweep_accepts_pair_files() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"x": [0, 0, 1, 1], "y": [0, 1, 0, 1], "matched_order": 1}}"#).unwrap();
    let path = file.path().to_str().unwrap();
    let out = run(&[
        "ratio-sweep",
        "--pair",
        path,
        "--p",
        "1/2",
        "--n-list",
        "16,32",
        "--samples",
        "50",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# pair_x=0,0,1,1"));
    assert_eq!(text.lines().filter(|l| l.starts_with("16,") || l.starts_with("32,")).count(), 2);

    // a wrong matched-order claim is rejected at load time
    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, r#"{{"x": [0, 0, 1, 1], "y": [0, 1, 0, 1], "matched_order": 2}}"#).unwrap();
    let out = run(&[
        "ratio-sweep",
        "--pair",
        bad.path().to_str().unwrap(),
        "--p",
        "1/2",
        "--n-list",
        "16",
        "--samples",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file_and_keeps_stdout_clean() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let out = run(&[
        "stats",
        "--x",
        "0,1,2",
        "--cap",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("index,order,value"));
    assert!(text.contains("\"1,1;1\",2,5"), "sum of squares row, got:\n{text}");
}
