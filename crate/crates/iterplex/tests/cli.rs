//! End-to-end checks of the command-line binary: exit codes, byte-exact
//! determinism, stream mode, and the matrix cache.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iterplex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_text(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn fixture_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn validate_accepts_the_fixture_table() {
    let output = run(&["validate", &fixture_path("q5.tbl")]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout_text(&output);
    assert!(text.contains("valid quasigroup, order 5"), "{text}");
    assert!(text.contains("fingerprint n5-"), "{text}");
}

#[test]
fn validate_rejects_a_non_latin_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tbl");
    fs::write(&path, "1 2\n2 2\n").unwrap();
    let output = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
    assert!(!output.stderr.is_empty());
}

#[test]
fn missing_input_file_is_an_input_error() {
    let output = run(&["validate", "/nonexistent/table.tbl"]);
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(exit_code(&run(&["oracle", "transversals"])), 1);
    assert_eq!(exit_code(&run(&["no-such-command"])), 1);
    assert_eq!(exit_code(&run(&["--help"])), 0);
    assert_eq!(exit_code(&run(&["chain", "--help"])), 0);
}

#[test]
fn feasibility_caps_exit_two() {
    let oracle = run(&[
        "oracle",
        "transversals",
        "--table",
        "builtin:cyclic:3",
        "--d",
        "3",
        "--max-nodes",
        "1",
    ]);
    assert_eq!(exit_code(&oracle), 2);
    let chain = run(&[
        "chain",
        "count",
        "--table",
        "builtin:cyclic:5",
        "--k",
        "1",
        "--d",
        "2",
        "--max-states",
        "2",
    ]);
    assert_eq!(exit_code(&chain), 2);
}

#[test]
fn unlumpable_partition_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("merged.json");
    // Merging the all-ones class with the uniform class of the order-2 chain
    // breaks the constant-row-sum condition.
    fs::write(&path, "[[[2, 0], [1, 1]], [[0, 2]]]").unwrap();
    let output = run(&[
        "chain",
        "verify-lumping",
        "--table",
        "builtin:cyclic:2",
        "--k",
        "1",
        "--classes",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3);
    assert!(!output.stderr.is_empty());
}

#[test]
fn transversal_count_is_bare_in_plain_format() {
    let output = run(&["oracle", "transversals", "--table", "builtin:cyclic:3", "--d", "3"]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout_text(&output), "27\n");
}

#[test]
fn constant_reports_the_known_limit() {
    let output = run(&["constant", "--table", "builtin:cyclic:5", "--k", "1"]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout_text(&output);
    assert!(text.contains("c = 24/125 (0.192)"), "{text}");
    assert!(text.contains("subsequence all-d"), "{text}");
    assert!(text.contains("period 1 closed-class size 26 lambda 120"), "{text}");
}

#[test]
fn stream_mode_emits_one_array_per_multiplex() {
    let output = run(&[
        "oracle",
        "multiplexes",
        "--table",
        "builtin:cyclic:3",
        "--dim",
        "3",
        "--k",
        "1",
        "--mode",
        "sets",
        "--stream",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout_text(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "one line per transversal: {text}");
    for line in lines {
        let rows: Vec<Vec<u16>> = serde_json::from_str(line).expect("JSONL row");
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|row| row.len() == 3));
        assert!(rows.iter().flatten().all(|&s| (1..=3).contains(&s)));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["chain", "matrix", "--table", "builtin:cyclic:5", "--k", "1", "--format", "json"],
        vec!["summary", "--d-max", "4", "--format", "csv"],
        vec!["oracle", "classify", "--table", "builtin:cyclic:3", "--dim", "3", "--k", "2"],
        vec!["chain", "sequence", "--table", "builtin:klein", "--k", "1", "--d-max", "6"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(exit_code(&first), 0, "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn matrix_cache_round_trips_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap().to_string();
    let args = [
        "chain", "matrix", "--table", "builtin:cyclic:3", "--k", "1", "--format", "json",
        "--cache-dir", &cache,
    ];
    let first = run(&args);
    assert_eq!(exit_code(&first), 0);
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1, "one cache file per (table, k, length)");
    let cache_file = entries[0].as_ref().unwrap().path();

    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "cache hit must not change output");

    fs::write(&cache_file, "not json at all").unwrap();
    let third = run(&args);
    assert_eq!(exit_code(&third), 0);
    assert_eq!(first.stdout, third.stdout, "corrupted cache must be rebuilt");
    let rebuilt = fs::read_to_string(&cache_file).unwrap();
    assert!(rebuilt.starts_with('{'), "cache file must be rewritten");
}

#[test]
fn cache_dir_environment_variable_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_iterplex"))
        .args(["chain", "count", "--table", "builtin:cyclic:2", "--k", "1", "--d", "3"])
        .env("QG_CACHE_DIR", dir.path())
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(0));
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1, "environment cache dir is used");
    let text = stdout_text(&output);
    assert!(text.contains("tables 8"), "{text}");
    assert!(text.contains("transversals 4"), "{text}");
}

#[test]
fn json_output_carries_decimal_counts_as_strings() {
    let output = run(&[
        "chain", "count", "--table", "builtin:cyclic:5", "--k", "1", "--d", "2", "--format",
        "json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["tables"], serde_json::json!("1800"));
    assert_eq!(value["transversals"], serde_json::json!("15"));
    assert_eq!(value["d"], serde_json::json!(2));
}
