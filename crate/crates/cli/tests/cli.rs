//! End-to-end checks of the `lculab` binary: exit codes, record schema,
//! and byte-for-byte determinism of the output stream.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lculab"));
    cmd.env_remove("LCULAB_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn single_record(out: &Output) -> Value {
    let text = stdout_str(out);
    let mut lines = text.lines();
    let first = lines.next().expect("at least one record line");
    assert!(lines.next().is_none(), "expected exactly one record, got: {text}");
    serde_json::from_str(first).expect("record line is valid json")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("lculab_cli_{}_{}", std::process::id(), name));
    fs::write(&path, contents).expect("write temp input");
    path
}

#[test]
fn grover_standard_example() {
    let out = run(&["grover", "--n", "1024", "--method", "standard", "--seed", "7"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rec = single_record(&out);
    assert_eq!(rec["command"], "grover");
    assert_eq!(rec["n"], 1024);
    assert_eq!(rec["queries"], 25);
    assert!(rec["success_probability"].as_f64().unwrap() >= 0.996);
    assert_eq!(rec["marked_is_modal"], true);
    assert_eq!(rec["oracle_queries"], 25);
}

#[test]
fn lcu_orthonormal_equal_weights_has_half_success() {
    let out = run(&[
        "lcu",
        "--method",
        "multi-v2",
        "--m",
        "2",
        "--coeffs",
        "1,1",
        "--orthonormal",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&out), 0);
    let rec = single_record(&out);
    let success = rec["success_probability"].as_f64().unwrap();
    assert!((success - 0.5).abs() <= 1e-12, "success {success}");
    assert!(rec["target_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn prep_thm2_reads_vector_file() {
    let path = temp_file("vec.json", "[3, -1, 2]");
    let out = run(&["prep", "--file", path.to_str().unwrap(), "--method", "thm2", "--eps", "0.01"]);
    let _ = fs::remove_file(&path);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rec = single_record(&out);
    assert_eq!(rec["command"], "prep");
    assert_eq!(rec["n"], 3);
    assert!(rec["fidelity"].as_f64().unwrap() >= 0.99);
    assert_eq!(rec["bound_check"], true);
}

#[test]
fn whitespace_vectors_parse_too() {
    let path = temp_file("vec.txt", "0.5 0.25\n-1.0\n");
    let out = run(&["prep", "--file", path.to_str().unwrap(), "--method", "naive"]);
    let _ = fs::remove_file(&path);
    assert_eq!(code(&out), 0);
    let rec = single_record(&out);
    assert_eq!(rec["n"], 3);
    assert_eq!(rec["fidelity"], 1.0);
}

#[test]
fn nan_entry_reports_line_and_position() {
    let path = temp_file("nan.txt", "1\n2 NaN\n");
    let out = run(&["prep", "--file", path.to_str().unwrap(), "--method", "thm1"]);
    let _ = fs::remove_file(&path);
    assert_eq!(code(&out), 3);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "InputParseError");
    assert_eq!(rec["code"], 3);
    assert_eq!(rec["line"], 2);
    assert_eq!(rec["position"], 2);
}

#[test]
fn zero_vector_maps_to_core_exit_code() {
    let path = temp_file("zero.json", "[0, 0, 0]");
    let out = run(&["prep", "--file", path.to_str().unwrap(), "--method", "thm1"]);
    let _ = fs::remove_file(&path);
    assert_eq!(code(&out), 10);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "ZeroVector");
    assert_eq!(rec["code"], 10);
}

#[test]
fn unknown_method_is_a_config_error() {
    let out = run(&["grover", "--n", "16", "--method", "warp", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "ConfigError");
}

#[test]
fn prep_without_input_is_a_config_error() {
    let out = run(&["prep", "--method", "thm2"]);
    assert_eq!(code(&out), 2);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "ConfigError");
}

#[test]
fn clap_rejections_exit_two() {
    assert_eq!(code(&run(&["grover", "--n", "16", "--format", "yaml"])), 2);
    assert_eq!(code(&run(&["lcu", "--orthonormal", "--near-identical"])), 2);
    assert_eq!(code(&run(&["definitely-not-a-command"])), 2);
}

#[test]
fn missing_file_is_an_io_style_parse_error() {
    let out = run(&["prep", "--file", "/nonexistent/lculab.json", "--method", "naive"]);
    assert_eq!(code(&out), 3);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "InputParseError");
}

#[test]
fn repeated_seeds_reproduce_bytes() {
    let args = [
        "lcu",
        "--method",
        "recursive",
        "--m",
        "4",
        "--dim",
        "8",
        "--estimate-angles",
        "--eps",
        "0.05",
        "--seed",
        "42",
        "--shots",
        "64",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let other_seed: Vec<&str> =
        args.iter().map(|s| if *s == "42" { "43" } else { *s }).collect();
    let third = run(&other_seed);
    assert_ne!(first.stdout, third.stdout);
}

#[test]
fn wall_time_goes_to_stderr_not_stdout() {
    let out = run(&["grover", "--n", "64", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    assert!(!stdout_str(&out).contains("wall_time_ms"));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wall_time_ms="), "stderr: {err}");
}

#[test]
fn csv_header_is_frozen() {
    let out = run(&["grover", "--n", "64", "--seed", "3", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "command,version,seed,method,n,marked,iterations_requested,cost_model,shots,\
         found,success,queries,iterations,success_probability,marked_is_modal,\
         oracle_queries,input_preps,elementary_ops,estimator_samples"
    );
    assert_eq!(lines.count(), 1);
}

#[test]
fn csv_and_json_agree_on_values() {
    let json = run(&["fracpow", "--dim", "8", "--t", "0.25", "--method", "eig", "--seed", "3"]);
    let csv = run(&[
        "fracpow", "--dim", "8", "--t", "0.25", "--method", "eig", "--seed", "3", "--format",
        "csv",
    ]);
    assert_eq!(code(&json), 0);
    assert_eq!(code(&csv), 0);
    let rec = single_record(&json);
    let text = stdout_str(&csv);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|c| *c == "deviation").unwrap();
    assert_eq!(row[col], rec["deviation"].to_string());
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let path = std::env::temp_dir()
        .join(format!("lculab_cli_{}_out.jsonl", std::process::id()));
    let direct = run(&["grover", "--n", "256", "--seed", "9"]);
    let to_file = run(&["grover", "--n", "256", "--seed", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    let written = fs::read(&path).expect("output file exists");
    let _ = fs::remove_file(&path);
    assert_eq!(written, direct.stdout);
}

#[test]
fn thread_count_never_changes_output_bytes() {
    let prep_args = [
        "bench",
        "--suite",
        "prep",
        "--n-list",
        "8,16",
        "--log2-kappa-list",
        "2,3",
        "--count",
        "2",
        "--seed",
        "9",
    ];
    let lcu_args =
        ["bench", "--suite", "lcu", "--m-list", "2,3", "--dim-list", "8", "--count", "1", "--seed", "5"];
    for args in [&prep_args[..], &lcu_args[..]] {
        let serial = run(args);
        assert_eq!(code(&serial), 0);
        assert!(!serial.stdout.is_empty());
        for threads in ["2", "4", "7"] {
            let parallel = binary()
                .args(args)
                .env("LCULAB_THREADS", threads)
                .output()
                .expect("binary runs");
            assert_eq!(code(&parallel), 0);
            assert_eq!(
                serial.stdout, parallel.stdout,
                "thread cap {threads} changed the output of {args:?}"
            );
        }
    }
}

#[test]
fn invalid_thread_cap_is_a_config_error() {
    let out = binary()
        .args(["bench", "--suite", "lcu", "--m-list", "2", "--dim-list", "4", "--count", "1"])
        .env("LCULAB_THREADS", "many")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 2);
    let rec = single_record(&out);
    assert_eq!(rec["error"], "ConfigError");
}

#[test]
fn grover_scaling_reports_fit() {
    let out = run(&[
        "grover", "--sizes", "16,64,256,1024", "--method", "standard", "--seeds", "2", "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    let records: Vec<Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4);
    let exponent = records[0]["exponent"].as_f64().unwrap();
    assert!((exponent - 0.5).abs() <= 0.05, "exponent {exponent}");
    assert!(records[0]["r_squared"].as_f64().unwrap() >= 0.99);
}

#[test]
fn fracpow_iterate_reports_power_count() {
    let out = run(&[
        "fracpow", "--dim", "16", "--t", "0.25", "--method", "iterate", "--tol", "0.05", "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let rec = single_record(&out);
    assert!(rec["k"].as_u64().unwrap() >= 1);
    assert!(rec["phase_error"].as_f64().unwrap() <= 0.05);
    assert!(rec["deviation"].as_f64().unwrap() <= 0.05);
}
