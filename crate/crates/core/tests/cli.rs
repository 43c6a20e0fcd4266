//! End-to-end runs of the `lenctl` binary: simulate -> analyze/reward,
//! fixtures -> pareto, and the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn lenctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lenctl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = vec![
        "simulate",
        "--policy",
        "ec",
        "--target",
        "40",
        "--max-total",
        "512",
        "--end-think-logit",
        "-1",
        "--eos-logit",
        "-1",
        "--seed",
        "3",
        "--runs",
        "8",
    ];
    args.extend_from_slice(extra);
    args.push("--out");
    let out = path.to_str().unwrap();
    args.push(out);
    let output = lenctl(&args);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn simulate_writes_loadable_traces_with_ec_contract() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);

    let set = lenctl::trace::load_traces(&path, "1").unwrap();
    assert_eq!(set.len(), 8);
    assert_eq!(set.max_context, 512);
    for trace in &set.traces {
        if !trace.truncated {
            assert_eq!(trace.thinking_len, 40);
        }
    }
}

#[test]
fn analyze_emits_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);

    let csv_path = dir.path().join("per_trace.csv");
    let output = lenctl(&[
        "analyze",
        path.to_str().unwrap(),
        "--repeat-min",
        "10",
        "--repeat-k",
        "3",
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["n_traces"], 8);
    assert!(report["length"]["mean_all"].as_f64().unwrap() > 0.0);
    // simulated traces are all wrong, so the rate is defined
    assert!(report["repeat"]["rate"].is_number());

    let per_trace = std::fs::read_to_string(&csv_path).unwrap();
    assert!(per_trace.starts_with("id,total_len,thinking_len,solution_len,"));
    assert_eq!(per_trace.lines().count(), 9); // header + 8 rows
}

#[test]
fn reward_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);

    let output = lenctl(&[
        "reward",
        path.to_str().unwrap(),
        "--alpha",
        "0.1",
        "--beta",
        "0.3",
        "--lmax",
        "4096",
        "--level",
        "short",
    ]);
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,r_acc,r_format,r_hat,penalty,r_total,length,level,correct"
    );
    assert_eq!(lines.count(), 8);
    // simulated traces are wrong with a solution segment: r_hat = 0.1
    assert!(text.contains(",0.0,1.0,0.1,"));

    let output = lenctl(&[
        "reward",
        path.to_str().unwrap(),
        "--level",
        "moderate",
        "--format",
        "json",
    ]);
    let records: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 8);
    assert_eq!(records[0]["level"], "MODERATE");
}

#[test]
fn reward_reads_penalty_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);

    let config_path = dir.path().join("penalty.toml");
    std::fs::write(&config_path, "alpha = 0.2\nbeta = 0.5\nl_max = 2048\nlength_basis = \"thinking_only\"\n").unwrap();

    let output = lenctl(&[
        "reward",
        path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--level",
        "short",
        "--format",
        "json",
    ]);
    let records: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    // wrong answers pay alpha * L / l_max with the config's alpha and basis
    let first = &records[0];
    let expected = 0.2 * first["length"].as_f64().unwrap() / 2048.0;
    assert!((first["penalty"].as_f64().unwrap() - expected).abs() < 1e-12);

    // explicit flags override the file
    let output = lenctl(&[
        "reward",
        path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--alpha",
        "0.0",
        "--level",
        "short",
        "--format",
        "json",
    ]);
    let records: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(records[0]["penalty"].as_f64().unwrap(), 0.0);
}

#[test]
fn reward_without_level_fails_for_unlevelled_traces() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);

    let output = lenctl(&["reward", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("level"));
}

#[test]
fn fixtures_dump_feeds_pareto() {
    let dir = tempfile::tempdir().unwrap();

    let listing = stdout(&lenctl(&["fixtures", "list"]));
    assert!(listing.contains("ts_math500"));
    assert!(listing.contains("ml_math500_4k"));

    let csv = stdout(&lenctl(&["fixtures", "dump", "ml_math500_4k"]));
    let csv_path = dir.path().join("math500_4k.csv");
    std::fs::write(&csv_path, &csv).unwrap();

    let front = stdout(&lenctl(&["pareto", csv_path.to_str().unwrap()]));
    assert!(front.starts_with("label,accuracy,mean_length"));
    assert!(front.contains("78.4,1285.882"), "front: {front}");
    assert!(!front.contains("2108.98"), "dominated point must be dropped");
}

#[test]
fn unknown_fixture_lists_available_names() {
    let output = lenctl(&["fixtures", "dump", "missing"]);
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("ts_math500") && err.contains("sweet_spot"));
}

#[test]
fn schema_mismatch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.jsonl");
    simulate_to(&path, &[]);
    let output = lenctl(&["analyze", path.to_str().unwrap(), "--schema-version", "9"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn loop_injection_shows_up_in_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loops.jsonl");
    let output = lenctl(&[
        "simulate",
        "--policy",
        "auto",
        "--max-total",
        "512",
        "--max-steps",
        "400",
        "--eos-logit",
        "-30",
        "--vocab-size",
        "64",
        "--loop",
        "5:30:8",
        "--seed",
        "77",
        "--runs",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let report = stdout(&lenctl(&["analyze", path.to_str().unwrap()]));
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["repeat"]["rate"], 1.0);
}
