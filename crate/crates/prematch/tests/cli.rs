//! End-to-end checks of the binary: exit codes, error wording, stdout
//! shape, and that every JSON report validates against its shipped schema.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prematch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prematch-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn assert_valid(schema_file: &str, instance_path: &PathBuf) {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(schema_file);
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&schema_path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let instance: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(instance_path).unwrap()).unwrap();
    let msgs: Vec<String> = match compiled.validate(&instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{schema_file}: {}", msgs.join("; "));
}

#[test]
fn malformed_stream_exits_2_and_names_the_line() {
    let dir = temp_dir("badstream");
    let path = dir.join("bad.txt");
    std::fs::write(&path, "# comment\ns 4\n0 1 2.0\n0 2 oops\n").unwrap();
    let out = run(&["run", "--algorithm", "greedy", "--stream", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("line 4"), "stderr does not name the line: {err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_stream_file_exits_2() {
    let out = run(&["opt", "--stream", "/nonexistent/stream.txt"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn opt_theta_without_tau_is_a_usage_error() {
    let dir = temp_dir("usage");
    let path = dir.join("s.txt");
    std::fs::write(&path, "s 2\n0 1 1.0\n").unwrap();
    let out = run(&["opt", "--stream", path.to_str().unwrap(), "--theta", "3.0"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn theta_star_prints_the_fixed_point() {
    let out = run(&["theta-star"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let theta: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("theta_star "))
        .expect("theta_star line")
        .parse()
        .unwrap();
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("competitive_ratio "))
        .expect("competitive_ratio line")
        .parse()
        .unwrap();
    assert!((theta - 5.35669398).abs() < 1e-6);
    assert!((ratio - theta).abs() < 1e-8);
}

#[test]
fn verify_all_reports_every_suite_ok() {
    let out = run(&["verify", "--suite", "all", "--seed", "7", "--cases", "10"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for suite in ["rounding", "oracle", "charging", "lower-bound"] {
        assert!(
            text.contains(&format!("suite {suite}: 10 cases ok")),
            "missing {suite} in: {text}"
        );
    }
}

#[test]
fn run_trace_report_matches_schema() {
    let dir = temp_dir("trace");
    let stream = dir.join("stream.txt");
    let trace = dir.join("trace.json");
    let gen = run(&[
        "generate", "random", "--vertices", "10", "--edge-prob", "0.5",
        "--weights", "uniform:0.5,8", "--seed", "21", "-o", stream.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = run(&[
        "run", "--algorithm", "geometric", "--seed", "3",
        "--stream", stream.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for key in ["algorithm geometric", "theta ", "tau ", "final_cardinality ", "final_weight "] {
        assert!(text.contains(key), "missing `{key}` in: {text}");
    }
    assert_valid("trace.schema.json", &trace);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lower_bound_report_matches_schema() {
    let dir = temp_dir("lb");
    let report = dir.join("lb.json");
    let out = run(&[
        "simulate", "lower-bound", "--layers", "5", "--width", "6", "--trials", "30",
        "--algorithm", "greedy", "--seed", "12", "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for key in ["optimum ", "mean_cardinality ", "ratio ", "ci "] {
        assert!(text.contains(key), "missing `{key}` in: {text}");
    }
    assert_valid("lower_bound_report.schema.json", &report);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn ratio_report_matches_schema() {
    let dir = temp_dir("ratio");
    let stream = dir.join("stream.txt");
    let report = dir.join("ratio.json");
    let gen = run(&[
        "generate", "random", "--vertices", "8", "--edge-prob", "0.6",
        "--weights", "exp:1", "--seed", "5", "-o", stream.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = run(&[
        "simulate", "ratio", "--stream", stream.to_str().unwrap(), "--theta", "5.3566",
        "--trials", "300", "--seed", "8", "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_valid("ratio_report.schema.json", &report);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn generated_layered_stream_round_trips_through_opt() {
    let dir = temp_dir("layered");
    let stream = dir.join("layered.txt");
    let gen = run(&[
        "generate", "layered", "--layers", "5", "--width", "4", "--seed", "2",
        "-o", stream.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let text = stdout(&gen);
    assert!(text.contains("vertices 40"), "stdout: {text}");
    let out = run(&["opt", "--stream", stream.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    // (L-1) * n black edges form a perfect matching on the first 2n(L-1) ids.
    let opt_card: usize = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("opt_cardinality "))
        .expect("opt_cardinality line")
        .parse()
        .unwrap();
    assert_eq!(opt_card, 16);
    std::fs::remove_dir_all(&dir).ok();
}
