//! End-to-end tests for the `xweb` binary: generate / run / report flows,
//! exit codes, and the HTTP driver against an in-process mock backend.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn xweb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xweb"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

/// Generates a small desk-scale warehouse into `dir`.
fn generate_desk(dir: &Path) -> Output {
    let out = xweb(&[
        "generate",
        "--out",
        dir.to_str().unwrap(),
        "--density",
        "0.0002",
        "--divisor",
        "10000",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0, "generate failed: {}", stderr(&out));
    out
}

fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).expect("readable json");
    serde_json::from_str(&text).expect("valid json")
}

const DOC_NAMES: [&str; 6] =
    ["dw-model.xml", "d_date.xml", "d_part.xml", "d_customer.xml", "d_supplier.xml", "f_sale.xml"];

#[test]
fn generate_is_deterministic_across_invocations() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate_desk(&a);
    generate_desk(&b);
    for name in DOC_NAMES.iter().chain(["manifest.json"].iter()) {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical invocations");
    }
}

#[test]
fn generate_rejects_bad_density_with_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = xweb(&["generate", "--out", tmp.path().to_str().unwrap(), "--density", "0"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("density"), "stderr: {}", stderr(&out));
}

#[test]
fn run_reference_block_re_reports_three_queries() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);
    let report_dir = tmp.path().join("out");
    let out = xweb(&[
        "run",
        "--warehouse",
        wh.to_str().unwrap(),
        "--blocks",
        "re",
        "--nrun",
        "1",
        "--report-dir",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let report = read_json(&report_dir.join("run-report.json"));
    let queries = report["queries"].as_array().unwrap();
    let ids: Vec<&str> = queries.iter().map(|q| q["query"].as_str().unwrap()).collect();
    assert_eq!(ids, ["Q01", "Q02", "Q03"]);
    for q in queries {
        assert_eq!(q["executions"].as_array().unwrap().len(), 2, "cold + one warm");
    }
    assert_eq!(report["blocks"], serde_json::json!(["RE"]));
    assert!(report["load"]["complete"].as_bool().unwrap());

    let csv = std::fs::read_to_string(report_dir.join("run-report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("query,kind,index,duration_ms,status"));
    assert_eq!(lines.count(), 6, "3 queries x 2 executions");
    assert!(report_dir.join("run-manifest.json").exists());
}

#[test]
fn run_with_verify_matches_reference_engine() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);
    let out = xweb(&[
        "run",
        "--warehouse",
        wh.to_str().unwrap(),
        "--verify",
        "--report-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("verify: 20 match, 0 mismatch, 0 incomparable"));

    let report = read_json(&tmp.path().join("out").join("run-report.json"));
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 20);
    assert!(verdicts.iter().all(|v| v["verdict"]["kind"] == "match"));
}

#[test]
fn run_detects_tampered_document_with_exit_2() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);
    let facts = wh.join("f_sale.xml");
    let mut bytes = std::fs::read(&facts).unwrap();
    bytes.extend_from_slice(b"<!-- edited -->");
    std::fs::write(&facts, bytes).unwrap();

    let out = xweb(&[
        "run",
        "--warehouse",
        wh.to_str().unwrap(),
        "--report-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("f_sale.xml"), "stderr: {}", stderr(&out));
}

#[test]
fn run_missing_warehouse_is_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let out = xweb(&["run", "--warehouse", tmp.path().join("nope").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn run_rejects_unknown_driver_and_unknown_block() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);
    let out = xweb(&["run", "--warehouse", wh.to_str().unwrap(), "--driver", "sparql"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("sparql"));

    let out = xweb(&["run", "--warehouse", wh.to_str().unwrap(), "--blocks", "RE,XX"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("XX"));

    let out = xweb(&["run", "--warehouse", wh.to_str().unwrap(), "--driver", "http"]);
    assert_eq!(exit_code(&out), 1, "http without --driver-config is a parameter error");
}

#[test]
fn run_http_driver_against_mock_backend() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);

    let mock = xweb::bench::MockBackend::start().expect("mock backend");
    for id in ["Q08", "Q09", "Q10", "Q11", "Q12", "Q13", "Q14"] {
        mock.set_response(id, xweb::bench::CannedResponse::Text(format!("<rows for {id}/>")));
    }
    let cfg_path = tmp.path().join("driver.cfg");
    std::fs::write(&cfg_path, format!("base_url = {}\n", mock.base_url())).unwrap();

    let report_dir = tmp.path().join("out");
    let out = xweb(&[
        "run",
        "--warehouse",
        wh.to_str().unwrap(),
        "--driver",
        "http",
        "--driver-config",
        cfg_path.to_str().unwrap(),
        "--blocks",
        "2D,3D",
        "--report-dir",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(mock.document_count(), 6, "all six documents uploaded");

    let report = read_json(&report_dir.join("run-report.json"));
    let ids: Vec<&str> = report["queries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| q["query"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["Q08", "Q09", "Q10", "Q11", "Q12", "Q13", "Q14"]);
    let all_ok = report["queries"].as_array().unwrap().iter().all(|q| {
        q["executions"].as_array().unwrap().iter().all(|e| e["status"]["kind"] == "ok")
    });
    assert!(all_ok, "canned responses should make every execution ok");
}

#[test]
fn config_file_supplies_defaults_but_flags_win() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("xweb.cfg");
    std::fs::write(&cfg, "seed = 9\ndensity = 0.5\ndivisor = 10000\n").unwrap();

    let wh = tmp.path().join("wh");
    let out = xweb(&[
        "--config",
        cfg.to_str().unwrap(),
        "generate",
        "--out",
        wh.to_str().unwrap(),
        "--density",
        "0.0002",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let manifest = read_json(&wh.join("manifest.json"));
    assert_eq!(manifest["params"]["seed"], 9, "config supplies the seed");
    assert_eq!(manifest["params"]["density"], 0.0002, "flag beats config");
    assert_eq!(manifest["params"]["scale_divisor"], 10000);

    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "dnesity = 0.5\n").unwrap();
    let out = xweb(&["--config", bad.to_str().unwrap(), "generate"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("dnesity"));
}

#[test]
fn report_prints_stats_and_writes_plot_series() {
    let tmp = TempDir::new().unwrap();
    let wh = tmp.path().join("wh");
    generate_desk(&wh);
    let report_dir = tmp.path().join("out");
    let run = xweb(&[
        "run",
        "--warehouse",
        wh.to_str().unwrap(),
        "--blocks",
        "RE",
        "--nrun",
        "2",
        "--report-dir",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));

    let out = xweb(&["report", "--report-dir", report_dir.to_str().unwrap(), "--plot"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("run-report.json"));
    assert!(text.contains("block") && text.contains("stddev_ms"));
    assert!(text.contains("RE"));

    let plot = std::fs::read_to_string(report_dir.join("plot.csv")).unwrap();
    let lines: Vec<&str> = plot.lines().collect();
    assert_eq!(lines[0], "block,facts,avg_ms");
    assert_eq!(lines.len(), 2, "one block series point");
    assert!(lines[1].starts_with("RE,176,"), "plot line: {}", lines[1]);

    // Positional file argument works too.
    let path: PathBuf = report_dir.join("run-report.json");
    let out = xweb(&["report", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn report_on_empty_directory_is_parameter_error() {
    let tmp = TempDir::new().unwrap();
    let out = xweb(&["report", "--report-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);

    let corrupt = tmp.path().join("run-report.json");
    std::fs::write(&corrupt, "{ not json").unwrap();
    let out = xweb(&["report", "--report-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2, "corrupt report file is a runtime error");
}
