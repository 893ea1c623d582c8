use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meandimlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn without_timestamp(path: &Path) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(value.get("timestamp").is_some());
    value.as_object_mut().unwrap().remove("timestamp");
    value
}

#[test]
fn phi_is_deterministic_up_to_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = run(out, &["phi"]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(without_timestamp(&a.join("report.json")), without_timestamp(&b.join("report.json")));
    for file in ["factor_image.csv", "separation.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let sep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("separation.json")).unwrap()).unwrap();
    assert_eq!(sep["phi_z0"], 2.0);
    assert_eq!(sep["separated"], true);
}

#[test]
fn report_replays_the_last_run() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(dir.path(), &["marker"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(dir.path().join("gaps.csv").exists());
    let res = run(dir.path(), &["report"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS ")), "{text}");
    assert!(text.ends_with("marker: PASS\n"), "{text}");
}

#[test]
fn widim_writes_the_benchmark_table() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(dir.path(), &["--mode", "greedy", "widim"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let table = std::fs::read_to_string(dir.path().join("widim_benchmark.csv")).unwrap();
    assert!(table.starts_with("instance,eps,mode,widim,seconds\n"), "{table}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": "x"}"#).unwrap();
    let res = run(dir.path(), &["--config", bad.to_str().unwrap(), "pipeline"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("configuration error"));

    let res = run(dir.path(), &["--config", dir.path().join("missing.json").to_str().unwrap(), "marker"]);
    assert_eq!(res.status.code(), Some(2));

    let res = run(dir.path(), &["report"]);
    assert_eq!(res.status.code(), Some(2), "no report.json to read");
}
