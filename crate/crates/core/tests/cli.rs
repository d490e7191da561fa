use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zpflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zpflab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn without_timestamp(mut v: Value) -> Value {
    v["metadata"]["timestamp"] = Value::Null;
    v
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version":1,"experiment":"covariance","system":"oscillator(4,1,1,1)",
            "params":{"zeta":1,"n":0,"m":2,"samples":5000,"seed":"0x10"}}"#,
    );
    let a = zpflab(&["run", &cfg, "--quiet"]);
    let b = zpflab(&["run", &cfg, "--quiet"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let ra: Value = serde_json::from_slice(&a.stdout).unwrap();
    let rb: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(without_timestamp(ra.clone()), without_timestamp(rb));
    assert_eq!(ra["schema_version"], 1);
    assert_eq!(ra["metadata"]["seed"], 16);

    let c = zpflab(&["run", &cfg, "--quiet", "--seed", "17"]);
    let rc: Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(rc["metadata"]["seed"], 17);
    assert_ne!(ra["checks"][2]["observed"], rc["checks"][2]["observed"]);
}

#[test]
fn out_dir_receives_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version":1,"experiment":"covariance","system":{"energies":[0,1],"mass":1,"hbar":1},
            "matrices":{"f":"x.json","g":[[0,1],[1,0]]},"params":{"zeta":1,"n":0,"m":1}}"#,
    );
    write(dir.path(), "x.json", r#"{"dim":2,"entries":[[0,0],[1,0],[1,0],[0,0]]}"#);
    let out = dir.path().join("out");
    let o = zpflab(&["run", &cfg, "--out", out.to_str().unwrap(), "--samples", "20000", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let mut rdr = csv::Reader::from_path(out.join("trace.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["samples", "estimate", "stderr", "analytic"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    let last = rows.last().unwrap();
    assert_eq!(last[0].parse::<f64>().unwrap(), 20000.0);
    assert!((last[1].parse::<f64>().unwrap() + 1.0).abs() < 1e-2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let failing = write(
        dir.path(),
        "fail.json",
        r#"{"schema_version":1,"experiment":"bracket2","system":"oscillator(4,1,1,1)","params":{"n":3,"m":3}}"#,
    );
    assert_eq!(zpflab(&["run", &failing, "--quiet"]).status.code(), Some(1));

    for bad in [
        r#"{"schema_version":1,"experiment":"trk","system":"oscillator(4,1,1,1)","colour":"red"}"#,
        r#"{"experiment":"trk","system":"oscillator(4,1,1,1)"}"#,
        r#"{"schema_version":1,"experiment":"pauli","params":{"upsilon":"-1/2","k":3}}"#,
        "not json",
    ] {
        let p = write(dir.path(), "bad.json", bad);
        let o = zpflab(&["run", &p]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(o.stdout.is_empty(), "no report for a rejected config");
    }
    assert_eq!(zpflab(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(zpflab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(zpflab(&["run"]).status.code(), Some(2));
}

#[test]
fn pauli_run_embeds_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"schema_version":1,"experiment":"pauli","params":{"upsilon":"3/2","k":3}}"#);
    let o = zpflab(&["run", &cfg, "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let cert = &r["certificates"][0]["certificate"];
    assert_eq!(cert["k"], 3);
    assert!(!cert["checks"].as_array().unwrap().is_empty());
}

#[test]
fn schema_subcommand_prints_the_schema() {
    let o = zpflab(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let experiments = v["properties"]["experiment"]["enum"].as_array().unwrap();
    assert_eq!(experiments.len(), 8);
}

#[test]
fn summary_goes_to_stderr_unless_quiet() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.json", r#"{"schema_version":1,"experiment":"trk","system":"oscillator(10,1,1,1)"}"#);
    let loud = zpflab(&["run", &cfg]);
    assert!(String::from_utf8_lossy(&loud.stderr).contains("trk: PASS"));
    let quiet = zpflab(&["run", &cfg, "--quiet"]);
    assert!(quiet.stderr.is_empty());
}

#[test]
fn shipped_configs_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut ran = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if !text.contains("\"experiment\"") {
            continue;
        }
        let o = zpflab(&["run", path.to_str().unwrap(), "--quiet"]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&o.stdout));
        ran += 1;
    }
    assert_eq!(ran, 8);
}
