use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TWO: &str = r#"{"intervals":[[-2,-1],[1,2]]}"#;
const ASYM: &str = r#"{"intervals":[[-1,0.2],[0.6,1]],"x0":0.4}"#;

fn respoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_respoly"))
        .args(args)
        .env("RESPOLY_LOG", "off")
        .output()
        .expect("binary runs")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::JSONSchema::compile(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn validated(name: &str, out: &Output) -> Value {
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let s = schema(name);
    if let Err(errs) = s.validate(&v) {
        let msgs: Vec<String> = errs.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} output fails its schema: {msgs:#?}");
    }
    v
}

#[test]
fn solve_interval() {
    let v = validated("solve", &respoly(&["solve", "--set", r#"{"intervals":[[-1,1]]}"#, "--x0", "2", "--n", "3"]));
    let r = v["r"].as_f64().unwrap();
    assert!((r - 1.0 / 26.0).abs() < 1e-15);
    assert_eq!(v["d_n"], 3);
}

#[test]
fn solve_degenerate_and_negative_x0() {
    let v = validated("solve", &respoly(&["solve", "--set", TWO, "--x0", "0", "--n", "1"]));
    assert_eq!(v["r"].as_f64().unwrap(), 1.0);
    assert_eq!(v["d_n"], 0);
    let v = validated("solve", &respoly(&["solve", "--set", TWO, "--x0", "-3", "--n", "4"]));
    assert!(v["r"].as_f64().unwrap() < 1.0);
}

#[test]
fn green_two_interval() {
    let v = validated("green", &respoly(&["green", "--set", TWO, "--x0", "0"]));
    let half_log3 = 0.5 * 3f64.ln();
    assert!((v["g"].as_f64().unwrap() - half_log3).abs() < 1e-8);
    assert!((v["pw"].as_f64().unwrap() - half_log3).abs() < 1e-8);
}

#[test]
fn bands_json_and_csv() {
    let v = validated("bands", &respoly(&["bands", "--set", ASYM, "--n", "5"]));
    assert_eq!(v["band_set"]["bands"].as_array().unwrap().len(), 5);
    let out = respoly(&["bands", "--set", ASYM, "--n", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# respoly widom-record csv v1");
    assert_eq!(lines[1], "n,d_n,r,W_n,lower,upper,gap_zeros,defect");
    assert!(lines[2].starts_with("5,5,"));
}

#[test]
fn widom_sweep_csv_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("twoint.json");
    std::fs::write(&set, TWO).unwrap();
    let out = respoly(&["widom-sweep", "--set", set.to_str().unwrap(), "--x0", "0", "--n-max", "20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# respoly widom-sweep csv v1");
    assert_eq!(lines.next().unwrap(), "n,W_n,is_near_return");
    let upper = 2.0 * 3f64.sqrt();
    let mut rows = 0;
    for line in lines.filter(|l| !l.starts_with('#')) {
        let w: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(w >= 2.0 - 1e-8 && w <= upper + 1e-8, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 20);
    assert!(text.lines().last().unwrap().starts_with("# summary {"));
}

#[test]
fn widom_sweep_json_and_jobs() {
    let a = respoly(&["widom-sweep", "--set", ASYM, "--n-max", "12", "--format", "json", "--jobs", "1"]);
    let b = respoly(&["widom-sweep", "--set", ASYM, "--n-max", "12", "--format", "json", "--jobs", "4"]);
    validated("widom-sweep", &a);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn orbit_output() {
    let v = validated("orbit", &respoly(&["orbit", "--set", ASYM, "--n-max", "30"]));
    assert_eq!(v["omega"].as_array().unwrap().len(), 1);
}

#[test]
fn examples_pass() {
    let v = validated("examples", &respoly(&["examples"]));
    assert_eq!(v["all_pass"], true);
}

#[test]
fn verify_quick_is_healthy() {
    let v = validated("verify", &respoly(&["verify", "--suite", "quick"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["failures"], 0);
}

#[test]
fn verify_user_set() {
    let v = validated("verify", &respoly(&["verify", "--set", ASYM, "--n-max", "6", "--grid", "500"]));
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_failure_exits_3() {
    let out = respoly(&["verify", "--set", ASYM, "--n-max", "8", "--tol", "1e-2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn deterministic_bytes() {
    let args = ["solve", "--set", ASYM, "--n", "9"];
    assert_eq!(respoly(&args).stdout, respoly(&args).stdout);
    let args = ["bands", "--set", TWO, "--x0", "0", "--n", "6"];
    assert_eq!(respoly(&args).stdout, respoly(&args).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    let out = respoly(&["solve", "--set", ASYM, "--n", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(schema("solve").is_valid(&v));
}

#[test]
fn exit_codes() {
    let check_err = |out: &Output, code: i32| {
        assert_eq!(out.status.code(), Some(code));
        let v: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(schema("error").is_valid(&v), "{v}");
    };
    check_err(&respoly(&["solve", "--set", TWO, "--x0", "1.5", "--n", "2"]), 1);
    check_err(&respoly(&["solve", "--set", "{not json", "--x0", "0", "--n", "2"]), 1);
    check_err(&respoly(&["green", "--set", TWO]), 1);
    check_err(&respoly(&["solve", "--set", TWO, "--x0", "0", "--n", "2", "--format", "csv"]), 1);
    check_err(&respoly(&["orbit", "--set", ASYM, "--n-max", "10", "--eps", "0.7"]), 1);
    // Usage errors are invalid input as well.
    assert_eq!(respoly(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(respoly(&["--help"]).status.code(), Some(0));
}
