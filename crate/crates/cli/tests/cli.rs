use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overbressoud")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn without_duration(mut v: Value) -> Value {
    v["duration_ms"] = Value::Null;
    v
}

#[test]
fn verify_main_passes_with_named_record() {
    let out = run(&["verify", "main", "--kmax", "3", "--nmax", "12"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("C_{3,2}(2)=D_{3,2}(2)=3"));

    let out = run(&["--json", "verify", "main", "--kmax", "3", "--nmax", "12"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["status"], "pass");
    let rec = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["params"] == serde_json::json!({"k": 3, "i": 2, "n": 2}))
        .unwrap();
    assert_eq!((rec["expected"].as_str(), rec["actual"].as_str()), (Some("3"), Some("3")));
}

#[test]
fn verify_bressoud_edge_fails_with_counterexample() {
    let out = run(&["--json", "verify", "bressoud", "--kmax", "2", "--nmax", "4", "--include-i-equals-k"]);
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "fail");
    assert_eq!(report["counterexample"], "(k,i,n)=(2,2,2): A=1, B=0");
}

#[test]
fn verify_vacuous() {
    let out = run(&["--json", "verify", "main", "--kmax", "0", "--nmax", "0"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["records"], serde_json::json!([]));
    assert_eq!(report["status"], "pass");
}

#[test]
fn verify_usage_errors() {
    assert_eq!(code(&run(&["verify", "nope"])), 2);
    assert_eq!(code(&run(&["verify", "main", "--kmax", "-1"])), 2);
    assert_eq!(code(&run(&["verify", "main", "--nmax", "999"])), 2);
    assert_eq!(code(&run(&["--jobs", "0", "verify", "main"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let a = run(&["--json", "--jobs", "1", "verify", "css", "--kmax", "3", "--nmax", "8"]);
    let b = run(&["--json", "--jobs", "4", "verify", "css", "--kmax", "3", "--nmax", "8"]);
    let a: Value = serde_json::from_slice(&a.stdout).unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(without_duration(a), without_duration(b));
}

#[test]
fn streaming_is_json_lines() {
    let out = run(&["--stream", "verify", "gordon", "--kmax", "2", "--nmax", "3"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["type"], "header");
    assert_eq!(lines.last().unwrap()["type"], "summary");
    assert_eq!(lines.last().unwrap()["status"], "pass");
    assert_eq!(lines.iter().filter(|l| l["type"] == "record").count(), 3 * 4);
}

#[test]
fn seeded_campaigns() {
    let a = run(&["--json", "--seed", "5", "verify", "parser-fuzz", "--samples", "500"]);
    let b = run(&["--json", "--seed", "5", "verify", "parser-fuzz", "--samples", "500"]);
    assert_eq!(code(&a), 0);
    let a: Value = serde_json::from_slice(&a.stdout).unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(without_duration(a), without_duration(b));
    assert_eq!(code(&run(&["verify", "ring-laws", "--nmax", "8", "--samples", "20"])), 0);
}

#[test]
fn series_examples() {
    let out = run(&["series", "--builtin", "W", "--k", "3", "--i", "2", "--order", "6"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "2\t3\t3"));

    let out = run(&["--json", "series", "--expr", "(q;q)_inf^-1", "--order", "5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["coefficients"], serde_json::json!([1, 1, 2, 3, 5, 7]));

    let out = run(&["series", "--expr", "1", "--order", "3"]);
    assert_eq!(stdout(&out), "n\tcoefficient\n0\t1\n1\t0\n2\t0\n3\t0\n");

    let out = run(&["--json", "series", "--builtin", "Dgen", "--k", "3", "--i", "2", "--order", "4"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["coefficients"], serde_json::json!([1, 2, 3, 5, 8]));

    let out = run(&["--json", "series", "--expr", "(-x q;q)_inf", "--bivariate", "--order", "3"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["terms"].as_array().unwrap().contains(&serde_json::json!([2, 3, 1])));
}

#[test]
fn series_big_coefficients_are_exact() {
    let out = run(&["--json", "series", "--expr", "(q;q)_inf^-60", "--order", "40"]);
    let text = stdout(&out);
    let v: Value = serde_json::from_str(&text).unwrap();
    let last = v["coefficients"].as_array().unwrap().last().unwrap().to_string();
    assert!(last.len() > 20, "{last}");
    let tsv = stdout(&run(&["series", "--expr", "(q;q)_inf^-60", "--order", "40"]));
    assert!(tsv.ends_with(&format!("40\t{last}\n")));
}

#[test]
fn series_errors_are_positioned() {
    let out = run(&["series", "--expr", "(q;q)_inf / q", "--order", "3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:13"));
    let out = run(&["series", "--expr", "(1;q)_inf"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:2"));
    assert_eq!(code(&run(&["series", "--builtin", "W", "--k", "3"])), 2);
    assert_eq!(code(&run(&["series", "--order", "3"])), 2);
}

#[test]
fn table_examples() {
    let out = run(&["table", "--family", "D", "--k", "3", "--i", "2", "--mmax", "2", "--nmax", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "2\t3\t3"));
    assert!(text.lines().any(|l| l == "0\t0\t1"));

    let out = run(&["table", "--k", "4", "--i", "3", "--mmax", "20", "--nmax", "20", "--check-recurrence"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("# recurrence PASS"));

    let out = run(&["table", "--k", "1", "--i", "1", "--mmax", "2", "--nmax", "2", "--check-recurrence"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&run(&["table", "--family", "Z", "--k", "3", "--i", "2", "--mmax", "2", "--nmax", "3"])), 2);
}

#[test]
fn bijection_audits() {
    let out = run(&["--json", "bijection", "--map", "phi", "--k", "3", "--i", "1", "--m", "2", "--n", "3"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["passed"], true);
    assert_eq!(v[0]["domain"], 2);
    assert_eq!(code(&run(&["bijection", "--map", "chi", "--k", "4", "--i", "3", "--nmax", "10"])), 0);
    assert_eq!(code(&run(&["bijection", "--map", "iota", "--k", "3", "--i", "2"])), 0);
    assert_eq!(code(&run(&["bijection", "--map", "chi", "--k", "3", "--i", "1"])), 2);
}

#[test]
fn count_and_list() {
    assert_eq!(stdout(&run(&["count", "--family", "D", "--k", "3", "--i", "2", "--n", "2"])), "3\n");
    assert_eq!(stdout(&run(&["count", "--family", "C", "--k", "3", "--i", "2", "--n", "2"])), "3\n");
    let listed = stdout(&run(&["count", "--family", "D", "--k", "3", "--i", "1", "--n", "2", "--list"]));
    assert_eq!(listed, "2~\n2\n");
    let out = run(&["--json", "count", "--family", "E", "--k", "2", "--i", "2", "--n", "4", "--list"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["members"], serde_json::json!(["4", "1,1,1,1"]));
    assert_eq!(code(&run(&["count", "--family", "B", "--k", "2", "--i", "2", "--n", "2"])), 2);
}
