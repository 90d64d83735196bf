use std::path::Path;
use std::process::{Command, Output};

use linspecial_core::search::{LemmaReport, SolveReport};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linspecial"))
        .args(args)
        .env_remove("LINSPECIAL_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_job(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SUM_LINE: &str = r#"{"format": 1, "ambient_dim": 2, "equations": [{"coefficients": ["1", "1"], "constant": "-1728"}], "cap": 100}"#;

#[test]
fn scalar_commands() {
    let o = run(&["class-number", "-23"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3");
    assert_eq!(stdout(&run(&["psi", "6"])).trim(), "12");
    let forms = stdout(&run(&["reduce-forms", "-23"]));
    assert_eq!(forms.lines().collect::<Vec<_>>(), ["(1,1,6)", "(2,-1,3)", "(2,1,3)"]);
    let v: Value = serde_json::from_str(&stdout(&run(&["--json", "rcf-degree", "-4", "1", "3"]))).unwrap();
    assert_eq!(v["ratio"], "2");
}

#[test]
fn j_eval_recovers_rational_moduli() {
    let v: Value = serde_json::from_str(&stdout(&run(&["j-eval", "-163", "--json"]))).unwrap();
    assert_eq!(v["integer"], "-262537412640768000");
    let v: Value = serde_json::from_str(&stdout(&run(&["j-eval", "-23", "--form", "2,-1,3", "--json"]))).unwrap();
    assert_eq!(v["integer"], Value::Null);
    assert_eq!(v["form"], "(2,-1,3)");
    let o = run(&["j-eval", "-23", "--form", "1,0,6"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn solve_sum_line() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", SUM_LINE);
    let o = run(&["--json", "solve", &job]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "complete");
    let points: Vec<Vec<String>> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["moduli"].as_array().unwrap().iter().map(|m| m.as_str().unwrap().to_string()).collect())
        .collect();
    assert_eq!(points, [["-3:(1,1,1)", "-4:(1,0,1)"], ["-4:(1,0,1)", "-3:(1,1,1)"]]);
    assert_eq!(v["cap"]["effective"], "100");
}

#[test]
fn refusal_and_usage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", SUM_LINE);
    let o = run(&["solve", &job, "--cap", "5000", "--refusal-threshold", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("refused"));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["class-number", "-5"]).status.code(), Some(1));
}

#[test]
fn json_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", SUM_LINE);
    let text = stdout(&run(&["--json", "solve", &job]));
    let report: SolveReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
    let text = stdout(&run(&["--json", "verify-lemma", "1", "1", "-1728", "--cap", "30"]));
    let report: LemmaReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.solutions.len(), 2);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

/// Every string leaf of the JSON output appears verbatim in the human rendering.
#[test]
fn json_and_text_carry_the_same_numbers() {
    fn leaves(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::String(s) => out.push(s.clone()),
            Value::Array(a) => a.iter().for_each(|x| leaves(x, out)),
            Value::Object(o) => o.values().for_each(|x| leaves(x, out)),
            _ => {}
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", SUM_LINE);
    for args in [
        vec!["bound", job.as_str()],
        vec!["height", job.as_str()],
        vec!["j-eval", "-23", "--digits", "40"],
        vec!["check-point", job.as_str(), "--point", "-3:(1,1,1);-4:(1,0,1)"],
        vec!["rcf-degree", "-3", "2", "5"],
    ] {
        let text = stdout(&run(&args));
        let mut json_args = vec!["--json"];
        json_args.extend(&args);
        let v: Value = serde_json::from_str(&stdout(&run(&json_args))).unwrap();
        let mut strings = Vec::new();
        leaves(&v, &mut strings);
        assert!(!strings.is_empty());
        for s in strings.iter().filter(|s| s.chars().any(|c| c.is_ascii_digit())) {
            assert!(text.contains(s.as_str()), "{args:?}: {s:?} missing from\n{text}");
        }
    }
}

#[test]
fn check_point_classifies() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "job.json", SUM_LINE);
    let v: Value =
        serde_json::from_str(&stdout(&run(&["--json", "check-point", &job, "--point", "-4:(1,0,1);-3:(1,1,1)"]))).unwrap();
    assert_eq!(v["on_subvariety"], "zero");
    assert_eq!(v["special_witness"], Value::Null);
    let v: Value =
        serde_json::from_str(&stdout(&run(&["--json", "check-point", &job, "--point", "-4:(1,0,1);-4:(1,0,1)"]))).unwrap();
    assert_eq!(v["on_subvariety"], "nonzero");
    let diag = write_job(
        dir.path(),
        "diag.json",
        r#"{"format": 1, "ambient_dim": 2, "equations": [{"coefficients": ["1", "-1"], "constant": "0"}]}"#,
    );
    let v: Value =
        serde_json::from_str(&stdout(&run(&["--json", "check-point", &diag, "--point", "-7:(1,1,2);-7:(1,1,2)"]))).unwrap();
    assert_eq!(v["on_subvariety"], "zero");
    assert_eq!(v["special_witness"], serde_json::json!([1, 2]));
}

#[test]
fn cache_dir_from_flag_and_env() {
    let flag_dir = tempfile::tempdir().unwrap();
    let o = run(&["class-poly", "-47", "--cache-dir", flag_dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_dir(flag_dir.path()).unwrap().next().is_some());

    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_linspecial"))
        .args(["class-poly", "-47"])
        .env("LINSPECIAL_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(std::fs::read_dir(env_dir.path()).unwrap().next().is_some());
    // a warm cache answers identically
    assert_eq!(stdout(&o), stdout(&run(&["class-poly", "-47", "--cache-dir", flag_dir.path().to_str().unwrap()])));
}

#[test]
fn job_errors_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "bad.json",
        "{\n  \"format\": 1,\n  \"ambient_dim\": 2,\n  \"equations\": [{\"coefficients\": [\"1\", \"x/2\"], \"constant\": \"0\"}]\n}",
    );
    let o = run(&["solve", &job]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json:4:40:"), "{err}");
}
