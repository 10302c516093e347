use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_confcoh"));
    c.env_remove("CONFCOH_CONFIG");
    c
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

fn ranks(report: &Value) -> Vec<(i64, u64)> {
    report["cohomology"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|d| d["free_rank"].as_u64().unwrap() > 0)
        .map(|d| (d["degree"].as_i64().unwrap(), d["free_rank"].as_u64().unwrap()))
        .collect()
}

const DEG2: &str = r#"{"ring":"Q","ranks":{"2":1}}"#;
const POINT: &str = r#"{"ring":"Q","basis":[{"name":"e","degree":0}],"mult":[["e","e",[["e","1"]]]]}"#;

#[test]
fn formal_degree_two_in_arity_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", DEG2);
    let out = dir.path().join("out.json");
    let o = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "2", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(ranks(&report), vec![(3, 1), (4, 1)]);
    assert_eq!(report["mode"], "CF");
}

#[test]
fn point_algebra_has_empty_configuration_space() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pt.json", POINT);
    let o = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "3"]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(ranks(&report).is_empty());
}

#[test]
fn malformed_input_exits_one_without_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.json", "{\"ring\": ");
    let out = dir.path().join("out.json");
    let o = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "validation");
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "no temp files left behind");
}

#[test]
fn unknown_algebra_shape_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.json", r#"{"ring":"Q"}"#);
    let o = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scale_guard_exits_two_and_config_overrides_it() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", DEG2);
    let o = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "scale_bound");
    let cfg = write(dir.path(), "cfg.json", r#"{"max_n": 2}"#);
    let o = bin()
        .env("CONFCOH_CONFIG", &cfg)
        .args(["cohomology", "--input", input.to_str().unwrap(), "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["series", "--p", "t", "--k", "2", "--max-arity", "40"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn series_rendering() {
    let o = run(&["series", "--p", "t^2", "--k", "2", "--max-arity", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "arity 2: t^4 s_(2) - t^3 s_(2)"), "{}", stdout(&o));
    let o = run(&["series", "--p", "0", "--k", "2", "--max-arity", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, vec!["arity 0: s_()", "arity 1: 0", "arity 2: 0", "arity 3: 0"]);
    // below k only the exponential of t^2 s_1 survives, t^{2n} h_n
    let o = run(&["series", "--p", "t^2", "--k", "4", "--max-arity", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, vec!["arity 0: s_()", "arity 1: t^2 s_(1)", "arity 2: t^4 s_(2)", "arity 3: t^6 s_(3)"]);
    let o = run(&["series", "--p", "t^", "--k", "2", "--max-arity", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn series_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = run(&["series", "--p", "-t", "--k", "3", "--max-arity", "3", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["max_arity"], 3);
    assert_eq!(v["arities"].as_array().unwrap().len(), 4);
}

#[test]
fn partition_lattice_poset() {
    let o = run(&["poset", "--n", "4", "--output", "/dev/null"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "H̃^3 rank 6");
    let o = run(&["poset", "--n", "4", "--ring", "Q", "--characters"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // the sign twist of Lie(4) has character 6 at the identity
    assert_eq!(v["characters"][0]["by_cycle_type"]["[1,1,1,1]"], 6);
}

#[test]
fn ce_comparison_matches() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", DEG2);
    let o = run(&["ce-compare", "--input", input.to_str().unwrap(), "--n", "3", "--output", dir.path().join("r.json").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("n=3: match"));
}

#[test]
fn ainfty_fixtures() {
    assert!(run(&["ainfty-check"]).status.success());
    let o = run(&["ainfty-check", "--fixture", "four-dim-flipped"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "check_failed");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verify"]["first_failure"][0], 2);
}

#[test]
fn upset_from_file_and_k_equals() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", DEG2);
    let upset = write(dir.path(), "u.json", r#"{"named":"k_equals","k":3,"n":4}"#);
    let a = run(&["cohomology", "--input", input.to_str().unwrap(), "--upset", &format!("file:{}", upset.display())]);
    let b = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "4", "--upset", "k-equals:3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["cohomology", "--input", input.to_str().unwrap(), "--n", "5", "--upset", &format!("file:{}", upset.display())]);
    assert_eq!(c.status.code(), Some(1));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", r#"{"ring":"Z","ranks":{"1":1,"2":1}}"#);
    let args = |j: &str| {
        run(&["e1", "--input", input.to_str().unwrap(), "--n", "4", "--upset", "k-equals:2", "--jobs", j]).stdout
    };
    let one = args("1");
    assert!(!one.is_empty());
    assert_eq!(one, args("4"));
    assert_eq!(one, args("4"));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains(" PASS ")).count(), 10);
}
