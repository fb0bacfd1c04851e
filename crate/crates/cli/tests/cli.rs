use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phragmen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn top_down_list_of_example_one() {
    let out = run(&["tabulate", &fixture("example1.blt"), "--method", "top-down"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("List: C > A > B > D"), "{text}");
    // the third count ends with D on 149/3
    assert!(text.contains("49.67~"), "{text}");
}

#[test]
fn bottom_up_list_of_example_one() {
    let out = run(&["list", &fixture("example1.blt"), "--method", "bottom-up", "--verify-droop"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("List: A > D > B > C"), "{text}");
    assert_eq!(text.matches("compliant").count(), 4, "{text}");
}

#[test]
fn quota_phragmen_on_example_three() {
    let out = run(&[
        "tabulate",
        &fixture("example3.blt"),
        "--method",
        "quota-phragmen",
        "--seats",
        "3",
        "--verify-droop",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("quota 61.25"), "{text}");
    assert!(text.contains("Winners: C, A, B"), "{text}");
    assert!(text.contains("Droop check (3 seats): compliant"), "{text}");
}

#[test]
fn irv_elects_c() {
    let out = run(&["tabulate", &fixture("example1.blt"), "--method", "irv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Winners: C"));
}

#[test]
fn coalitions_of_example_one() {
    let out = run(&["coalitions", &fixture("example1.blt"), "--seats", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Droop quota: 50"), "{text}");
    assert!(text.contains("{A,C,D}    support  149  floor 2"), "{text}");
    let sets: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("Droop-compliant"))
        .skip(1)
        .map(str::trim)
        .collect();
    assert_eq!(sets, ["{A,B,C}", "{A,B,D}"]);
}

#[test]
fn coalitions_json() {
    let out = run(&["coalitions", &fixture("example1.blt"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["seats"], 3);
    assert_eq!(doc["compliant_sets"].as_array().unwrap().len(), 2);
}

#[test]
fn coalitions_bound_is_enforced() {
    let out = run(&["coalitions", &fixture("example1.blt"), "--max-candidates", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn parse_error_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.blt");
    std::fs::write(&path, "2 1\n5 1 3 0\n0\n\"A\"\n\"B\"\n\"t\"\n").unwrap();
    let out = run(&["tabulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_one() {
    assert_eq!(run(&["tabulate", "/nonexistent.blt"]).status.code(), Some(1));
    assert_eq!(run(&["tabulate", &fixture("example1.blt"), "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["list", &fixture("example1.blt"), "--depth", "9"]).status.code(), Some(1));
    assert_eq!(run(&["properties", "--candidates", "9"]).status.code(), Some(1));
}

#[test]
fn droop_violation_exits_two() {
    let out = run(&[
        "tabulate",
        &fixture("truncated.blt"),
        "--method",
        "quota-phragmen",
        "--verify-droop",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("VIOLATED"), "{text}");
    assert!(text.contains("{A,B,C} requires 3 winners, has 2"), "{text}");
}

#[test]
fn json_carries_exact_priorities() {
    let out = run(&["list", &fixture("example1.blt"), "--format", "json", "--verify-droop"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["list"], serde_json::json!(["C", "A", "B", "D"]));
    let text = stdout(&out);
    for value in ["\"105/2\"", "\"149/2\"", "\"149/3\"", "\"52/1\""] {
        assert!(text.contains(value), "missing {value}");
    }
    assert_eq!(doc["droop"].as_array().unwrap().len(), 4);
}

#[test]
fn output_is_deterministic() {
    let args = ["properties", "--seed", "5", "--profiles", "30", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let t1 = run(&["tabulate", &fixture("example2.blt"), "--format", "json"]);
    let t2 = run(&["tabulate", &fixture("example2.blt"), "--format", "json"]);
    assert_eq!(t1.stdout, t2.stdout);
}

#[test]
fn unknown_suite_is_a_config_error() {
    let out = run(&["properties", "--suite", "nope", "--profiles", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_candidate_generator_passes_vacuously() {
    let out = run(&["properties", "--min-candidates", "1", "--candidates", "1", "--profiles", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 6, "{text}");
}
