//! End-to-end tests of the `favgame` binary: flags, file formats, and
//! exit codes (0 pass, 1 verification failure, 2 usage, 3 solver,
//! 4 cap).

use std::process::{Command, Output};

fn favgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_favgame"))
        .args(args)
        .env_remove("FAVGAME_JOB_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000000".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

#[test]
fn curve_csv_contract() {
    let dir = std::env::temp_dir().join(format!("favgame-curve-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let out = favgame(&[
        "curve",
        "--s-min",
        "1.0",
        "--s-max",
        "3.0",
        "--step",
        "0.01",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,poa,spoa,spoa_simple,segment");
    assert_eq!(lines.len(), 202, "header plus 201 data rows");

    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "1.00000000000");
    assert_eq!(first[1], "1.33333333333");
    assert_eq!(first[2], "1.33333333333");
    assert_eq!(first[3], "2.00000000000");
    assert_eq!(first[4], "1");

    let at_two = lines
        .iter()
        .find(|l| l.starts_with("2.00000000000,"))
        .expect("row at s=2");
    let fields: Vec<&str> = at_two.split(',').collect();
    assert_eq!(fields[1], "2.14285714286");
    assert_eq!(fields[2], "1.50000000000");
    assert_eq!(fields[4], "5");

    // Round trip: re-parsing each printed value reproduces it exactly.
    for line in &lines[1..] {
        for field in line.split(',').take(4) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(sig12(v), field, "field {field} does not round-trip");
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn curve_rejects_bad_range() {
    let out = favgame(&["curve", "--s-min", "2.0", "--s-max", "1.0", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn breakpoints_output() {
    let out = favgame(&["breakpoints"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("s2 = 1.618033988750"));
    assert!(text.contains("s5 = 2.000000000000"));
    assert!(text.lines().count() == 7);
}

#[test]
fn certify_segment_pass() {
    let out = favgame(&["certify", "--kind", "spoa", "--segment", "3", "--s", "17/10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("PASS"));
    assert!(text.contains("expected ratio 27/17"));
    assert!(text.contains("\"pass\":true"));
}

#[test]
fn certify_poa_and_example1() {
    let out = favgame(&["certify", "--kind", "poa", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("expected ratio 15/7"));

    let out = favgame(&["certify", "--kind", "example1", "--s", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn certify_outside_segment_is_usage_error() {
    let out = favgame(&["certify", "--kind", "spoa", "--segment", "2", "--s", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lp_check_pass_and_piece8_guard() {
    let out = favgame(&["lp-check", "--s", "1", "--mode", "se"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("lp maximum = 4/3"));
    assert!(text.contains("difference = 0"));

    let out = favgame(&["lp-check", "--s", "3", "--mode", "se"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("lp maximum = 4/3"));

    let out = favgame(&["lp-check", "--s", "2", "--mode", "ne"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("lp maximum = 15/7"));
}

fn write_instance(name: &str, content: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("favgame-{}-{name}", std::process::id()));
    std::fs::write(&path, content).unwrap();
    path
}

const EXAMPLE1_AT_3: &str =
    r#"{ "s": 3, "jobs": [ { "size": 1, "favorite": 1 }, { "size": 1, "favorite": 2 } ] }"#;

#[test]
fn analyze_example_instance() {
    let path = write_instance("ex1.json", EXAMPLE1_AT_3);
    let out = favgame(&[
        "analyze",
        "--file",
        path.to_str().unwrap(),
        "--coalitions",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("NE count = 2"));
    assert!(text.contains("SE count = 1"));
    assert!(text.contains("poa  = 3"));
    assert!(text.contains("spoa = 1"));
    assert!(text.contains("improving coalition: jobs {1,2}"));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn analyze_segment7_file_ratio() {
    // Segment-7 instance at s = 11/5: a2 size (s/ (2s-1)) = (11/5)/(17/5),
    // d1 = (s-1)^2/(2s-1), d2 = (s-1)/(2s-1) as loads.
    let path = write_instance(
        "segment7.json",
        r#"{ "s": "11/5", "jobs": [
            { "size": "11/17", "favorite": 2 },
            { "size": "36/85", "favorite": 2 },
            { "size": "6/17", "favorite": 2 } ] }"#,
    );
    let out = favgame(&["analyze", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("spoa = 121/85"), "output was:\n{text}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn analyze_single_job() {
    let path = write_instance(
        "single.json",
        r#"{ "s": 2, "jobs": [ { "size": "3/4", "favorite": 2 } ] }"#,
    );
    let out = favgame(&["analyze", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("NE count = 1"));
    assert!(text.contains("SE count = 1"));
    assert!(text.contains("poa  = 1"));
    assert!(text.contains("spoa = 1"));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn analyze_parse_errors_exit_2() {
    let path = write_instance("bad.json", r#"{ "s": 2, "jobs": [], "bogus": true }"#);
    let out = favgame(&["analyze", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(path).unwrap();

    let out = favgame(&["analyze", "--file", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_cap_exceeded_exit_4() {
    let path = write_instance("cap.json", EXAMPLE1_AT_3);
    let out = Command::new(env!("CARGO_BIN_EXE_favgame"))
        .args(["analyze", "--file", path.to_str().unwrap()])
        .env("FAVGAME_JOB_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn search_no_trials() {
    let out = favgame(&[
        "search", "--s", "2", "--jobs", "4", "--trials", "0", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no trials"));
}

#[test]
fn search_is_deterministic_and_bounded() {
    let args = [
        "search", "--s", "2", "--jobs", "5", "--trials", "100", "--seed", "7",
    ];
    let first = favgame(&args);
    let second = favgame(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("PASS"));
}

#[test]
fn search_cap_exit_4() {
    let out = favgame(&[
        "search", "--s", "2", "--jobs", "30", "--trials", "1", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}
