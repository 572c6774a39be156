use std::fs;

use serde_json::Value;
use twinec::cli::run;

fn exec(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["twinec"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const SMALL: [&str; 6] = ["--height-bound", "500", "--xy-bound", "200", "--y-bound", "10000"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&SMALL);
    v
}

#[test]
fn analyze_p3_reports_generator() {
    let (code, out, _) = exec(&with_small(&["analyze", "--p", "3", "--json"]));
    assert_eq!(code, 0);
    let env: Value = serde_json::from_str(&out).unwrap();
    let t1 = &env["reports"][0];
    assert_eq!(t1["theorem"], "1");
    assert_eq!(t1["sub_case"], "b");
    assert_eq!(t1["status"], "verified");
    assert_eq!(t1["evidence"]["generator"]["x"], "-4");
    assert_eq!(t1["evidence"]["generator"]["y"], "2");
    assert_eq!(env["summary"]["inconsistent"], "0");
}

#[test]
fn analyze_p5_statuses() {
    let (code, out, _) = exec(&with_small(&["analyze", "--p", "5", "--json"]));
    assert_eq!(code, 0);
    let env: Value = serde_json::from_str(&out).unwrap();
    let statuses: Vec<(&str, &str)> = env["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["theorem"].as_str().unwrap(), r["status"].as_str().unwrap()))
        .collect();
    assert!(statuses.contains(&("1", "verified")));
    assert!(statuses.contains(&("2", "verified-at-bound")));
    assert!(statuses.contains(&("4", "verified-at-bound")));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(exec(&["analyze", "--p", "9"]).0, 1);
    assert_eq!(exec(&["analyze"]).0, 1);
    assert_eq!(exec(&["scan"]).0, 1);
    assert_eq!(exec(&["verify", "--theorem", "2", "--p", "5", "--max-p", "30"]).0, 1);
    assert_eq!(exec(&["verify", "--theorem", "5", "--p", "5"]).0, 1);
    assert_eq!(exec(&["pell", "--d", "4", "--sigma", "1"]).0, 1);
    assert_eq!(exec(&["scan", "--max-p", "10", "--height-bound", "0"]).0, 1);
    assert_eq!(exec(&["pell", "--d", "5", "--sigma", "2"]).0, 1);
    assert_eq!(exec(&["--help"]).0, 0);
}

#[test]
fn scan_lists_twin_pairs() {
    let (code, out, _) = exec(&with_small(&["scan", "--max-p", "50", "--json", "--jobs", "2"]));
    assert_eq!(code, 0);
    let env: Value = serde_json::from_str(&out).unwrap();
    let mut ps: Vec<&str> = env["reports"].as_array().unwrap().iter().map(|r| r["p"].as_str().unwrap()).collect();
    ps.dedup();
    assert_eq!(ps, ["3", "5", "11", "17", "29", "41"]);

    let (_, out, _) = exec(&with_small(&["scan", "--max-p", "4"]));
    assert!(out.lines().skip(1).filter(|l| !l.starts_with("summary")).all(|l| l.split_whitespace().next() == Some("3")));
}

#[test]
fn scan_is_independent_of_job_count() {
    let strip = |s: String| {
        let mut v: Value = serde_json::from_str(&s).unwrap();
        v["config"]["jobs"] = Value::Null;
        v
    };
    let (_, one, _) = exec(&with_small(&["scan", "--max-p", "30", "--json", "--jobs", "1"]));
    let (_, four, _) = exec(&with_small(&["scan", "--max-p", "30", "--json", "--jobs", "4"]));
    assert_eq!(strip(one), strip(four));
}

#[test]
fn pell_tables() {
    let (code, out, _) = exec(&["pell", "--d", "5", "--sigma", "1", "--y-bound", "100"]);
    assert_eq!(code, 0);
    assert!(out.contains("fundamental: (9, 4)"));
    assert!(out.contains("(161, 72)"));
    let (code, out, _) = exec(&["pell", "--d", "3", "--sigma", "-1"]);
    assert_eq!(code, 0);
    assert!(out.contains("no solution (even period)"));
}

#[test]
fn search_points_and_descent() {
    let (code, out, _) = exec(&["search-points", "--p", "5", "--height-bound", "10000"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("4 points"));
    let (code, out, _) = exec(&["search-points", "--p", "3", "--height-bound", "10", "--negative", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["points"].as_array().unwrap().iter().any(|p| p["point"]["x"] == "-4" && p["point"]["y"] == "2"));
    let (code, out, _) = exec(&["descent", "--p", "3", "--height-bound", "100"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank E(K) = 1"));
}

#[test]
fn cache_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let cache = path.to_str().unwrap();
    let at = |height: &'static str| {
        vec!["verify", "--theorem", "1", "--p", "3", "--json", "--cache", cache, "--height-bound", height]
    };
    let args = at("500");

    let (_, first, _) = exec(&args);
    let lines = fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(lines, 1);

    let (_, second, err) = exec(&args);
    assert_eq!(first, second);
    assert!(err.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1, "hit must not append");

    assert_eq!(exec(&at("100")).0, 0);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1, "smaller bound is a hit");

    assert_eq!(exec(&at("2000")).0, 0);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2, "larger bound recomputes");
}

#[test]
fn corrupt_cache_lines_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let cache = path.to_str().unwrap();
    let args = with_small(&["verify", "--theorem", "2", "--p", "5", "--json", "--cache", cache]);
    let (_, fresh, _) = exec(&args);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 2]).unwrap();

    let (code, out, err) = exec(&args);
    assert_eq!(code, 0);
    assert!(err.contains("warning"));
    assert_eq!(out, fresh);
    let (_, again, err) = exec(&args);
    assert_eq!(again, fresh);
    assert!(err.contains("warning"), "the truncated line stays and is skipped again");
}
