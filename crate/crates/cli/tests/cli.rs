use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lpbounds(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpbounds"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn eval_reports_the_sandwich_equality() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "fixb.json",
        r#"{"weights": [1, 1], "f": [1, 1], "g": [1, 0], "p": 4}"#,
    );

    let out = lpbounds(&["eval", "--input", "fixb.json", "--output", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((ratio - 17.0 / 3.0).abs() < 1e-12);
    assert!((report["gamma"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let sandwich: Vec<&Value> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["id"].as_str().unwrap().starts_with("thm1_"))
        .collect();
    assert_eq!(sandwich.len(), 4);
    for r in sandwich {
        assert_eq!(r["outcome"]["verdict"], "equality_within_tol", "{r}");
    }

    let out = lpbounds(&["eval", "--input", "fixb.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("id,regime,lhs,rhs,margin,verdict,tier"));
    let upper = rows(&text).into_iter().find(|r| r[0] == "thm1_upper").unwrap();
    assert_eq!(upper[5], "equality_within_tol");
    assert!((upper[2].parse::<f64>().unwrap() - 17.0 / 3.0).abs() < 1e-12);
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = lpbounds(
            &[
                "verify", "--p", "4", "--trials", "1000", "--seed", "7", "--output", name,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("id,regime,lhs,rhs,margin,verdict,tier"));
    assert!(rows(&text)
        .iter()
        .all(|r| r.len() == 7 && r[5] != "confirmed_violation"));
}

#[test]
fn witness_round_trips_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpbounds(
        &["witness", "--alpha", "0.5", "--p", "3", "--output", "w.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mooney = rows(&stdout(&out));
    assert_eq!(mooney.len(), 1);
    assert_eq!(mooney[0][0], "eq5_mooney");
    assert_eq!(mooney[0][5], "equality_within_tol");

    let pair: Value = serde_json::from_slice(&std::fs::read(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(pair["f"], pair["g"]);

    let out = lpbounds(&["eval", "--input", "w.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let row = rows(&stdout(&out)).into_iter().find(|r| r[0] == "eq5_mooney").unwrap();
    assert_eq!(row[5], "equality_within_tol");

    for alpha in ["0", "0.05", "0.4"] {
        let out = lpbounds(
            &["witness", "--alpha", alpha, "--p", "4", "--output", "x.json"],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "alpha {alpha}: {}", stderr(&out));
        let out = lpbounds(&["eval", "--input", "x.json"], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
}

#[test]
fn malformed_input_exits_with_two_and_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "short.json",
        r#"{"weights": [1, 1], "f": [1, 1], "g": [1], "p": 4}"#,
    );
    write(dir.path(), "syntax.json", "{\"weights\": [1, 1],\n \"f\": [1, oops]}");
    write(
        dir.path(),
        "negative.json",
        r#"{"weights": [1, 1], "f": [1, -1], "g": [1, 1], "p": 4}"#,
    );
    write(dir.path(), "p.json", r#"{"weights": [1], "f": [1], "g": [1], "p": 1}"#);
    write(
        dir.path(),
        "extra.json",
        r#"{"weights": [1], "f": [1], "g": [1], "p": 3, "q": 2}"#,
    );

    let cases = [
        ("short.json", "field `g`"),
        ("syntax.json", "syntax.json:2:"),
        ("negative.json", "field `f[1]`"),
        ("p.json", "field `p`"),
        ("extra.json", "unknown field"),
        ("missing.json", "missing.json"),
    ];
    for (file, needle) in cases {
        let out = lpbounds(&["eval", "--input", file], dir.path());
        assert_eq!(out.status.code(), Some(2), "{file}");
        assert!(stderr(&out).contains(needle), "{file}: {}", stderr(&out));
    }
}

#[test]
fn decimal_strings_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.json",
        r#"{"weights": ["1", "1"], "f": ["1.0", "1"], "g": ["1", "0"], "p": "4"}"#,
    );
    let out = lpbounds(&["eval", "--input", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["verify"][..],
        &["verify", "--p", "four"][..],
        &["witness", "--alpha", "0.7", "--p", "4"][..],
        &["search", "--spec", "nothing", "--p", "4"][..],
        &["verify", "--p", "3", "--tol", "-1"][..],
    ] {
        let out = lpbounds(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn family_files_compare_search_and_sequence() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "family.json",
        r#"{"weights": [1, 2, 1], "functions": [[1, 0, 0], [0, 1, 0], [0, 0, 3]], "p": 3}"#,
    );
    let out = lpbounds(&["eval", "--input", "family.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rs = rows(&stdout(&out));
    let upper = rs.iter().find(|r| r[0] == "thm2_upper").unwrap();
    assert_eq!(upper[5], "equality_within_tol");

    let out = lpbounds(&["compare", "--p", "4", "--trials", "100", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stats: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(stats["trials"], 100);

    write(
        dir.path(),
        "start.json",
        r#"{"weights": [1, 1], "f": [1, 1], "g": [1, 0], "p": 4}"#,
    );
    let out = lpbounds(
        &[
            "search",
            "--spec",
            "max_gap_sandwich_minus_mooney",
            "--p",
            "4",
            "--atoms",
            "2",
            "--budget",
            "400",
            "--input",
            "start.json",
            "--output",
            "s.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let res: Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert!(res["best_value"].as_f64().unwrap() > 0.3);

    write(
        dir.path(),
        "seq.json",
        r#"{"kind": "disjoint_atoms", "c": 1, "r": 0.5}"#,
    );
    let out = lpbounds(
        &["sequence", "--spec", "seq.json", "--p", "3", "--nmax", "32"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 32);

    write(
        dir.path(),
        "explicit.json",
        r#"{"kind": "explicit", "weights": [1, 1], "functions": [[1, 0], [0, 1], [1, 1]]}"#,
    );
    let out = lpbounds(&["sequence", "--spec", "explicit.json", "--p", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
}
