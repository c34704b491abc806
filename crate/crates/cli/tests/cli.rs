//! End-to-end checks of the `usf` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn usf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usf"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("usf-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_k2_prints_one() {
    let dir = scratch("k2");
    let k2 = dir.join("k2.txt");
    std::fs::write(&k2, "2 1 0\n0 1\n\n").unwrap();
    let o = usf(&["count", "--graph", k2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn count_rooted_and_json() {
    let o = usf(&["count", "--box", "2,3", "--wired"]);
    // quotient of the 3x3 box is two vertices joined by four edges
    assert_eq!(stdout(&o), "4\n");
    let o = usf(&["count", "--box", "2,4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"]["count"]["exact"], "100352");
}

#[test]
fn sample_free_2x2_has_three_edges() {
    let dir = scratch("sample");
    let out = dir.join("t.forest");
    let o = usf(&[
        "sample",
        "--box",
        "2,2",
        "--samples",
        "1",
        "--seed",
        "7",
        "--mode",
        "free",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].len(), 64);

    let many = dir.join("many");
    let o = usf(&[
        "sample",
        "--box",
        "2,4",
        "--samples",
        "5",
        "--out",
        many.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&many).unwrap().count(), 5);
}

#[test]
fn entropy_wired_matches_rooted_count() {
    let o = usf(&["entropy", "--dim", "2", "--sides", "4", "--method", "wired"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rec = &v["results"]["records"][0];
    // 192 forests of the 4x4 box rooted at its 12 boundary vertices
    let expected = 192f64.ln() / 16.0;
    assert!((rec["per_site"].as_f64().unwrap() - expected).abs() < 1e-15);
    assert_eq!(rec["method"], "wired-exact");
}

#[test]
fn exit_codes() {
    assert_eq!(usf(&["count", "--box", "2"]).status.code(), Some(2));
    assert_eq!(usf(&["count"]).status.code(), Some(2));
    assert_eq!(
        usf(&["count", "--graph", "/nonexistent"]).status.code(),
        Some(2)
    );
    assert_eq!(usf(&["count", "--box", "2,100000"]).status.code(), Some(3));
    assert_eq!(
        usf(&["sample", "--box", "2,3", "--samples", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(usf(&["nosuch"]).status.code(), Some(2));
    let o = usf(&["gibbs-test", "--box", "2,4", "--window", "3,3:2,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--window"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "sample",
        "count",
        "marginals",
        "entropy",
        "gibbs-test",
        "trunk-stats",
        "nu-a",
        "run",
    ] {
        let o = usf(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
    assert_eq!(usf(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_runs_and_rejects_unknown_keys() {
    let dir = scratch("config");
    let cfg = dir.join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"subcommand": "gibbs-test", "graph": {"box": {"dim": 2, "side": 4}},
            "window": {"corner": [1, 1], "extent": [2, 2]}, "samples": 500, "seed": 2,
            "output": {"path": "report.json"}}"#,
    )
    .unwrap();
    let o = usf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["results"]["inside_preserved"], 500);
    assert_eq!(v["seed"], 2);

    std::fs::write(
        &cfg,
        r#"{"subcommand": "count", "graph": {"box": {"dim": 2, "side": 3}}, "bogus": 1}"#,
    )
    .unwrap();
    let o = usf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn csv_output_is_tabular() {
    let o = usf(&["marginals", "--box", "2,3", "--format", "csv", "--check"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("edge,u,v,marginal,deletion_contraction"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn reports_differ_only_in_timing() {
    let args = [
        "trunk-stats",
        "--box",
        "2,8",
        "--samples",
        "20",
        "--seed",
        "3",
    ];
    let (a, b) = (stdout(&usf(&args)), stdout(&usf(&args)));
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| !l.contains("wall_time_seconds"))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
    let other = stdout(&usf(&[
        "trunk-stats",
        "--box",
        "2,8",
        "--samples",
        "20",
        "--seed",
        "4",
    ]));
    assert_ne!(strip(&a), strip(&other));
}
