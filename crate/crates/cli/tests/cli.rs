use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdwsn-cpd")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn count(dir: &Path, ext: &str) -> usize {
    fs::read_dir(dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == ext)).count()
}

#[test]
fn simulate_detect_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    ok(&["critical-values", "--paths", "2000", "--grid", "200", "--out", out]);
    ok(&["simulate", "--nodes", "36", "--attack", "fni", "--attackers-pct", "5", "--reps", "3", "--out", out]);
    let traces = tmp.path().join("traces/n36_fni_5");
    assert_eq!(count(&traces, "csv"), 6);
    assert_eq!(count(&traces, "meta"), 3);

    ok(&["detect", "--k", "100", "--alpha", "0.95", "--out", out]);
    let events = tmp.path().join("events/n36_fni_5");
    assert_eq!(count(&events.join("K100_a95"), "csv"), 3);

    let stdout = ok(&["evaluate", "--k", "100", "--alpha", "0.95", "--out", out]);
    assert!(stdout.contains("n36_fni_5"));
    let csv = fs::read_to_string(tmp.path().join("tables/n36_fni_5.csv")).unwrap();
    assert!(csv.lines().count() >= 3);
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["simulate", "--nodes", "36", "--reps", "2", "--seed", "9", "--out", d.path().to_str().unwrap()]);
    }
    let rel = "traces/n36_fdff_20/rep001_control.csv";
    assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap());
}

#[test]
fn failures_print_one_error_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    for (args, kind) in [
        (vec!["simulate", "--reps", "0", "--out", out], "invalid_parameter"),
        (vec!["evaluate", "--out", out], "io"),
        (vec!["simulate", "--attack", "ffr"], "usage"),
        (vec!["detect", "--alpha", "1.5", "--out", out], "invalid_parameter"),
    ] {
        let res = bin(&args);
        assert!(!res.status.success(), "{args:?}");
        let err = String::from_utf8(res.stderr).unwrap();
        let lines: Vec<&str> = err.lines().collect();
        assert_eq!(lines.len(), 1, "{err}");
        assert!(lines[0].starts_with(&format!("error: kind={kind} message=")), "{err}");
    }
}
