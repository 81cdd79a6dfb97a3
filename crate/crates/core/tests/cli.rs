use std::process::{Command, Output};

fn qutrit_lhv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qutrit-lhv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn vcrit_reports_json() {
    let out = qutrit_lhv(&["vcrit", "--state", "ghz:54.735610317245346", "--params", "appendix:c", "--check-bisect"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let v = record["v_crit"].as_f64().unwrap();
    assert!(v > 0.5 && v < 0.7, "{v}");
    assert_eq!(record["m"], 2);
}

#[test]
fn vcrit_writes_mps() {
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("lp.mps");
    let json = dir.path().join("out.json");
    let out = qutrit_lhv(&[
        "vcrit",
        "--state",
        "ghz:90",
        "--params",
        "appendix:c",
        "--dump-mps",
        mps.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&mps).unwrap();
    assert!(text.starts_with("NAME"));
    assert!(text.trim_end().ends_with("ENDATA"));
    assert!(std::fs::read_to_string(&json).unwrap().contains("v_crit"));
}

#[test]
fn verify_appendix_passing_case() {
    let out = qutrit_lhv(&["verify-appendix", "--case", "c"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with("pass"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qutrit_lhv(&["no-such-command"]).status.code(), Some(2));
    let bad = qutrit_lhv(&["vcrit", "--state", "ghz:90", "--params", "1,2,3"]);
    assert_eq!(bad.status.code(), Some(2));
    let state = qutrit_lhv(&["vcrit", "--state", "nonsense", "--params", "appendix:c"]);
    assert_eq!(state.status.code(), Some(2));
}

#[test]
fn scan_emits_csv() {
    let out = qutrit_lhv(&[
        "scan-alpha",
        "--alpha",
        "0,45",
        "--family",
        "T",
        "--restarts",
        "1",
        "--evals",
        "60",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha_deg,v_crit,evals,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    let v0: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(v0, 1.0);
}

#[test]
fn optimize_is_reproducible() {
    let args = [
        "optimize", "--state", "dicke:1", "--family", "T", "--restarts", "1", "--evals", "80", "--seed", "11",
    ];
    let a = stdout(&qutrit_lhv(&args));
    let b = stdout(&qutrit_lhv(&args));
    assert!(a.contains("\"v_crit\""));
    assert_eq!(a, b);
}
