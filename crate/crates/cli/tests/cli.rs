use std::path::PathBuf;
use std::process::{Command, Output};

fn rlfde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlfde")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn spec(id: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/specs/example-{id}.json"));
    p.to_string_lossy().into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let p = std::env::temp_dir().join(format!("rlfde-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no `{key}` in {text}"));
    line[key.len()..].trim_start_matches([' ', '=']).split(',').next().unwrap().trim().parse().unwrap()
}

#[test]
fn integrate_closed_forms() {
    let o = rlfde(&["integrate", "--beta", "0.5", "--rho", "s^(-1/3)", "--alpha", "0.3333333333333333", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let y = field(&stdout(&o), "y");
    assert!((y - 2.5871095592297905).abs() < 1e-12, "{y}");

    let o = rlfde(&["integrate", "--beta", "0.5", "--rho", "s^(-0.5)", "--alpha", "0.5", "--t", "7"]);
    assert!((field(&stdout(&o), "y") - std::f64::consts::PI).abs() < 1e-12);

    let o = rlfde(&["integrate", "--beta", "0.5", "--rho", "0", "--t", "3"]);
    assert_eq!(field(&stdout(&o), "y"), 0.0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rlfde(&["integrate", "--beta", "half", "--rho", "1", "--t", "1"]).status.code(), Some(2));
    assert_eq!(rlfde(&["integrate", "--beta", "0.5", "--rho", "1 +", "--t", "1"]).status.code(), Some(2));
    assert_eq!(rlfde(&["verify", "--suite", ""]).status.code(), Some(2));
    assert_eq!(rlfde(&["reproduce", "4.9"]).status.code(), Some(2));
    let bad = scratch("unknown-key.json", r#"{"beta": 0.5, "x0": 1, "rhs": {"kind": "structured", "l": "1", "phi": "x", "mu": 0, "extra": 1}}"#);
    assert_eq!(rlfde(&["asymptote", &bad]).status.code(), Some(2));
    assert_eq!(rlfde(&["solve", "/nonexistent/spec.json", "--out", "/dev/null"]).status.code(), Some(2));
}

#[test]
fn forced_non_convergence_exits_3() {
    let nc = scratch(
        "nc.json",
        r#"{"beta": 0.5, "x0": 1.0, "rhs": {"kind": "general", "f": "sin(t)*x/(1+x^2)", "alpha_f": 0.0}, "solver": {"Tmax": 100.0, "tol": 1e-300}}"#,
    );
    let out = scratch("nc.csv", "");
    assert_eq!(rlfde(&["solve", &nc, "--out", &out]).status.code(), Some(3));
}

#[test]
fn failed_verdict_exits_1() {
    // Nothing can be predicted without envelopes, so the requested comparison fails.
    let g = scratch("general.json", r#"{"beta": 0.5, "x0": 1.0, "rhs": {"kind": "general", "f": "-x/(1+t)", "alpha_f": 0.5}}"#);
    let o = rlfde(&["asymptote", &g, "--solve"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn solve_shipped_examples() {
    for id in ["4.1", "4.3", "4.6"] {
        let out = scratch(&format!("traj-{id}.csv"), "");
        let o = rlfde(&["solve", &spec(id), "--out", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(field(&stdout(&o), "residual") <= 1e-8);
        let csv = std::fs::read_to_string(&out).unwrap();
        assert_eq!(csv.lines().next(), Some("t,w,x"));
        let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[0], 1e6);
    }
}

#[test]
fn asymptote_reports() {
    let cases = [
        ("4.1", "3.2", (std::f64::consts::PI.sqrt() + (4.0 + std::f64::consts::PI).sqrt() - 2.0) / 2.0),
        ("4.2", "3.4", 0.0),
        ("4.4", "3.6", std::f64::consts::PI.sqrt()),
    ];
    for (id, thm, limit) in cases {
        let o = rlfde(&["asymptote", &spec(id)]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["governing_theorem"], thm);
        assert!((v["predicted_limit"].as_f64().unwrap() - limit).abs() < 1e-10, "{id}");
        assert!(v["agreement"].is_null());
        assert!(v["hypothesis_audit"].as_array().is_some_and(|a| !a.is_empty()));
    }
}

#[test]
fn reproduce_is_deterministic() {
    let a = rlfde(&["reproduce", "4.5"]);
    let b = rlfde(&["reproduce", "4.5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("sqrt(pi)"));
}

#[test]
fn verify_lemmas_passes() {
    let o = rlfde(&["verify", "--suite", "lemmas"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
