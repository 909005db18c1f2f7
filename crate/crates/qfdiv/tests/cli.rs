use qfdiv::cli::{compute, run, MethodChoice, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK};
use qfdiv::closed::petz;
use qfdiv::operator::{load_state, StatePair};
use qfdiv::quad::QuadratureSpec;
use qfdiv::sweep::{parse_range, sweep, to_csv};
use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["qfdiv".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_value(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout.trim()).unwrap()
}

#[test]
fn chi2_on_the_classical_fixture() {
    let (p, q) = (fixture("p.json"), fixture("q.json"));
    let (code, out, _) = call(&["compute", "--divergence", "chi2", "--rho", &p, "--sigma", &q, "--json"]);
    assert_eq!(code, EXIT_OK);
    let v = json_value(&out)["value"].as_f64().unwrap();
    assert!((v - 0.375).abs() < 1e-12, "{v}");
}

#[test]
fn dmax_of_equal_states_is_zero() {
    let a = fixture("rho_a.json");
    let (code, out, _) = call(&["compute", "-d", "dmax", "--rho", &a, "--sigma", &a, "--json"]);
    assert_eq!(code, EXIT_OK);
    assert!(json_value(&out)["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn compute_matches_library_calls() {
    let (r, s) = (fixture("rho_a.json"), fixture("sigma_a.json"));
    let pair = StatePair::new(load_state(&r).unwrap(), load_state(&s).unwrap()).unwrap();
    let spec = QuadratureSpec::default();
    for div in ["f:hellinger:0.5", "renyi:2", "f:relative-entropy", "lecam:0.3", "e-gamma:1.5"] {
        let (code, out, _) = call(&["compute", "-d", div, "--rho", &r, "--sigma", &s, "--json"]);
        assert_eq!(code, EXIT_OK, "{div}");
        let cli = json_value(&out)["value"].as_f64().unwrap();
        let lib = compute(div, &pair, MethodChoice::Auto, &spec).unwrap().value.value;
        assert_eq!(cli, lib, "{div}");
    }
    let (_, out, _) = call(&["compute", "-d", "petz:2", "--rho", &r, "--sigma", &s, "--json"]);
    assert_eq!(json_value(&out)["value"].as_f64().unwrap(), petz(2.0, &pair).unwrap().renyi);
}

#[test]
fn sweep_matches_library_csv() {
    let (r, s) = (fixture("rho_a.json"), fixture("sigma_a.json"));
    let (code, out, _) = call(&["sweep", "--alphas", "0.1:3:0.1", "--rho", &r, "--sigma", &s]);
    assert_eq!(code, EXIT_OK);
    let pair = StatePair::new(load_state(&r).unwrap(), load_state(&s).unwrap()).unwrap();
    let rows = sweep(&parse_range("0.1:3:0.1").unwrap(), &pair, &QuadratureSpec::default(), false).unwrap();
    assert_eq!(out, to_csv(&rows));
    assert_eq!(out.lines().count(), 31);
}

#[test]
fn input_errors_exit_2() {
    let (q, bad) = (fixture("q.json"), fixture("corrupt.json"));
    assert_eq!(call(&["compute", "-d", "chi2", "--rho", &bad, "--sigma", &q]).0, EXIT_INPUT);
    assert_eq!(call(&["compute", "-d", "chi2", "--rho", "/nonexistent.json", "--sigma", &q]).0, EXIT_INPUT);
    assert_eq!(call(&["compute", "-d", "nope:1", "--rho", &q, "--sigma", &q]).0, EXIT_INPUT);
    assert_eq!(call(&["verify", "--suite", "no_such_check", "--trials", "1"]).0, EXIT_INPUT);
    assert_eq!(call(&["sweep", "--alphas", "3:1:0.1", "--rho", &q, "--sigma", &q]).0, EXIT_INPUT);
    assert_eq!(call(&["conjecture", "--alphas", "0.5"]).0, EXIT_INPUT);
    assert_eq!(call(&["frobnicate"]).0, EXIT_INPUT);
}

#[test]
fn unreachable_tolerance_exits_3() {
    let (r, s) = (fixture("rho_a.json"), fixture("sigma_a.json"));
    let (code, out, err) = call(&["compute", "-d", "f:hellinger:0.5", "--rho", &r, "--sigma", &s, "--tol", "1e-300"]);
    assert_eq!(code, EXIT_NUMERIC);
    assert!(out.contains("value:"), "partial value is still reported");
    assert!(!err.is_empty());
}

#[test]
fn verify_exit_codes() {
    let (code, out, _) = call(&["verify", "--suite", "check_classical_reduction", "--trials", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("classical_reduction/catalog"));
    let (code, _, _) = call(&["verify", "--suite", "classical_reduction", "--trials", "2", "--tol", "1e-30"]);
    assert_eq!(code, EXIT_FAIL);
}

#[test]
fn verify_jsonl_has_one_report_per_line() {
    let (code, out, _) = call(&["verify", "--suite", "dpi", "--trials", "2", "--jsonl"]);
    assert_eq!(code, EXIT_OK);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["pass"].as_bool().unwrap());
    }
}

#[test]
fn conjecture_scan_reports_every_order() {
    let (code, out, _) = call(&["conjecture", "--alphas", "1.5,2.5", "--trials", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("1.5") && out.contains("2.5") && out.contains("flagged"));
}

#[test]
fn binary_uses_the_same_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qfdiv");
    let (p, q) = (fixture("p.json"), fixture("q.json"));
    let ok = Command::new(bin).args(["compute", "-d", "chi2", "--rho", &p, "--sigma", &q]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0.37"));
    let bad = Command::new(bin)
        .args(["compute", "-d", "chi2", "--rho", &fixture("corrupt.json"), "--sigma", &q])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
}
