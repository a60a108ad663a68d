use std::path::PathBuf;
use std::process::Command;

use conik::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn conik(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("conik").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn xi_scan_respects_bounds() {
    let rho4 = conik::proximity::tau_rho(4).unwrap().1;
    for (cone, bound) in [("orthant:4", rho4), ("exp:1", 6.0), ("toeplitz-tridiag:5", 4.0 / 3.0)] {
        let (code, out, _) = conik(&["xi-scan", "--cone", cone, "--samples", "20000", "--seed", "7"]);
        assert_eq!(code, EXIT_OK, "{cone}");
        let v = json(&out);
        assert_eq!(v["schema"], "conik/v1");
        assert_eq!(v["violations"], 0);
        assert!(num(&v["max_xi_check"]) <= bound + 1e-9, "{cone}");
        assert!((num(&v["bound"]) - bound).abs() < 1e-12);
    }
}

#[test]
fn xi_scan_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let (code, _, _) = conik(&["xi-scan", "--cone", "exp:1⊕soc:2", "--samples", "300", "--seed", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let csv_path = dir.path().join("scan.csv");
    let (code, _, _) = conik(&["xi-scan", "--cone", "psd:2", "--samples", "50", "--out", csv_path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,xi_check,gamma_g,gamma_inf,mu_mu_tilde");
    assert_eq!(lines.count(), 50);
}

#[test]
fn worst_case_exp() {
    let (code, out, _) = conik(&["worst-case", "--cone", "exp:1", "--s", "1,1,-1", "--mu", "0.3333333333333333", "--grid", "21"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["found"], true);
    let certs = v["certificates"].as_array().unwrap();
    assert!(!certs.is_empty());
    let rho3 = conik::proximity::tau_rho(3).unwrap().1;
    for c in certs {
        assert_eq!(c["valid"], true);
        assert!((num(&c["xi_at_xhat"]) - rho3).abs() < 1e-6);
    }
}

#[test]
fn worst_case_orthant_has_three_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = conik(&["worst-case", "--cone", "orthant:3", "--s", "1,1,1", "--grid", "11", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 3);
    let written = std::fs::read_to_string(dir.path().join("certificates.json")).unwrap();
    assert_eq!(written, out);
    let grid = std::fs::read_to_string(dir.path().join("slice_grid.csv")).unwrap();
    assert!(grid.starts_with("a,b,inside,dikin,gamma_g,gamma_inf,xi_check,x1,x2,x3\n"));
    assert_eq!(grid.lines().count(), 1 + 11 * 11);
    let boundary = std::fs::read_to_string(dir.path().join("slice_boundary.csv")).unwrap();
    assert!(boundary.lines().count() > 100);
}

#[test]
fn worst_case_tridiagonal_reports_not_found() {
    let (code, out, _) = conik(&["worst-case", "--cone", "toeplitz-tridiag:5", "--s", "5,0", "--grid", "101"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["found"], false);
    assert!(v["certificates"].as_array().unwrap().is_empty());
    assert!(num(&v["best_norm2"]) < num(&v["target_norm2"]));
    assert_eq!(v["slice_grid_below_rho"], true);
}

#[test]
fn solve_lp_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = conik(&["solve", &fixture("lp.json"), "--eps", "1e-9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("status optimal"), "{out}");
    let sol = json(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap());
    assert!((num(&sol["solution"]["primal_objective"]) - 1.0).abs() <= 1e-7);
    assert!(num(&sol["solution"]["gap"]) <= 1e-8);
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let iterations = sol["solution"]["iterations"].as_u64().unwrap() as usize;
    assert_eq!(trace.lines().count(), iterations);
    for line in trace.lines() {
        json(line);
    }
}

#[test]
fn solve_exp_fixture_by_scaling() {
    let (code, _, err) = conik(&["solve", &fixture("exp2.json"), "--scaling", "nt"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--scaling integral"), "{err}");
    let (code, out, _) = conik(&["solve", &fixture("exp2.json"), "--scaling", "integral"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("status optimal"));
}

#[test]
fn solve_reports_iteration_limits_as_numerical() {
    let (code, out, _) = conik(&["solve", &fixture("exp2.json"), "--eps", "1e-300"]);
    assert_eq!(code, EXIT_NUMERICAL, "{out}");
}

#[test]
fn reports() {
    let (code, out, _) = conik(&["report", "rho-table"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0]["n"], 2);
    assert!((num(&rows[0]["rho"]) - 1.2071068).abs() < 1e-7);
    let (code, out, _) = conik(&["report", "local-xi-table", "--samples", "300", "--seed", "2"]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn usage_errors() {
    let (code, _, err) = conik(&["xi-scan", "--cone", "orthant:3⊕cube:2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cube:2"), "{err}");
    let (code, _, _) = conik(&["xi-scan"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = conik(&["worst-case", "--cone", "orthant:2", "--s", "1,-1"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = conik(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = conik(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("toeplitz-tridiag"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_conik");
    let ok = Command::new(bin).args(["report", "rho-table"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["xi-scan", "--cone", "nope:1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope:1"));
}
