use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DERIVED: &str = "
[dynamics]
A = 0.0
B = 1.0
C = 0.0
D = 1.0
[cost]
L = 1.0
S = 0.0
R = 1.0
[solver]
rho = 2.0
alpha = 0.5
x0 = 1.0
paths = 2000
seed = 4
";

const TWO_POINT_LAMBDA_ONE: &str = "
[dynamics]
A = [0.0, -0.3]
B = [1.0, 0.8]
C = [0.0, 0.1]
D = [1.0, 1.0]
[cost]
L = [1.0, 1.5]
S = [0.0, 0.0]
R = [1.0, 1.2]
M = [0.0, 0.1]
N = [0.0, 0.0]
[robust]
family = \"two_point\"
lambda = 1.0
[solver]
rho = 2.0
alpha = 0.5
x0 = 1.0
";

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, args: &[&str], config: &Path, out: &Path) -> Output {
        Command::new(env!("CARGO_BIN_EXE_explq"))
            .args(args)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
    }
}

fn rows(path: &Path) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn f(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("column {col} = {:?}", row[col]))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn csv_headers_are_pinned() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let two = run.config("t.toml", TWO_POINT_LAMBDA_ONE);
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["solve"], &cfg, &o)), 0);
    assert_eq!(code(&run.exec(&["simulate", "--paths", "50", "--dump-paths", "1"], &cfg, &o)), 0);
    assert_eq!(code(&run.exec(&["verify"], &cfg, &o)), 0);
    assert_eq!(code(&run.exec(&["sweep", "--param", "alpha", "--values", "0.5"], &two, &o)), 0);
    assert_eq!(
        header(&o.join("solve.csv")),
        "run_id,kind,scenario,lambda,theta,branch_id,k2,k1,k0,k0_displayed,variance,mean_slope,mean_intercept,residual,value,note"
    );
    assert_eq!(
        header(&o.join("simulate.csv")),
        "run_id,scenario,lambda,theta,x0,n_paths,n_diverged,dt,horizon,n_steps,estimate,std_error,closed_form,gap,within_3se,truncation,valid"
    );
    assert_eq!(header(&o.join("trajectories.csv")), "run_id,t,path_id,x,running_cost");
    assert_eq!(header(&o.join("verify.csv")), "run_id,check_name,instance_id,lhs,rhs,gap,tolerance,pass");
    assert_eq!(header(&o.join("sweep.csv")), "run_id,param,param_value,scenario,metric,value,note");
}

#[test]
fn solve_derived_instance_and_manifest() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let o = run.out("o");
    let out = run.exec(&["solve"], &cfg, &o);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rs = rows(&o.join("solve.csv"));
    let theta = rs.iter().find(|r| r["kind"] == "theta").unwrap();
    let k2 = (13f64.sqrt() - 1.0) / 6.0;
    assert!((f(theta, "k2") - k2).abs() < 1e-14);
    assert!((f(theta, "k2") - 0.43426).abs() < 1e-5);
    assert!(f(theta, "residual") < 1e-8);
    // formatted to 17 significant digits
    assert_eq!(theta["k2"].split('e').next().unwrap().len(), 18);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(o.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["seed"], 4);
    assert!(manifest["timestamp"].as_u64().unwrap() > 0);
    assert!(rs.iter().all(|r| r["run_id"] == manifest["run_id"].as_str().unwrap()));
}

#[test]
fn two_point_at_lambda_one_reproduces_the_single_row() {
    let run = Run::new();
    let single = run.config("d.toml", DERIVED);
    let two = run.config("t.toml", TWO_POINT_LAMBDA_ONE);
    assert_eq!(code(&run.exec(&["solve"], &single, &run.out("a"))), 0);
    assert_eq!(code(&run.exec(&["solve"], &two, &run.out("b"))), 0);
    let a = rows(&run.out("a").join("solve.csv"));
    let b = rows(&run.out("b").join("solve.csv"));
    let ra = a.iter().find(|r| r["kind"] == "theta").unwrap();
    let rb = b.iter().find(|r| r["kind"] == "theta" && r["scenario"] == "theta1").unwrap();
    for col in ["kind", "scenario", "lambda", "theta", "branch_id", "k2", "k1", "k0", "k0_displayed", "variance", "mean_slope", "mean_intercept", "residual", "value", "note"] {
        assert_eq!(ra[col], rb[col], "column {col}");
    }
    let mix = b.iter().find(|r| r["kind"] == "two_point").unwrap();
    for col in ["k2", "k1", "k0", "variance", "mean_slope", "mean_intercept", "value"] {
        assert!((f(mix, col) - f(ra, col)).abs() < 1e-8, "column {col}");
    }
    let closed = b.iter().find(|r| r["kind"] == "two_point_closed").unwrap();
    assert!(!closed["note"].is_empty());
}

#[test]
fn invalid_coefficient_names_the_field() {
    let run = Run::new();
    let cfg = run.config("bad.toml", &DERIVED.replace("R = 1.0", "R = -1.0"));
    let out = run.exec(&["solve"], &cfg, &run.out("o"));
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("coefficient R"), "{err}");
}

#[test]
fn configuration_errors_exit_two() {
    let run = Run::new();
    let missing = run.exec(&["solve"], &run.out("nope.toml"), &run.out("o"));
    assert_eq!(code(&missing), 2);
    let unknown = run.config("u.toml", &DERIVED.replace("S = 0.0", "S = 0.0\nQ = 1.0"));
    assert_eq!(code(&run.exec(&["solve"], &unknown, &run.out("o"))), 2);
    let cfg = run.config("d.toml", DERIVED);
    assert_eq!(code(&run.exec(&["sweep", "--param", "kappa", "--values", "1"], &cfg, &run.out("o"))), 2);
    let no_config = Command::new(env!("CARGO_BIN_EXE_explq")).arg("solve").output().unwrap();
    assert_eq!(code(&no_config), 2);
}

#[test]
fn rho_violation_needs_force() {
    let run = Run::new();
    let cfg = run.config("v.toml", &DERIVED.replace("A = 0.0", "A = 1.5"));
    let out = run.exec(&["solve"], &cfg, &run.out("o"));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_bound"));
    assert_eq!(code(&run.exec(&["solve", "--force"], &cfg, &run.out("o"))), 0);
}

#[test]
fn simulate_is_reproducible_and_scales() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    for o in ["a", "b"] {
        assert_eq!(code(&run.exec(&["simulate", "--seed", "9"], &cfg, &run.out(o))), 0);
    }
    let a = fs::read(run.out("a").join("simulate.csv")).unwrap();
    assert_eq!(a, fs::read(run.out("b").join("simulate.csv")).unwrap());

    let r = &rows(&run.out("a").join("simulate.csv"))[0];
    assert!((f(r, "estimate") - f(r, "closed_form")).abs() <= 3.0 * f(r, "std_error"));
    assert_eq!(r["within_3se"], "true");
    assert_eq!(r["valid"], "true");

    assert_eq!(code(&run.exec(&["simulate", "--seed", "9", "--paths", "4000"], &cfg, &run.out("c"))), 0);
    let r2 = &rows(&run.out("c").join("simulate.csv"))[0];
    let ratio = f(r, "std_error") / f(r2, "std_error");
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "se ratio {ratio}");
}

#[test]
fn a_different_seed_changes_the_run() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    assert_eq!(code(&run.exec(&["simulate", "--paths", "200", "--seed", "1"], &cfg, &run.out("a"))), 0);
    assert_eq!(code(&run.exec(&["simulate", "--paths", "200", "--seed", "2"], &cfg, &run.out("b"))), 0);
    let a = &rows(&run.out("a").join("simulate.csv"))[0];
    let b = &rows(&run.out("b").join("simulate.csv"))[0];
    assert_ne!(a["run_id"], b["run_id"]);
    assert_ne!(a["estimate"], b["estimate"]);
}

#[test]
fn verify_passes_and_reports_the_exploration_cost() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let o = run.out("o");
    let out = run.exec(&["verify"], &cfg, &o);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let rs = rows(&o.join("verify.csv"));
    assert!(rs.iter().all(|r| r["pass"] == "true"));
    let e = rs.iter().find(|r| r["check_name"] == "exploration_cost").unwrap();
    assert!((f(e, "lhs") + 0.5 / (2.0 * 2.0)).abs() < 1e-10);
    assert_eq!(f(e, "rhs"), -0.125);
    for name in ["hjb_residual", "gibbs.mean", "solvability.classical_mc", "alpha_limit.mean_drift"] {
        assert!(rs.iter().any(|r| r["check_name"] == name), "missing {name}");
    }
}

#[test]
fn verify_two_point_runs_minimax_checks() {
    let run = Run::new();
    let cfg = run.config("t.toml", &TWO_POINT_LAMBDA_ONE.replace("x0 = 1.0", "x0 = 1.0\npaths = 1000"));
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["verify"], &cfg, &o)), 0);
    let rs = rows(&o.join("verify.csv"));
    for name in ["minimax.weak_duality", "minimax.refined_gap", "minimax.lambda_affinity", "robust.relabel", "two_point.endpoint_theta1"] {
        let r = rs.iter().find(|r| r["check_name"] == name).unwrap_or_else(|| panic!("missing {name}"));
        assert_eq!(r["pass"], "true", "{name}");
    }
}

fn metric<'a>(rs: &'a [HashMap<String, String>], v: f64, scenario: &str, m: &str) -> &'a HashMap<String, String> {
    rs.iter()
        .find(|r| (f(r, "param_value") - v).abs() < 1e-15 && r["scenario"] == scenario && r["metric"] == m)
        .unwrap_or_else(|| panic!("no {scenario}/{m} at {v}"))
}

#[test]
fn alpha_sweep_variance_is_proportional() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["sweep", "--param", "alpha", "--values", "0.01,0.1,1"], &cfg, &o)), 0);
    let rs = rows(&o.join("sweep.csv"));
    let base = f(metric(&rs, 1.0, "theta1", "variance"), "value");
    for a in [0.01, 0.1] {
        let v = f(metric(&rs, a, "theta1", "variance"), "value");
        assert!((v / a - base).abs() < 1e-12);
    }
}

#[test]
fn lambda_sweep_endpoints_equal_scenario_values() {
    let run = Run::new();
    let cfg = run.config("t.toml", TWO_POINT_LAMBDA_ONE);
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["sweep", "--param", "lambda", "--values", "0,1"], &cfg, &o)), 0);
    let rs = rows(&o.join("sweep.csv"));
    for (lam, scen) in [(1.0, "theta1"), (0.0, "theta2")] {
        let mix = f(metric(&rs, lam, "mixture", "value"), "value");
        let own = f(metric(&rs, lam, scen, "value"), "value");
        assert!((mix - own).abs() < 1e-8, "lambda {lam}: {mix} vs {own}");
    }
}

#[test]
fn rho_sweep_exploration_cost() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["sweep", "--param", "rho", "--values", "0.5,1,2,4"], &cfg, &o)), 0);
    let rs = rows(&o.join("sweep.csv"));
    for rho in [0.5, 1.0, 2.0, 4.0] {
        let c = f(metric(&rs, rho, "robust", "exploration_cost"), "value");
        assert!((c + 0.5 / (2.0 * rho)).abs() < 1e-10);
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let run = Run::new();
    let cfg = run.config("d.toml", DERIVED);
    let o = run.out("o");
    assert_eq!(code(&run.exec(&["sweep", "--param", "R", "--values", "1,-1,2"], &cfg, &o)), 0);
    let rs = rows(&o.join("sweep.csv"));
    assert!(rs.iter().any(|r| r["metric"] == "error" && f(r, "param_value") == -1.0));
    assert!(rs.iter().any(|r| r["metric"] == "k2" && f(r, "param_value") == 2.0));
    assert_eq!(code(&run.exec(&["sweep", "--strict", "--param", "R", "--values", "1,-1"], &cfg, &o)), 3);
}
