//! Acceptance criteria, one PASS/FAIL line each. The lines are written to the
//! process stdout directly so they survive the test harness's capture.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use explq_core::model::{default_horizon, two_point_rho_bound};
use explq_core::policy::{gaussian_from_value, gibbs_on_grid, GibbsConvention};
use explq_core::riccati::{probe_residual, solve_two_point_closed, compare_closed_numeric};
use explq_core::robust::{alpha_limit_check, exploration_cost, exploration_cost_mc, minimax_check, solvability_equivalence_check};
use explq_core::sde_sim::{check_moment_decay, estimate_cost_exploratory};
use explq_core::{
    solve_theta, solve_two_point_numeric, validate, CoefficientFamily, GaussianPolicy, Problem, SimConfig,
    ThetaCoefficients,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOUND: f64 = 5.0;

fn line(ok: bool, n: u32, msg: String) -> bool {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{tag} criterion {n}: {msg}").unwrap();
    out.flush().unwrap();
    ok
}

fn coeffs(v: [f64; 9]) -> ThetaCoefficients {
    ThetaCoefficients::from_array(v).unwrap()
}

fn derived() -> ThetaCoefficients {
    coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0])
}

fn random_theta(rng: &mut ChaCha8Rng) -> ThetaCoefficients {
    loop {
        let r = rng.random_range(0.5..2.0);
        let l = rng.random_range(0.5..2.0);
        let s = rng.random_range(-0.5..0.5);
        if r * l - s * s < 0.05 {
            continue;
        }
        return coeffs([
            rng.random_range(-1.0..0.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-1.0..1.0),
            l,
            s,
            r,
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ]);
    }
}

/// Single-scenario instance accepted by the assumption checks.
fn random_single(rng: &mut ChaCha8Rng, rho_lo: f64) -> (ThetaCoefficients, f64, f64) {
    loop {
        let c = random_theta(rng);
        let rho = c.rho_floor().max(rho_lo) + rng.random_range(0.2..1.5);
        let alpha = rng.random_range(0.05..1.0);
        let p = Problem::new(CoefficientFamily::Single(c), rho, alpha, BOUND).unwrap();
        if validate(&p, 1.0).unwrap().admits_solve() {
            return (c, rho, alpha);
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (ThetaCoefficients, ThetaCoefficients, f64, f64) {
    loop {
        let (t1, t2) = (random_theta(rng), random_theta(rng));
        let floor = [0.0, 1.0].iter().map(|&l| two_point_rho_bound(&t1, &t2, l)).fold(0.0, f64::max);
        let rho = floor.max(t1.rho_floor()).max(t2.rho_floor()) + rng.random_range(0.2..1.5);
        let alpha = rng.random_range(0.05..1.0);
        let p = Problem::new(CoefficientFamily::TwoPoint { theta1: t1, theta2: t2 }, rho, alpha, BOUND).unwrap();
        if [0.0, 1.0].iter().all(|&l| validate(&p, l).unwrap().admits_solve()) {
            return (t1, t2, rho, alpha);
        }
    }
}

fn criterion_1() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_res: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    let mut errors = 0;
    let n = 25;
    for _ in 0..n {
        let (c, rho, alpha) = random_single(&mut rng, 0.0);
        let t = Instant::now();
        let v = solve_theta(&c, rho, alpha);
        worst_time = worst_time.max(t.elapsed().as_secs_f64());
        match v.and_then(|v| probe_residual(&v.quadratic(), &c, rho, alpha, BOUND)) {
            Ok(r) => worst_res = worst_res.max(r),
            Err(_) => errors += 1,
        }
    }
    let ok = errors == 0 && worst_res <= 1e-8 && worst_time < 1e-3;
    line(ok, 1, format!("{n} instances, max HJB residual {worst_res:.3e} (<= 1e-8), max solve time {:.1} us (< 1 ms), {errors} errors", worst_time * 1e6))
}

fn unknowns_close(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn criterion_2() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 12;
    let (mut endpoint_gap, mut swap_gap): (f64, f64) = (0.0, 0.0);
    let (mut errors, mut agree, mut disagree, mut closed_err) = (0, 0, 0, 0);
    for _ in 0..n {
        let (t1, t2, rho, alpha) = random_pair(&mut rng);
        for lam in [0.0, 1.0] {
            let active = if lam == 1.0 { &t1 } else { &t2 };
            let (Ok(sols), Ok(v), Ok(swapped)) = (
                solve_two_point_numeric(&t1, &t2, lam, rho, alpha, BOUND),
                solve_theta(active, rho, alpha),
                solve_two_point_numeric(&t2, &t1, 1.0 - lam, rho, alpha, BOUND),
            ) else {
                errors += 1;
                continue;
            };
            let b = &sols[0];
            let got = if lam == 1.0 { [b.k21, b.k11, b.k0] } else { [b.k22, b.k12, b.k0] };
            endpoint_gap = endpoint_gap.max(unknowns_close(got, [v.k2, v.k1, v.k0]));
            let s = &swapped[0];
            let swap = [(b.k21 - s.k22).abs(), (b.k22 - s.k21).abs(), (b.k11 - s.k12).abs(), (b.k12 - s.k11).abs(), (b.k0 - s.k0).abs()];
            swap_gap = swap.iter().fold(swap_gap, |m, d| m.max(*d));
            match solve_two_point_closed(&t1, &t2, lam, rho, alpha, BOUND) {
                Ok(c) if compare_closed_numeric(&c, b).agree => agree += 1,
                Ok(_) => disagree += 1,
                Err(_) => closed_err += 1,
            }
        }
    }
    let ok = errors == 0 && endpoint_gap <= 1e-8 && swap_gap <= 1e-8;
    line(
        ok,
        2,
        format!(
            "{n} instances x lambda in {{0,1}}: endpoint gap {endpoint_gap:.3e}, swap gap {swap_gap:.3e} (<= 1e-8), {errors} errors; \
             closed form vs numeric: {agree} agree, {disagree} disagree, {closed_err} closed-form errors"
        ),
    )
}

fn criterion_3() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut dm, mut dv, mut de): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut errors = 0;
    for _ in 0..10 {
        let (c, rho, alpha) = random_single(&mut rng, 0.0);
        let x = rng.random_range(-2.0..2.0);
        let res = solve_theta(&c, rho, alpha).and_then(|v| {
            let q = v.quadratic();
            let p = gaussian_from_value(&c, &q, alpha)?;
            let g = gibbs_on_grid(&c, &q, alpha, x, &p.default_grid(x), GibbsConvention::Minimizing)?;
            Ok((p, g))
        });
        match res {
            Ok((p, g)) => {
                assert_eq!(g.u_grid.len(), 801);
                dm = dm.max((g.mean() - p.mean(x)).abs());
                dv = dv.max(((g.variance() - p.variance) / p.variance).abs());
                de = de.max((g.entropy() - p.entropy()).abs());
            }
            Err(_) => errors += 1,
        }
    }
    let ok = errors == 0 && dm < 1e-6 && dv < 1e-5 && de < 1e-5;
    line(ok, 3, format!("10 instances: mean gap {dm:.2e} (<1e-6), variance rel gap {dv:.2e} (<1e-5), entropy gap {de:.2e} (<1e-5), {errors} errors"))
}

fn criterion_4() -> bool {
    let c = derived();
    let (rho, alpha) = (2.0, 0.5);
    let v = solve_theta(&c, rho, alpha).unwrap();
    let p = gaussian_from_value(&c, &v.quadratic(), alpha).unwrap();
    let cfg = SimConfig::new(1e-3, default_horizon(rho), 100_000, 20240).unwrap().with_workers(1);
    let mut ok = true;
    let mut parts = Vec::new();
    for x0 in [0.0, 1.0] {
        let t = Instant::now();
        let est = estimate_cost_exploratory(&c, &p, x0, rho, alpha, &cfg).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let target = v.value(x0);
        let z = (est.mean - target) / est.std_error;
        ok &= est.valid && est.within(target, 3.0) && secs < 60.0;
        parts.push(format!("x0={x0}: estimate {:.6} vs {:.6} ({z:+.2} SE, {secs:.1} s)", est.mean, target));
    }
    line(ok, 4, format!("n=1e5, dt=1e-3, one worker; {}", parts.join("; ")))
}

fn criterion_5() -> bool {
    let c = derived();
    let mut worst: f64 = 0.0;
    let mut x_spread: f64 = 0.0;
    for rho in [0.5, 1.0, 2.0] {
        for alpha in [0.01, 0.1, 1.0] {
            let p = Problem::new(CoefficientFamily::Single(c), rho, alpha, BOUND).unwrap();
            let costs: Vec<f64> = [-5.0, -1.0, 0.0, 1.0, 5.0]
                .iter()
                .map(|&x| exploration_cost(&p, x).unwrap().cost)
                .collect();
            worst = costs.iter().fold(worst, |m, e| m.max((e + alpha / (2.0 * rho)).abs()));
            let hi = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = costs.iter().cloned().fold(f64::INFINITY, f64::min);
            x_spread = x_spread.max(hi - lo);
        }
    }
    let (rho, alpha) = (2.0, 0.5);
    let cfg = SimConfig::new(1e-3, default_horizon(rho), 20_000, 505).unwrap();
    let mc = exploration_cost_mc(&c, rho, alpha, 1.0, &cfg).unwrap();
    let ok = worst < 1e-10 && x_spread <= 1e-12 && mc.within_3se;
    line(
        ok,
        5,
        format!(
            "analytic max |C + alpha/(2 rho)| {worst:.2e} (<1e-10), x spread {x_spread:.2e} (<=1e-12); \
             MC at rho=2, alpha=0.5: {:.5} +- {:.1e} vs expected {:.5} (within 3 SE: {})",
            mc.cost, mc.difference.std_error, mc.expected, mc.within_3se
        ),
    )
}

fn criterion_6() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut ok = true;
    let mut zs = Vec::new();
    let mut mean_gap: f64 = 0.0;
    for i in 0..5 {
        let (c, rho, alpha) = random_single(&mut rng, 1.0);
        let x = rng.random_range(-1.0..1.0);
        // Near-deterministic instances have SE ~ 1e-6, so both the dropped tail
        // e^{-rho T} V(X_T) and the O(dt) Euler bias must sit below that.
        let cfg = SimConfig::new(2.5e-4, 1e8f64.ln() / rho, 20_000, 600 + i).unwrap();
        match solvability_equivalence_check(&c, rho, alpha, x, &cfg) {
            Ok(r) => {
                ok &= r.passed();
                mean_gap = mean_gap.max(r.slope_gap).max(r.intercept_gap);
                zs.push(format!("{:+.2}", (r.mc.mean - r.statement_b_value) / r.mc.std_error));
            }
            Err(e) => {
                ok = false;
                zs.push(format!("error {e}"));
            }
        }
    }
    line(ok, 6, format!("5 instances, dt=2.5e-4, n=2e4, classical MC vs statement-(b) value in SE: [{}]; mean formula gap {mean_gap:.1e} (<=1e-14)", zs.join(", ")))
}

fn criterion_7() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut ok = true;
    let (mut min_gap, mut max_refined): (f64, f64) = (f64::INFINITY, 0.0);
    let mut affine = true;
    for _ in 0..5 {
        let (t1, t2, rho, alpha) = random_pair(&mut rng);
        match minimax_check(&t1, &t2, rho, alpha, 1.0) {
            Ok(m) => {
                min_gap = min_gap.min(m.coarse.gap).min(m.refined.gap);
                max_refined = max_refined.max(m.refined.gap);
                affine &= m.lambda_affine();
            }
            Err(_) => ok = false,
        }
    }
    ok &= min_gap >= -1e-12 && max_refined < 1e-3 && affine;
    line(ok, 7, format!("5 instances: min gap {min_gap:.2e} (>= -1e-12), refined gap max {max_refined:.2e} (<1e-3), endpoint sup on every row: {affine}"))
}

fn criterion_8() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (c, rho, _) = random_single(&mut rng, 0.0);
        match alpha_limit_check(&c, rho, &[1.0, 0.1, 0.01]) {
            Ok(r) => {
                ok &= r.passed(1e-12);
                worst = worst.max(r.mean_drift).max(r.ratio_drift).max(r.offset_error_displayed);
            }
            Err(_) => ok = false,
        }
    }
    line(ok, 8, format!("5 instances, alphas {{1, 0.1, 0.01}}: max drift / offset error {worst:.2e} (<1e-12)"))
}

fn explq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_explq"))
}

const VIOLATING: &str = "
[dynamics]
A = 0.8
B = 0.0
C = 0.3
D = 0.0
[cost]
L = 1.0
R = 1.0
[solver]
rho = 1.0
alpha = 0.5
x0 = 1.0
paths = 2000
seed = 9
";

fn criterion_9() -> bool {
    let c = coeffs([-1.5, 1.0, 0.3, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    let (rho, alpha) = (1.0, 0.5);
    let v = solve_theta(&c, rho, alpha).unwrap();
    let g = gaussian_from_value(&c, &v.quadratic(), alpha).unwrap();
    let p = GaussianPolicy::feedback(g.mean_slope, 0.0).unwrap();
    let cfg = SimConfig::new(1e-3, default_horizon(rho), 4000, 909).unwrap();
    let r = check_moment_decay(&c, &p, 1.0, &cfg).unwrap();
    let rel = (r.fitted_rate - r.analytic_rate).abs() / r.analytic_rate.abs();
    let stable_ok = 2.0 * c.a + c.c * c.c < -rho && r.stable && r.fitted_rate < 0.0 && rel <= 0.15;

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("violating.toml");
    fs::write(&cfg_path, VIOLATING).unwrap();
    let out = dir.path().join("out");
    let status = explq().args(["verify", "--force", "--config"]).arg(&cfg_path).arg("--out").arg(&out).output().unwrap();
    let csv = fs::read_to_string(out.join("verify.csv")).unwrap_or_default();
    let decay_failed = csv.lines().any(|l| l.contains("moment_decay.rate") && l.ends_with(",false"));
    let violating_ok = status.status.code() == Some(1) && decay_failed;
    line(
        stable_ok && violating_ok,
        9,
        format!(
            "stable: fitted rate {:.4} vs analytic {:.4} (rel {rel:.3}, <=0.15); violating with --force: exit {:?}, moment_decay row failed: {decay_failed}",
            r.fitted_rate,
            r.analytic_rate,
            status.status.code()
        ),
    )
}

fn simulate(config: &Path, out: &Path, workers: &str) -> Option<i32> {
    explq()
        .args(["simulate", "--paths", "3000", "--seed", "77", "--dump-paths", "3", "--dump-stride", "100", "--workers", workers, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
}

fn criterion_10() -> bool {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_point.toml");
    let dir = tempfile::tempdir().unwrap();
    let runs = [("a", "1"), ("b", "1"), ("c", "3")];
    let mut codes = Vec::new();
    for (name, w) in runs {
        codes.push(simulate(&root, &dir.path().join(name), w));
    }
    let read = |n: &str, f: &str| fs::read(dir.path().join(n).join(f)).unwrap_or_default();
    let identical = ["simulate.csv", "trajectories.csv"].iter().all(|f| {
        let a = read("a", f);
        !a.is_empty() && a == read("b", f) && a == read("c", f)
    });
    let ok = codes.iter().all(|c| *c == Some(0)) && identical;
    line(ok, 10, format!("simulate x3 (workers 1, 1, 3), seed 77: exit codes {codes:?}, byte-identical CSVs: {identical}"))
}

#[test]
fn acceptance_criteria() {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
