use explq_core::model::RunConfig;
use explq_core::policy::gaussian_from_value;
use explq_core::sde_sim::{dump_trajectories, estimate_cost_exploratory, estimate_cost_mixture};
use explq_core::{coefficients_at, solve_theta, CoefficientFamily, MCEstimate, SimConfig, WorstCase};

use crate::args::SimulateArgs;
use crate::output::{flag, num, opt, Table, SIMULATE_COLUMNS, TRAJECTORY_COLUMNS};
use crate::{solve_scenarios, CliError, Context, EXIT_NUMERICAL, EXIT_OK};

pub(crate) fn sim_config(cfg: &RunConfig, seed: u64, workers: Option<usize>, a: Option<&SimulateArgs>) -> Result<SimConfig, CliError> {
    let dt = a.and_then(|a| a.dt).unwrap_or(cfg.sim.dt);
    let horizon = a.and_then(|a| a.horizon).unwrap_or_else(|| cfg.horizon());
    let paths = a.and_then(|a| a.paths).unwrap_or(cfg.sim.paths);
    let sim = SimConfig::new(dt, horizon, paths, seed).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(match workers {
        Some(w) => sim.with_workers(w),
        None => sim,
    })
}

struct SimRow {
    scenario: String,
    lambda: Option<f64>,
    theta: Option<f64>,
    est: MCEstimate,
    closed_form: f64,
}

pub(crate) fn run(ctx: &mut Context, a: &SimulateArgs) -> Result<u8, CliError> {
    let cfg = ctx.cfg.clone();
    ctx.gate(&cfg)?;
    let p = &cfg.problem;
    let sim = sim_config(&cfg, ctx.seed, ctx.global.workers, Some(a))?;
    let (robust, scenarios) = solve_scenarios(p, cfg.x0)?;

    let mut rows = Vec::new();
    let dump_target;
    match (&p.family, robust.worst_case) {
        (CoefficientFamily::UniformPoly(_), WorstCase::A(a_star)) => {
            // path i runs under θ = a*(i + ½)/n, a stratified sample of Uniform(0, a*)
            let n = sim.n_paths;
            let mut strata = Vec::with_capacity(n);
            for i in 0..n {
                let theta = a_star * (i as f64 + 0.5) / n as f64;
                let c = coefficients_at(&p.family, theta)?;
                let v = solve_theta(&c, p.rho, p.alpha)?;
                strata.push((c, gaussian_from_value(&c, &v.quadratic(), p.alpha)?));
            }
            let est = estimate_cost_mixture(&strata, cfg.x0, p.rho, p.alpha, &sim)?;
            rows.push(SimRow { scenario: "uniform".into(), lambda: None, theta: Some(a_star), est, closed_form: robust.value });
            dump_target = strata[n / 2];
        }
        _ => {
            for s in &scenarios {
                let policy = gaussian_from_value(&s.coeffs, &s.v.quadratic(), p.alpha)?;
                let est = estimate_cost_exploratory(&s.coeffs, &policy, cfg.x0, p.rho, p.alpha, &sim)?;
                rows.push(SimRow {
                    scenario: s.label.clone(),
                    lambda: s.lambda,
                    theta: s.theta,
                    est,
                    closed_form: s.v.value(cfg.x0),
                });
            }
            let worst = if robust.worst_case == WorstCase::Lambda(0.0) { 1 } else { 0 };
            let s = &scenarios[worst];
            dump_target = (s.coeffs, gaussian_from_value(&s.coeffs, &s.v.quadratic(), p.alpha)?);
        }
    }

    let mut table = Table::new(&SIMULATE_COLUMNS);
    let truncation = sim.truncation_note(p.rho);
    for r in &rows {
        table.push(vec![
            ctx.run_id.clone(),
            r.scenario.clone(),
            opt(r.lambda),
            opt(r.theta),
            num(cfg.x0),
            r.est.n_paths.to_string(),
            r.est.n_diverged.to_string(),
            num(sim.dt),
            num(sim.horizon),
            sim.n_steps.to_string(),
            num(r.est.mean),
            num(r.est.std_error),
            num(r.closed_form),
            num(r.est.mean - r.closed_form),
            flag(r.est.within(r.closed_form, 3.0)),
            num(truncation),
            flag(r.est.valid),
        ]);
    }
    ctx.write("simulate.csv", &table)?;

    if a.dump_paths > 0 {
        let (c, policy) = dump_target;
        let mut traj = Table::new(&TRAJECTORY_COLUMNS);
        for row in dump_trajectories(&c, &policy, cfg.x0, p.alpha, &sim, a.dump_paths, a.dump_stride) {
            traj.push(vec![ctx.run_id.clone(), num(row.t), row.path_id.to_string(), num(row.x), num(row.running_cost)]);
        }
        ctx.write("trajectories.csv", &traj)?;
    }

    println!(
        "run {}: {} paths, dt={}, horizon={} ({} steps), seed {}",
        ctx.run_id, sim.n_paths, sim.dt, sim.horizon, sim.n_steps, ctx.seed
    );
    for r in &rows {
        println!(
            "  {:<8} estimate={} se={} closed_form={} gap/se={:.2} diverged={}",
            r.scenario,
            num(r.est.mean),
            num(r.est.std_error),
            num(r.closed_form),
            (r.est.mean - r.closed_form) / r.est.std_error,
            r.est.n_diverged
        );
    }
    let flagged: Vec<&str> = rows.iter().filter(|r| !r.est.valid).map(|r| r.scenario.as_str()).collect();
    if !flagged.is_empty() {
        eprintln!("warning: divergence threshold exceeded for {}", flagged.join(", "));
        if ctx.global.strict {
            return Ok(EXIT_NUMERICAL);
        }
    }
    Ok(EXIT_OK)
}
