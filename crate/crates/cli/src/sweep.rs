use explq_core::model::{RunConfig, OVERRIDABLE_PARAMS};
use explq_core::robust::exploration_cost;
use explq_core::CoefficientFamily;

use crate::args::SweepArgs;
use crate::output::{num, Table, SWEEP_COLUMNS};
use crate::solve::collect;
use crate::{CliError, Context, EXIT_NUMERICAL, EXIT_OK};

struct Metric {
    scenario: String,
    metric: &'static str,
    value: f64,
    note: String,
}

fn metric(scenario: &str, metric: &'static str, value: f64) -> Metric {
    Metric { scenario: scenario.into(), metric, value, note: String::new() }
}

fn point(ctx: &Context, cfg: &RunConfig) -> Result<Vec<Metric>, CliError> {
    ctx.gate(cfg)?;
    let solved = collect(cfg)?;
    let mut out = Vec::new();
    if !matches!(cfg.problem.family, CoefficientFamily::UniformPoly(_)) {
        for r in &solved.theta_rows {
            for (name, v) in [
                ("k2", r.k2),
                ("k1", r.k1),
                ("k0", r.k0),
                ("k0_displayed", r.k0_displayed),
                ("variance", r.variance),
                ("mean_slope", r.mean_slope),
                ("mean_intercept", r.mean_intercept),
                ("residual", r.residual),
                ("value", r.value),
            ] {
                out.push(metric(&r.scenario, name, v.unwrap_or(f64::NAN)));
            }
        }
    }
    match &solved.mixture {
        Some(Ok(sols)) => {
            let b = &sols[0];
            for (name, v) in [
                ("k21", b.k21),
                ("k22", b.k22),
                ("k11", b.k11),
                ("k12", b.k12),
                ("k0", b.k0),
                ("residual", b.residual),
                ("value", b.value(cfg.x0, cfg.x0)),
            ] {
                out.push(metric("mixture", name, v));
            }
        }
        Some(Err(e)) => out.push(Metric { scenario: "mixture".into(), metric: "error", value: f64::NAN, note: e.clone() }),
        None => {}
    }
    out.push(metric("robust", "robust_value", solved.robust.value));
    out.push(metric("robust", "worst_case", solved.robust.worst_case.parameter()));
    let e = exploration_cost(&cfg.problem, cfg.x0)?;
    out.push(metric("robust", "exploration_cost", e.cost));
    out.push(metric("robust", "exploration_cost_expected", e.expected));
    out.push(metric("robust", "exploration_cost_consistent", e.cost_consistent));
    Ok(out)
}

pub(crate) fn run(ctx: &mut Context, a: &SweepArgs) -> Result<u8, CliError> {
    if !OVERRIDABLE_PARAMS.iter().any(|(p, _)| *p == a.param) {
        let known: Vec<&str> = OVERRIDABLE_PARAMS.iter().map(|(p, _)| *p).collect();
        return Err(CliError::Config(format!("unknown sweep parameter {:?} (known: {})", a.param, known.join(", "))));
    }
    let mut table = Table::new(&SWEEP_COLUMNS);
    let mut n_failed = 0;
    for &v in &a.values {
        let res = ctx
            .cfg
            .with_override(&a.param, v)
            .map_err(|e| CliError::Config(e.to_string()))
            .and_then(|cfg| point(ctx, &cfg));
        let metrics = match res {
            Ok(m) => m,
            Err(e) => {
                n_failed += 1;
                eprintln!("sweep {}={v}: {e}", a.param);
                vec![Metric { scenario: String::new(), metric: "error", value: f64::NAN, note: e.to_string() }]
            }
        };
        for m in metrics {
            table.push(vec![ctx.run_id.clone(), a.param.clone(), num(v), m.scenario, m.metric.to_string(), num(m.value), m.note]);
        }
    }
    ctx.write("sweep.csv", &table)?;
    println!(
        "run {}: swept {} over {} value(s), {} row(s), {} failed point(s)",
        ctx.run_id,
        a.param,
        a.values.len(),
        table.len(),
        n_failed
    );
    Ok(if n_failed > 0 && ctx.global.strict { EXIT_NUMERICAL } else { EXIT_OK })
}
