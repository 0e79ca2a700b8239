use explq_core::model::RunConfig;
use explq_core::policy::{gaussian_from_value, gibbs_on_grid, GibbsConvention};
use explq_core::riccati::{
    compare_closed_numeric, probe_residual, solve_two_point_closed, solve_two_point_numeric, TwoPointSolution,
};
use explq_core::{CoefficientFamily, RobustSolution, RootBranch, ValidationReport, WorstCase};

use crate::output::{num, opt, Table, SOLVE_COLUMNS};
use crate::{solve_scenarios, CliError, Context, Scenario, EXIT_OK};

#[derive(Debug, Clone, Default)]
pub(crate) struct SolveRow {
    pub kind: &'static str,
    pub scenario: String,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub branch_id: Option<usize>,
    pub k2: Option<f64>,
    pub k1: Option<f64>,
    pub k0: Option<f64>,
    pub k0_displayed: Option<f64>,
    pub variance: Option<f64>,
    pub mean_slope: Option<f64>,
    pub mean_intercept: Option<f64>,
    pub residual: Option<f64>,
    pub value: Option<f64>,
    pub note: String,
}

impl SolveRow {
    fn record(&self, run_id: &str) -> Vec<String> {
        vec![
            run_id.to_string(),
            self.kind.to_string(),
            self.scenario.clone(),
            opt(self.lambda),
            opt(self.theta),
            self.branch_id.map(|b| b.to_string()).unwrap_or_default(),
            opt(self.k2),
            opt(self.k1),
            opt(self.k0),
            opt(self.k0_displayed),
            opt(self.variance),
            opt(self.mean_slope),
            opt(self.mean_intercept),
            opt(self.residual),
            opt(self.value),
            self.note.clone(),
        ]
    }
}

/// Solutions gathered for one configuration.
pub(crate) struct Solved {
    pub robust: RobustSolution,
    pub scenarios: Vec<Scenario>,
    pub theta_rows: Vec<SolveRow>,
    /// Numeric two-point branches at the configured λ, best first.
    pub mixture: Option<Result<Vec<TwoPointSolution>, String>>,
    pub rows: Vec<SolveRow>,
}

fn branch_index(b: RootBranch) -> usize {
    match b {
        RootBranch::Minus => 0,
        RootBranch::Plus => 1,
        RootBranch::Linear => 2,
    }
}

fn theta_row(s: &Scenario, cfg: &RunConfig) -> Result<SolveRow, CliError> {
    let p = &cfg.problem;
    let q = s.v.quadratic();
    let policy = gaussian_from_value(&s.coeffs, &q, p.alpha)?;
    let mut note = format!("branch={}", s.v.branch.as_str());
    if let Some(r) = &s.v.rejected {
        note.push_str(&format!("; rejected {} root {}: {}", r.branch.as_str(), num(r.value), r.reason));
    }
    Ok(SolveRow {
        kind: "theta",
        scenario: s.label.clone(),
        lambda: s.lambda,
        theta: s.theta,
        branch_id: Some(branch_index(s.v.branch)),
        k2: Some(s.v.k2),
        k1: Some(s.v.k1),
        k0: Some(s.v.k0),
        k0_displayed: Some(s.v.k0_displayed),
        variance: Some(s.v.variance),
        mean_slope: Some(policy.mean_slope),
        mean_intercept: Some(policy.mean_intercept),
        residual: Some(probe_residual(&q, &s.coeffs, p.rho, p.alpha, p.state_bound)?),
        value: Some(s.v.value(cfg.x0)),
        note,
    })
}

fn mixture_row(sol: &TwoPointSolution, cfg: &RunConfig, kind: &'static str, extra: &str) -> SolveRow {
    let CoefficientFamily::TwoPoint { theta1, theta2 } = &cfg.problem.family else {
        unreachable!("mixture rows need a two-point family")
    };
    let diag = sol.diagonal_policy(theta1, theta2, cfg.problem.alpha).ok();
    SolveRow {
        kind,
        scenario: "mixture".into(),
        lambda: Some(sol.lambda),
        theta: None,
        branch_id: Some(sol.branch_id),
        k2: Some(sol.k21),
        k1: Some(sol.k11),
        k0: Some(sol.k0),
        k0_displayed: None,
        variance: diag.map(|d| d.2),
        mean_slope: diag.map(|d| d.0),
        mean_intercept: diag.map(|d| d.1),
        residual: Some(sol.residual),
        value: Some(sol.value(cfg.x0, cfg.x0)),
        note: format!(
            "k22={}; k12={}; equation_residual={}{extra}",
            num(sol.k22),
            num(sol.k12),
            num(sol.equation_residual)
        ),
    }
}

fn error_row(kind: &'static str, scenario: &str, lambda: f64, e: impl std::fmt::Display) -> SolveRow {
    SolveRow { kind, scenario: scenario.into(), lambda: Some(lambda), note: format!("error: {e}"), ..Default::default() }
}

fn worst_label(w: WorstCase) -> String {
    match w {
        WorstCase::Single => "theta1".into(),
        WorstCase::Lambda(1.0) => "theta1".into(),
        WorstCase::Lambda(_) => "theta2".into(),
        WorstCase::A(_) => "uniform".into(),
    }
}

fn worst_note(w: WorstCase) -> String {
    match w {
        WorstCase::Single => "worst_case=single".into(),
        WorstCase::Lambda(l) => format!("worst_case=lambda:{l}"),
        WorstCase::A(a) => format!("worst_case=a:{}", num(a)),
    }
}

pub(crate) fn collect(cfg: &RunConfig) -> Result<Solved, CliError> {
    let p = &cfg.problem;
    let (robust, scenarios) = solve_scenarios(p, cfg.x0)?;
    let theta_rows = scenarios.iter().map(|s| theta_row(s, cfg)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = theta_rows.clone();

    let mut mixture = None;
    if let CoefficientFamily::TwoPoint { theta1, theta2 } = &p.family {
        let lam = cfg.lambda;
        let numeric = solve_two_point_numeric(theta1, theta2, lam, p.rho, p.alpha, p.state_bound);
        match &numeric {
            Ok(sols) => rows.extend(sols.iter().map(|s| mixture_row(s, cfg, "two_point", ""))),
            Err(e) => rows.push(error_row("two_point", "mixture", lam, e)),
        }
        match solve_two_point_closed(theta1, theta2, lam, p.rho, p.alpha, p.state_bound) {
            Ok(closed) => {
                let extra = match &numeric {
                    Ok(sols) => {
                        let cmp = compare_closed_numeric(&closed, &sols[0]);
                        format!("; closed_vs_numeric max_abs_diff={} agree={}", num(cmp.max_abs_diff), cmp.agree)
                    }
                    Err(_) => "; closed_vs_numeric unavailable".into(),
                };
                rows.push(mixture_row(&closed, cfg, "two_point_closed", &extra));
            }
            Err(e) => rows.push(error_row("two_point_closed", "mixture", lam, e)),
        }
        mixture = Some(numeric.map_err(|e| e.to_string()));
    }

    let worst = robust.worst_case;
    let mut robust_row = match worst {
        WorstCase::A(_) => SolveRow { kind: "robust", scenario: worst_label(worst), ..Default::default() },
        _ => {
            let idx = if worst == WorstCase::Lambda(0.0) { 1 } else { 0 };
            SolveRow { kind: "robust", ..theta_rows[idx].clone() }
        }
    };
    match worst {
        WorstCase::A(a) => robust_row.theta = Some(a),
        WorstCase::Lambda(l) => robust_row.lambda = Some(l),
        WorstCase::Single => {}
    }
    robust_row.value = Some(robust.value);
    robust_row.note = worst_note(worst);
    rows.push(robust_row);

    Ok(Solved { robust, scenarios, theta_rows, mixture, rows })
}

fn print_report(report: &ValidationReport) {
    println!("assumption checks:");
    for c in &report.checks {
        let status = if c.passed { "ok" } else if c.blocking { "FAILED" } else { "not met" };
        let kind = if c.blocking { "blocking" } else { "info" };
        println!("  [{kind}] {:<22} {status:<8} lhs={} rhs={} {}", c.name, num(c.lhs), num(c.rhs), c.note);
    }
}

fn print_gibbs(s: &Scenario, cfg: &RunConfig) {
    let alpha = cfg.problem.alpha;
    let q = s.v.quadratic();
    let Ok(policy) = gaussian_from_value(&s.coeffs, &q, alpha) else { return };
    let grid = policy.default_grid(cfg.x0);
    println!(
        "  {}: gaussian mean={} variance={}",
        s.label,
        num(policy.mean(cfg.x0)),
        num(policy.variance)
    );
    for conv in [GibbsConvention::Minimizing, GibbsConvention::AsDisplayed] {
        match gibbs_on_grid(&s.coeffs, &q, alpha, cfg.x0, &grid, conv) {
            Ok(g) => println!("    {conv:?}: grid mean={} variance={}", num(g.mean()), num(g.variance())),
            Err(e) => println!("    {conv:?}: {e}"),
        }
    }
}

pub(crate) fn run(ctx: &mut Context) -> Result<u8, CliError> {
    let cfg = ctx.cfg.clone();
    let report = ctx.gate(&cfg)?;
    let solved = collect(&cfg)?;

    let mut table = Table::new(&SOLVE_COLUMNS);
    for r in &solved.rows {
        table.push(r.record(&ctx.run_id));
    }
    ctx.write("solve.csv", &table)?;

    println!("run {} ({} family, x0 = {})", ctx.run_id, cfg.problem.family.kind(), cfg.x0);
    if ctx.global.verbose {
        print_report(&report);
    }
    for r in solved.theta_rows.iter().take(8) {
        println!(
            "  {:<8} k2={} k1={} k0={} variance={} residual={}",
            r.scenario,
            opt(r.k2),
            opt(r.k1),
            opt(r.k0),
            opt(r.variance),
            opt(r.residual)
        );
    }
    if solved.theta_rows.len() > 8 {
        println!("  ... {} quadrature nodes in solve.csv", solved.theta_rows.len());
    }
    match &solved.mixture {
        Some(Ok(sols)) => println!(
            "  mixture at lambda={}: {} branch(es), best k21={} k22={} residual={}",
            cfg.lambda,
            sols.len(),
            num(sols[0].k21),
            num(sols[0].k22),
            num(sols[0].residual)
        ),
        Some(Err(e)) => println!("  mixture at lambda={}: {e}", cfg.lambda),
        None => {}
    }
    println!("  robust value {} ({})", num(solved.robust.value), worst_note(solved.robust.worst_case));
    if ctx.global.verbose {
        println!("Gibbs densities at x0 (grid of 801 points, +-8 sd):");
        for s in solved.scenarios.iter().take(2) {
            print_gibbs(s, &cfg);
        }
    }
    println!("wrote {}", ctx.out_dir().join("solve.csv").display());
    Ok(EXIT_OK)
}
