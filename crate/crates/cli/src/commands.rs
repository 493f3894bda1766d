use std::path::{Path, PathBuf};

use chern_yamabe::bifurcation::{bifurcation_instants, kernel_families, parse_rational, MultiplierFormula};
use chern_yamabe::chern::{
    chern_laplacian, chern_laplacian_via_lee, chern_scalar, gauduchon_residual, lee_form, ConformalInstance,
};
use chern_yamabe::geometry::{c2_norm, integrate, FieldDocument, GridChart, HermitianMetricField, ScalarField};
use chern_yamabe::models::{
    hopf_scalar_check, make_instance, random_perturbed_metric, HopfDegreeReport, HopfScalarReport,
    ModelInstance,
};
use chern_yamabe::solver::{
    continuity_solve, functional_warning, run_flow, small_data_solve, solve_zero_degree, uniqueness_probe,
    ChernYamabeProblem, FlowTermination, SolverSolution,
};
use chern_yamabe::solver::continuity::random_smooth_field;
use num_rational::Rational64;
use serde_json::json;

use crate::config::{Command, RunConfig, SolveMethod};
use crate::error::CliError;
use crate::report::{float, write_table, write_trace, Report};

/// Zero-degree threshold used to choose the solution method.
const ZERO_DEGREE: f64 = 1e-8;
/// Residual accepted for a reported solution.
const SOLUTION_TOLERANCE: f64 = 1e-6;

/// One invocation: a subcommand, its config and command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub command: Option<Command>,
    pub config_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub lambda: Option<String>,
    pub interval: Option<(String, String)>,
    pub j_max: Option<u32>,
}

pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

fn config_error(reason: &'static str, pointer: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        reason,
        pointer: Some(pointer.into()),
        message: message.into(),
    }
}

/// Loads and completes the configuration for an invocation.
pub fn resolve_config(inv: &Invocation) -> Result<(Command, RunConfig, Option<PathBuf>), CliError> {
    let command = inv
        .command
        .ok_or_else(|| config_error("missing_command", "command", "no subcommand given"))?;
    let mut config = match &inv.config_path {
        Some(p) => RunConfig::from_path(p)?,
        None if matches!(command, Command::Verify | Command::Bifurcate) => RunConfig::empty(),
        None => {
            return Err(CliError::Config {
                reason: "missing_config",
                pointer: None,
                message: format!("`{}` needs --config", command.name()),
            })
        }
    };
    if let Some(c) = config.command {
        if c != command {
            return Err(config_error(
                "command_mismatch",
                "command",
                format!("config is for `{}` but `{}` was invoked", c.name(), command.name()),
            ));
        }
    }
    config.command = Some(command);
    if let Some(seed) = inv.seed {
        config.seed = seed;
    }
    if let Some(l) = &inv.lambda {
        config.bifurcation.lambda = Some(crate::config::RationalInput::Text(l.clone()));
    }
    if let Some((a, b)) = &inv.interval {
        config.bifurcation.interval = Some([
            crate::config::RationalInput::Text(a.clone()),
            crate::config::RationalInput::Text(b.clone()),
        ]);
    }
    if let Some(j) = inv.j_max {
        config.bifurcation.j_max = j;
    }
    if let Some(out) = &inv.out {
        config.output.directory = Some(out.clone());
    }
    let base_dir = inv.config_path.as_ref().and_then(|p| p.parent().map(Path::to_path_buf));
    Ok((command, config, base_dir))
}

/// Executes an invocation and writes its report (and traces) to the output directory.
pub fn run(inv: &Invocation) -> Result<RunOutcome, CliError> {
    let (command, config, base_dir) = resolve_config(inv)?;
    let dir = config.output.directory.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Output {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut report = Report::new(command.name(), config.clone());
    let ctx = Context {
        config: &config,
        dir: &dir,
        base_dir: base_dir.as_deref(),
    };
    match command {
        Command::Curvature => curvature(&ctx, &mut report)?,
        Command::Degree => degree(&ctx, &mut report)?,
        Command::Solve => solve(&ctx, &mut report)?,
        Command::Flow => flow(&ctx, &mut report)?,
        Command::Bifurcate => bifurcate(&ctx, &mut report)?,
        Command::Verify => verify(&ctx, &mut report)?,
    }
    let report_path = dir.join(&config.output.report_name);
    std::fs::write(&report_path, report.to_json()).map_err(|e| CliError::Output {
        path: report_path.display().to_string(),
        source: e,
    })?;
    Ok(RunOutcome { report, report_path })
}

struct Context<'a> {
    config: &'a RunConfig,
    dir: &'a Path,
    base_dir: Option<&'a Path>,
}

impl Context<'_> {
    fn artifact(&self, report: &mut Report, name: &str) -> PathBuf {
        report.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    fn write_text(&self, report: &mut Report, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.artifact(report, name);
        std::fs::write(&path, text).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            source: e,
        })
    }
}

enum Source {
    Geometric(Box<ConformalInstance>),
    Synthetic(Box<ChernYamabeProblem>),
    Hopf(HopfScalarReport, HopfDegreeReport),
}

fn load_source(ctx: &Context) -> Result<Source, CliError> {
    match (&ctx.config.recipe, &ctx.config.instance) {
        (Some(_), Some(_)) => Err(config_error(
            "conflicting_inputs",
            "instance",
            "give either `recipe` or `instance`, not both",
        )),
        (None, None) => Err(config_error("missing_input", "recipe", "this command needs a `recipe` or an `instance`")),
        (None, Some(path)) => {
            let path = match ctx.base_dir {
                Some(base) if path.is_relative() => base.join(path),
                _ => path.clone(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| config_error("unreadable_instance", "instance", format!("{}: {e}", path.display())))?;
            let inst = ConformalInstance::from_json(&text)
                .map_err(|e| config_error("invalid_instance", "instance", e.to_string()))?;
            Ok(Source::Geometric(Box::new(inst)))
        }
        (Some(recipe), None) => match make_instance(recipe).map_err(CliError::from_core)? {
            ModelInstance::Geometric(i) => Ok(Source::Geometric(i)),
            ModelInstance::Synthetic(p) => Ok(Source::Synthetic(p)),
            ModelInstance::Hopf { scalar, degree } => Ok(Source::Hopf(scalar, degree)),
        },
    }
}

fn load_problem(ctx: &Context, report: &mut Report) -> Result<ChernYamabeProblem, CliError> {
    let problem = match load_source(ctx)? {
        Source::Geometric(inst) => {
            ChernYamabeProblem::from_instance(&inst, ctx.config.lambda).map_err(CliError::from_core)?
        }
        Source::Synthetic(p) => match ctx.config.lambda {
            Some(l) => p.with_lambda(l),
            None => *p,
        },
        Source::Hopf(..) => {
            return Err(config_error(
                "unsupported_model",
                "recipe.model.kind",
                "the Hopf model is pointwise only; it has no grid for the solvers",
            ))
        }
    };
    report.provenance("synthetic", problem.synthetic);
    report.provenance("balanced_base", problem.balanced);
    report.quantity("degree", float(problem.degree), Some(ZERO_DEGREE), "chern");
    report.quantity("lambda_target", float(problem.lambda), None, "solver");
    if let Some(w) = functional_warning(&problem) {
        report.warnings.push(w);
    }
    Ok(problem)
}

fn field_stats(f: &ScalarField) -> serde_json::Value {
    json!({ "min": float(f.min()), "max": float(f.max()), "mean": float(f.mean()), "sup": float(f.sup_norm()) })
}

fn curvature(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    match load_source(ctx)? {
        Source::Geometric(inst) => {
            let s = chern_scalar(&inst.base);
            let (g, b) = gauduchon_residual(&inst.base);
            report.detail("chern_scalar", field_stats(&s));
            report.quantity("total_scalar_curvature", float(integrate(&s, &inst.base)), None, "chern");
            report.quantity("gauduchon_residual", float(g), None, "chern");
            report.quantity("balanced_residual", float(b), None, "chern");
            let lee = lee_form(&inst.base).map_err(CliError::from_core)?;
            report.quantity("lee_form_sup", float(lee.sup_norm()), None, "chern");
            report.detail("gauduchon_representative_scalar", field_stats(&inst.scalar));
            report.provenance("synthetic", false);
            if ctx.config.output.traces {
                ctx.write_text(report, "chern_scalar.json", &FieldDocument::from_scalar(&s).to_json())?;
            }
        }
        Source::Synthetic(p) => {
            report.provenance("synthetic", true);
            report.detail("chern_scalar", field_stats(&p.scalar));
        }
        Source::Hopf(s, _) => hopf_checks(report, &s),
    }
    Ok(())
}

fn hopf_checks(report: &mut Report, s: &HopfScalarReport) {
    report.quantity("hopf_scalar_mean", float(s.mean), Some(1e-8), "models");
    report.check(
        "hopf_deviation_symbolic",
        float(s.max_deviation_symbolic),
        Some(1e-8),
        "models",
        s.max_deviation_symbolic < 1e-8,
    );
    report.check(
        "hopf_deviation_finite_difference",
        float(s.max_deviation_finite_difference),
        Some(1e-5),
        "models",
        s.max_deviation_finite_difference < 1e-5,
    );
    report.check(
        "hopf_deck_invariance",
        float(s.deck_max_difference),
        Some(1e-12),
        "models",
        s.deck_max_difference < 1e-12,
    );
    report.detail("hopf_scalar", s);
}

fn degree(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    match load_source(ctx)? {
        Source::Geometric(inst) => {
            report.provenance("synthetic", false);
            report.quantity("degree", float(inst.degree), Some(ZERO_DEGREE), "chern");
            report.quantity("degree_recomputed", float(inst.recompute_degree()), Some(ZERO_DEGREE), "chern");
            report.quantity(
                "projected_gauduchon_residual",
                float(inst.report.gauduchon_residual),
                Some(1e-6 * inst.report.input_residual.max(1e-12)),
                "chern",
            );
            report.detail("projection", &inst.report);
            ctx.write_text(report, "instance.json", &inst.to_json())?;
        }
        Source::Synthetic(p) => {
            report.provenance("synthetic", true);
            report.quantity("degree", float(p.degree), None, "solver");
        }
        Source::Hopf(_, d) => {
            report.quantity("hopf_degree", float(d.degree), Some(1e-12), "models");
            report.quantity("hopf_degree_lebesgue_convention", float(d.lebesgue_degree), Some(1e-12), "models");
            report.quantity("hopf_volume", float(d.volume), Some(1e-12), "models");
            report.detail("hopf_degree", &d);
        }
    }
    Ok(())
}

fn solution_report(ctx: &Context, report: &mut Report, problem: &ChernYamabeProblem, sol: &SolverSolution) -> Result<(), CliError> {
    report.check(
        "residual",
        float(sol.residual),
        Some(SOLUTION_TOLERANCE),
        "solver",
        sol.residual < SOLUTION_TOLERANCE,
    );
    report.quantity("lambda", float(sol.lambda), Some(SOLUTION_TOLERANCE), "solver");
    report.quantity("constraint_defect", float(sol.constraint_defect), Some(1e-10), "solver");
    report.quantity("normalization_shift", float(sol.normalization_shift), None, "solver");
    report.quantity("iterations", sol.iterations, None, "solver");
    report.quantity("bound_violations", sol.bound_violations, None, "solver");
    report.quantity("max_bound_violation", float(sol.max_bound_violation), None, "solver");
    let curvature = problem.conformal_scalar(&sol.unnormalized_f());
    report.detail("conformal_factor", field_stats(&sol.f));
    report.detail("resulting_scalar", field_stats(&curvature));
    if ctx.config.output.traces {
        let path = ctx.artifact(report, "trace.csv");
        write_trace(&path, &sol.trace)?;
        ctx.write_text(report, "solution.json", &FieldDocument::from_scalar(&sol.f).to_json())?;
    }
    Ok(())
}

fn solve(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let problem = load_problem(ctx, report)?;
    let block = &ctx.config.solver;
    let method = match block.method {
        SolveMethod::Auto if problem.degree.abs() <= ZERO_DEGREE => SolveMethod::Linear,
        SolveMethod::Auto if problem.degree < 0.0 => SolveMethod::Continuity,
        SolveMethod::Auto => SolveMethod::SmallData,
        m => m,
    };
    report.provenance("method", format!("{method:?}").to_lowercase());
    match method {
        SolveMethod::Linear => {
            let sol = solve_zero_degree(&problem).map_err(CliError::from_core)?;
            solution_report(ctx, report, &problem, &sol)?;
        }
        SolveMethod::Continuity => {
            let sol = continuity_solve(&problem, &block.continuity).map_err(CliError::from_core)?;
            solution_report(ctx, report, &problem, &sol)?;
            if block.uniqueness_seeds > 0 {
                let u = uniqueness_probe(&problem, block.uniqueness_seeds, ctx.config.seed, &block.continuity)
                    .map_err(CliError::from_core)?;
                report.check(
                    "uniqueness_deviation",
                    float(u.max_pairwise_deviation),
                    Some(SOLUTION_TOLERANCE),
                    "solver",
                    u.consistent(SOLUTION_TOLERANCE),
                );
                report.detail("uniqueness", &u);
            }
        }
        SolveMethod::SmallData => {
            let out = small_data_solve(&problem, &block.small_data);
            report.detail("newton_residuals", out.residual_history.iter().map(|v| float(*v)).collect::<Vec<_>>());
            match out.solution {
                Some(sol) => solution_report(ctx, report, &problem, &sol)?,
                None => report.fail(format!(
                    "small-data Newton iteration did not converge in {} iterations; the data may be too large",
                    out.iterations
                )),
            }
        }
        SolveMethod::Auto => unreachable!(),
    }
    Ok(())
}

fn flow(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let problem = load_problem(ctx, report)?;
    let tr = run_flow(&problem, None, &ctx.config.solver.flow);
    let last = tr.rows.last().expect("flow records its initial state");
    report.quantity("final_time", float(last.t), None, "solver");
    report.quantity("final_residual", float(last.residual), Some(ctx.config.solver.flow.tolerance), "solver");
    report.quantity("final_f_sup", float(last.f_sup), None, "solver");
    if let Some(v) = last.functional {
        report.quantity("final_functional", float(v), None, "solver");
    }
    report.detail("termination", &tr.termination);
    report.detail("final_factor", field_stats(&tr.final_f));
    if let Some(note) = &tr.note {
        report.warnings.push(note.clone());
    }
    match tr.termination {
        FlowTermination::BlowUp => report.fail("flow blew up".into()),
        FlowTermination::Horizon => report
            .warnings
            .push("time horizon reached before the residual tolerance".into()),
        FlowTermination::Converged => {}
    }
    if ctx.config.output.traces {
        let path = ctx.artifact(report, "flow_trace.csv");
        write_trace(&path, &tr.rows)?;
    }
    Ok(())
}

fn rational(report: &mut Report, text: &str, pointer: &str) -> Result<Rational64, CliError> {
    let (r, warning) = parse_rational(text).map_err(|e| config_error("invalid_rational", pointer, e.to_string()))?;
    if let Some(w) = warning {
        report.warnings.push(w);
    }
    Ok(r)
}

fn bifurcate(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let block = &ctx.config.bifurcation;
    let j_max = block.j_max;
    let mut rows = Vec::new();
    let lambda_text = match (&block.lambda, &block.interval) {
        (None, None) => Some("1/4".to_string()),
        (l, _) => l.as_ref().map(|l| l.text()),
    };
    if let Some(text) = lambda_text {
        let lambda = rational(report, &text, "bifurcation.lambda")?;
        let k = kernel_families(lambda, j_max).map_err(CliError::from_core)?;
        report.quantity("kernel_dimension", k.total_dimension, None, "bifurcation");
        report.quantity("kernel_dimension_odd", k.odd, None, "bifurcation");
        report.quantity("multipliers_nonzero", k.multipliers_nonzero, None, "bifurcation");
        report.provenance(
            "multiplier_formula",
            match k.formula {
                MultiplierFormula::Exact => "exact",
                MultiplierFormula::GeneralLambdaExtension => "extension_beyond_displayed_formula",
            },
        );
        rows.push(vec![
            lambda.to_string(),
            format!("{:e}", *lambda.numer() as f64 / *lambda.denom() as f64),
            k.total_dimension.to_string(),
            k.odd.to_string(),
            (k.odd && k.multipliers_nonzero).to_string(),
        ]);
        report.detail("kernel", &k);
    }
    if let Some([a, b]) = &block.interval {
        let lo = rational(report, &a.text(), "bifurcation.interval.0")?;
        let hi = rational(report, &b.text(), "bifurcation.interval.1")?;
        let found = bifurcation_instants((lo, hi), j_max).map_err(CliError::from_core)?;
        report.quantity("kernel_points_in_interval", found.len(), None, "bifurcation");
        for c in &found {
            rows.push(vec![
                c.lambda.to_string(),
                format!("{:e}", c.lambda_value),
                c.total_dimension.to_string(),
                c.odd.to_string(),
                c.is_instant.to_string(),
            ]);
        }
        report.detail("candidates", &found);
    }
    if ctx.config.output.traces {
        let path = ctx.artifact(report, "kernel_dimension.csv");
        write_table(&path, &["lambda", "lambda_value", "total_dimension", "odd", "is_instant"], &rows)?;
    }
    Ok(())
}

fn verify(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let seed = ctx.config.seed;
    let chart = GridChart::new(2, 8).map_err(CliError::from_core)?;

    let flat = HermitianMetricField::flat(&chart, 1.0).map_err(CliError::from_core)?;
    let s = chern_scalar(&flat).sup_norm();
    report.check("flat_scalar_sup", float(s), Some(1e-12), "chern", s < 1e-12);

    hopf_checks(report, &hopf_scalar_check(100, seed).map_err(CliError::from_core)?);

    let k = kernel_families(Rational64::new(1, 4), 5).map_err(CliError::from_core)?;
    let multipliers: Vec<i64> = k.families.iter().map(|f| f.multiplier.to_integer()).collect();
    report.check(
        "kernel_dimension_quarter",
        k.total_dimension,
        None,
        "bifurcation",
        k.total_dimension == 33 && k.odd && k.multipliers_nonzero,
    );
    report.detail("kernel_quarter_multipliers", multipliers);

    // products of the metric and test-function modes reach |k| = 4, the Nyquist mode of an 8-point grid
    let fine = GridChart::new(2, 16).map_err(CliError::from_core)?;
    let metric = random_perturbed_metric(&fine, 0.3, seed).map_err(CliError::from_core)?;
    let lee = lee_form(&metric).map_err(CliError::from_core)?;
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let f = random_smooth_field(&fine, seed.wrapping_add(100 + j), 0.5);
        let diff = chern_laplacian(&metric, &f).sub(&chern_laplacian_via_lee(&metric, &lee, &f)).sup_norm();
        worst = worst.max(diff / (1.0 + c2_norm(&f)));
    }
    report.check("lee_identity_relative", float(worst), Some(1e-6), "chern", worst < 1e-6);
    Ok(())
}
