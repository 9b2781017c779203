//! Subcommand implementations. Each returns the process exit code.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use feller_stop::analytic::{
    jump_boundary_solution, reflected_straddle_solution, regime_switching_solution, sticky_straddle_solution,
};
use feller_stop::figures::{jump_boundary_figure, regime_figure, FigureData, FigureParams};
use feller_stop::generators::{compound_poisson_generator, Hazard};
use feller_stop::io::{fmt_f64, write_csv};
use feller_stop::mc::{
    agreement_check, martingale_check, perturbed_region_suboptimality, simulate_stopped_value, McReport, SimConfig,
};
use feller_stop::space::Layout;
use feller_stop::{solve_value_function, stopping_rule, validate_generator, ValueFunction};
use serde::Serialize;
use serde_json::json;

use crate::build::{build, measure, Experiment};
use crate::config::{ExperimentConfig, PayoffSpec, ProcessSpec, SimpleBoundary};
use crate::{ValidationError, EXIT_FAILED, EXIT_OK, EXIT_WARNING};

/// Settings shared by all subcommands.
#[derive(Clone, Debug, Default)]
pub struct RunContext {
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub quiet: bool,
}

impl RunContext {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// `--out`, then the config's `outputs`, then `FELLER_STOP_OUT`, then `out`.
pub fn output_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.outputs.clone()))
        .or_else(|| std::env::var_os("FELLER_STOP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))
}

fn write_region(dir: &Path, vf: &ValueFunction) -> Result<()> {
    let space = vf.v.space();
    let header = space.csv_header().replace("value", "stop");
    let rows: Vec<Vec<String>> = (0..space.len())
        .map(|i| {
            let st = space.state(i);
            let mut row = Vec::with_capacity(3);
            match space.layout() {
                Layout::Line => {}
                Layout::Regimes => row.push(st.line.to_string()),
                Layout::ClockSpace => row.push(fmt_f64(st.clock.unwrap_or(0.0))),
            }
            row.push(fmt_f64(st.x));
            row.push(u8::from(vf.stopping_mask[i]).to_string());
            row
        })
        .collect();
    write_csv(create(dir, "region.csv")?, &header, &rows)?;
    Ok(())
}

fn grid_n(cfg: &ExperimentConfig, ctx: &RunContext) -> usize {
    ctx.grid_n.unwrap_or(cfg.grid.n)
}

fn report_warnings(ctx: &RunContext, vf: &ValueFunction) {
    for w in &vf.diagnostics.warnings {
        eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
    if vf.has_warnings() {
        ctx.note("solver finished with warnings; outputs are best effort");
    }
}

pub fn solve(cfg: &ExperimentConfig, out: &Path, ctx: &RunContext) -> Result<i32> {
    let n = grid_n(cfg, ctx);
    let ex = build(cfg, n)?;
    ctx.note(format!("solving {} on {} states", cfg.process.tag(), ex.generator.dim()));
    let vf = solve_value_function(&ex.generator, &ex.problem, &cfg.solver)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    vf.v.write_csv(create(out, "value.csv")?)?;
    let summary: serde_json::Value = serde_json::from_str(&vf.summary_json()?)?;
    write_json(out, "solve.json", &json!({ "config": cfg, "grid_n": n, "result": summary }))?;
    write_region(out, &vf)?;
    report_warnings(ctx, &vf);
    ctx.note(format!("wrote value.csv, solve.json, region.csv to {}", out.display()));
    Ok(if vf.has_warnings() { EXIT_WARNING } else { EXIT_OK })
}

pub fn validate(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<i32> {
    let ex = build(cfg, grid_n(cfg, ctx))?;
    let report = validate_generator(&ex.generator);
    if !report.is_valid() {
        return Err(ValidationError(format!("process: {}", report.summary())).into());
    }
    if !ctx.quiet {
        println!(
            "{}: {} states, conservative = {}; {}",
            cfg.process.tag(),
            ex.generator.dim(),
            ex.generator.is_conservative(),
            report.summary()
        );
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureName {
    #[value(name = "jump_boundary_fig")]
    JumpBoundary,
    #[value(name = "regime_fig")]
    Regime,
}

const REGIME_README: &str = "\
# regime_fig

`regime_fig.csv` holds four value curves on a common grid, in long format
(`curve,x,V,V_analytic`):

- `sticky`: Brownian motion sticky at 0
- `regime_sticky`: the switching process while in its sticky regime (regime 0)
- `regime_reflected`: the switching process while in its reflected regime (regime 1)
- `reflected`: Brownian motion reflected at 0

`regime_fig_points.csv` lists the exercise points `x_s`, `x_rs`, `x_rr`, `x_r`
of the same curves, numeric and closed form.

Curve names follow the boundary condition of each regime. Some descriptions
of this example number the regimes the other way round (calling the reflected
one regime 1); only the labels differ, not the data.
";

const JUMP_README: &str = "\
# jump_boundary_fig

`jump_boundary_fig.csv` holds one value curve per jump size in long format
(`jump_size,x,V,V_analytic`) for Brownian motion that jumps away from 0 at
rate `jump_rate`. `jump_boundary_fig_points.csv` lists the exercise points.
";

fn write_figure(fig: &FigureData, out: &Path, readme: &str) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fig.write_values_csv(create(out, &format!("{}.csv", fig.name))?)?;
    fig.write_points_csv(create(out, &format!("{}_points.csv", fig.name))?)?;
    let gaps: Vec<_> = fig
        .curves
        .iter()
        .map(|c| json!({ "curve": c.label, "max_gap": c.max_gap(), "solver_warnings": c.solver_warnings }))
        .collect();
    write_json(out, &format!("{}.json", fig.name), &json!({ "params": fig.params, "curves": gaps }))?;
    fs::write(out.join("README.md"), readme)?;
    Ok(())
}

pub fn figure(name: FigureName, params: Option<&Path>, out: &Path, ctx: &RunContext) -> Result<i32> {
    let mut p = match params {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<FigureParams>(&text).map_err(|e| ValidationError(format!("figure params: {e}")))?
        }
        None => FigureParams::default(),
    };
    if let Some(n) = ctx.grid_n {
        p.grid_n = n;
    }
    let (fig, readme) = match name {
        FigureName::JumpBoundary => (jump_boundary_figure(&p), JUMP_README),
        FigureName::Regime => (regime_figure(&p), REGIME_README),
    };
    let fig = fig.map_err(|e| ValidationError(format!("figure: {e}")))?;
    write_figure(&fig, out, readme)?;
    for c in &fig.curves {
        ctx.note(format!(
            "{:>18}  x* = {} (closed form {:.6})  max |V - V_analytic| = {:.2e}",
            c.point,
            c.x_star_numeric.map_or("none".into(), |x| format!("{x:.6}")),
            c.x_star_analytic,
            c.max_gap()
        ));
    }
    Ok(if fig.has_warnings() { EXIT_WARNING } else { EXIT_OK })
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

fn record(name: impl Into<String>, value: f64, threshold: f64) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        pass: value <= threshold,
        value,
        threshold,
    }
}

/// Closed-form value per line and exercise point per line, where one exists.
type ClosedForm = (Box<dyn Fn(usize, f64) -> f64>, Vec<f64>);

fn closed_form(cfg: &ExperimentConfig, h: f64) -> Result<Option<ClosedForm>> {
    let PayoffSpec::CallSpread { c1, c2 } = cfg.payoff else {
        return Ok(None);
    };
    if cfg.running_reward != 0.0 || cfg.grid.lo != 0.0 {
        return Ok(None);
    }
    let a = cfg.discount_a;
    Ok(match &cfg.process {
        ProcessSpec::ReflectedBm | ProcessSpec::StickyBm => {
            let s = if matches!(cfg.process, ProcessSpec::ReflectedBm) {
                reflected_straddle_solution(a, c1, c2)?
            } else {
                sticky_straddle_solution(a, c1, c2)?
            };
            let x = s.x_star;
            Some((Box::new(move |_, t| s.value(t)), vec![x]))
        }
        ProcessSpec::JumpBoundaryBm { lambda_rate, jump_dist } => {
            let s = jump_boundary_solution(a, *lambda_rate, &measure(jump_dist, h)?, c1, c2)?;
            let x = s.x_star;
            Some((Box::new(move |_, t| s.value(t)), vec![x]))
        }
        ProcessSpec::RegimeSwitching { regimes, q }
            if regimes == &[SimpleBoundary::Sticky, SimpleBoundary::Reflected] && q[0][1] > 0.0 && q[1][0] > 0.0 =>
        {
            let s = regime_switching_solution(a, q[0][1], q[1][0], c1, c2, 1)?;
            let pts = vec![s.x1_star, s.x2_star];
            Some((Box::new(move |r, t| s.value(r, t)), pts))
        }
        _ => None,
    })
}

fn analytic_checks(cfg: &ExperimentConfig, ex: &Experiment, vf: &ValueFunction, checks: &mut Vec<CheckRecord>) -> Result<Option<f64>> {
    let h = ex.grid.step();
    let Some((value, points)) = closed_form(cfg, h)? else {
        return Ok(None);
    };
    let nx = ex.grid.len();
    let xs = ex.grid.nodes();
    let sup = vf
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - value(k / nx, xs[k % nx])).abs())
        .fold(0.0, f64::max);
    checks.push(record("solver_vs_analytic_sup", sup, 5e-3));
    for (line, x) in points.iter().enumerate() {
        let dx = vf.exercise_point(line).map_or(f64::INFINITY, |n| (n - x).abs());
        checks.push(record(format!("exercise_point_line{line}"), dx, 2.0 * h));
    }
    Ok(Some(sup))
}

fn semi_markov_checks(cfg: &ExperimentConfig, ex: &Experiment, vf: &ValueFunction, checks: &mut Vec<CheckRecord>) -> Result<()> {
    let ProcessSpec::SemiMarkov {
        hazard: Hazard::Constant { rate },
        jump_dist,
        ..
    } = &cfg.process
    else {
        return Ok(());
    };
    let cp = compound_poisson_generator(&ex.grid, *rate, &measure(jump_dist, ex.grid.step())?)?;
    let problem = feller_stop::StoppingProblem::new(
        cfg.discount_a,
        feller_stop::SampledFunction::constant(cp.space().clone(), cfg.running_reward),
        feller_stop::SampledFunction::new(cp.space().clone(), ex.problem.terminal().values()[..ex.grid.len()].to_vec())?,
    )?;
    let vc = solve_value_function(&cp, &problem, &cfg.solver)?;
    let nx = ex.grid.len();
    let lines = vf.values().len() / nx;
    let (mut variation, mut mismatch) = (0.0f64, 0.0f64);
    for i in 0..nx {
        let col: Vec<f64> = (0..lines).map(|k| vf.values()[k * nx + i]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        variation = variation.max(hi - lo);
        mismatch = mismatch.max(col.iter().map(|v| (v - vc.values()[i]).abs()).fold(0.0, f64::max));
    }
    checks.push(record("clock_variation", variation, 1e-6));
    checks.push(record("lift_vs_compound_poisson", mismatch, 1e-4));
    Ok(())
}

fn mc_checks(cfg: &ExperimentConfig, ctx: &RunContext, checks: &mut Vec<CheckRecord>) -> Result<Option<Vec<McReport>>> {
    let Some(mc) = &cfg.mc else {
        return Ok(None);
    };
    let ex = build(cfg, mc.grid_n)?;
    let vf = solve_value_function(&ex.generator, &ex.problem, &cfg.solver)?;
    let sim = SimConfig {
        n_paths: mc.n_paths,
        t_max: mc.t_max.unwrap_or_else(|| SimConfig::horizon_for(&ex.problem, mc.target_se)),
        seed: ctx.seed.unwrap_or(mc.seed),
        antithetic: mc.antithetic,
    };
    ctx.note(format!(
        "simulating {} paths on {} states (t_max {:.1})",
        sim.n_paths,
        ex.generator.dim(),
        sim.t_max
    ));
    let region = stopping_rule(&vf);
    let starts: Vec<usize> = mc.start_x.iter().map(|&x| ex.grid.nearest_index(x)).collect();
    let mut reports = Vec::new();
    let mut value_checks = Vec::new();
    let mut first = None;
    for &s in &starts {
        let est = simulate_stopped_value(&ex.generator, &ex.problem, &region, s, &sim)?;
        value_checks.push(agreement_check(&format!("mc_value_node{s}"), &est, vf.values()[s]));
        first.get_or_insert(est);
    }
    let est = first.expect("at least one start point");
    reports.push(McReport {
        mean: est.mean,
        std_error: est.std_error,
        n_paths: est.n_paths,
        bias_bound: est.truncation_bias_bound,
        checks: value_checks,
        checkpoints: Vec::new(),
    });
    reports.push(martingale_check(&ex.generator, &ex.problem, &vf, starts[0], &mc.checkpoints, &sim)?);
    for shift in [mc.shift, -mc.shift] {
        reports.push(perturbed_region_suboptimality(&ex.generator, &ex.problem, &vf, shift, starts[0], &sim)?);
    }
    for c in reports.iter().flat_map(|r| &r.checks) {
        checks.push(CheckRecord {
            name: c.name.clone(),
            pass: c.pass,
            value: -c.margin,
            threshold: 0.0,
        });
    }
    Ok(Some(reports))
}

pub fn crosscheck(cfg: &ExperimentConfig, out: &Path, ctx: &RunContext) -> Result<i32> {
    let ex = build(cfg, grid_n(cfg, ctx))?;
    ctx.note(format!("solving {} on {} states", cfg.process.tag(), ex.generator.dim()));
    let vf = solve_value_function(&ex.generator, &ex.problem, &cfg.solver)?;
    let mut checks = vec![CheckRecord {
        name: "solver_converged".into(),
        pass: !vf.has_warnings(),
        value: vf.diagnostics.warnings.len() as f64,
        threshold: 0.0,
    }];
    let sup = analytic_checks(cfg, &ex, &vf, &mut checks)?;
    semi_markov_checks(cfg, &ex, &vf, &mut checks)?;
    let mc = mc_checks(cfg, ctx, &mut checks)?;
    let pass = checks.iter().all(|c| c.pass);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(
        out,
        "crosscheck.json",
        &json!({
            "process": cfg.process.tag(),
            "grid_n": ex.grid.len(),
            "pass": pass,
            "solver_vs_analytic_sup": sup,
            "checks": checks,
            "mc": mc,
        }),
    )?;
    for c in &checks {
        ctx.note(format!(
            "{} {:<28} {:.3e} (limit {:.1e})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        ));
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}
