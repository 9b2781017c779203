//! Acceptance criteria P1-P10. Each prints one PASS/FAIL line; the criteria
//! run one after another so that their wall-clock budgets are meaningful.

mod common;

use std::time::{Duration, Instant};

use common::*;
use feller_stop::figures::{jump_boundary_figure, regime_figure, FigureParams};
use feller_stop::generators::*;
use feller_stop::mc::*;
use feller_stop::solver::*;
use feller_stop::analytic::reflected_straddle_solution;
use feller_stop::*;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn run(id: &str, title: &str, budget_s: u64, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= Duration::from_secs(budget_s);
    let pass = v.pass && in_time;
    println!(
        "{id} {} {title}: {} [{:.2} s of {budget_s} s]",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn p1_contraction() -> Verdict {
    let g = bm_generator(&line(0.0, 10.0, 801), &BmBoundary::Reflected).unwrap();
    let p = straddle(&g);
    let mut r = rng(1);
    let mut worst = f64::NEG_INFINITY;
    for lambda in [1.0, 10.0, 100.0] {
        let z = PicardMap::new(&g, &p, lambda).unwrap();
        let q = lambda / (0.1 + lambda);
        for _ in 0..100 {
            let scale = 10f64.powf(r.random_range(-2.0..2.0));
            let w1 = random_vec(&mut r, g.dim(), scale);
            let w2 = random_vec(&mut r, g.dim(), scale);
            let lhs = sup_diff(&z.apply(&w1).unwrap(), &z.apply(&w2).unwrap());
            worst = worst.max(lhs - q * sup_diff(&w1, &w2) - 1e-12);
        }
    }
    verdict(worst <= 0.0, format!("max of |Zw1-Zw2| - q|w1-w2| - 1e-12 = {worst:.3e} over 300 pairs"))
}

fn p2_resolvent_algebra() -> Verdict {
    let mut r = rng(2);
    let mut worst_id = 0.0f64;
    let mut worst_bound = f64::NEG_INFINITY;
    let fx = fixtures();
    for (_, g) in &fx {
        let lambdas = [0.1, 1.0, 10.0];
        let res: Vec<Resolvent> = lambdas.iter().map(|&l| Resolvent::new(g, l).unwrap()).collect();
        for _ in 0..20 {
            let h = random_vec(&mut r, g.dim(), 1.0);
            let u: Vec<Vec<f64>> = res.iter().map(|rl| rl.solve(&h).unwrap()).collect();
            for (k, l) in lambdas.iter().enumerate() {
                worst_bound = worst_bound.max(sup(&u[k]) - sup(&h) / l);
            }
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let (l, m) = (lambdas[i], lambdas[j]);
                let lhs: Vec<f64> = u[i].iter().zip(&u[j]).map(|(a, b)| a - b).collect();
                let rr = res[i].solve(&u[j]).unwrap();
                let rhs: Vec<f64> = rr.iter().map(|x| (m - l) * x).collect();
                worst_id = worst_id.max(sup_diff(&lhs, &rhs));
            }
        }
    }
    verdict(
        worst_id <= 1e-10 && worst_bound <= 1e-10,
        format!(
            "{} families: identity error {worst_id:.3e}, max |R h| - |h|/lambda = {worst_bound:.3e}",
            fx.len()
        ),
    )
}

fn p3_reflected_oracle() -> Verdict {
    let an = reflected_straddle_solution(0.1, 1.0, 4.0).unwrap();
    let mut errs = Vec::new();
    let mut offsets = Vec::new();
    let mut ok = true;
    for n in [961, 1921] {
        let grid = line(0.0, 12.0, n);
        let g = bm_generator(&grid, &BmBoundary::Reflected).unwrap();
        let vf = solve_value_function(&g, &straddle(&g), &PenaltyParams::default()).unwrap();
        let err = grid.nodes().iter().zip(vf.values()).map(|(x, v)| (v - an.value(*x)).abs()).fold(0.0, f64::max);
        let dx = vf.exercise_point(0).map_or(f64::INFINITY, |x| (x - an.x_star).abs());
        ok &= dx <= 2.0 * grid.step() && !vf.has_warnings();
        errs.push(err);
        offsets.push(dx);
    }
    let ratio = errs[0] / errs[1];
    verdict(
        ok && errs[0] <= 5e-3 && ratio >= 1.5,
        format!(
            "sup error {:.3e} (h=0.0125), {:.3e} (h=0.00625), ratio {ratio:.2}; |dx*| {:.2e}, {:.2e}",
            errs[0], errs[1], offsets[0], offsets[1]
        ),
    )
}

fn p4_penalty_rate() -> Verdict {
    let g = bm_generator(&line(0.0, 10.0, 801), &BmBoundary::Reflected).unwrap();
    let s = g.space().clone();
    let p = StoppingProblem::new(
        0.1,
        SampledFunction::zeros(s.clone()),
        SampledFunction::from_x_fn(s.clone(), |x| (-x * x).exp()).unwrap(),
    )
    .unwrap();
    let params = PenaltyParams::default();
    let zero = SampledFunction::zeros(s);
    let solve = |l: f64| penalty_fixed_point(&g, &p, l, &zero, &params).unwrap().v.into_values();
    let reference = solve(1e4);
    let scaled: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
        .iter()
        .map(|&l| (0.1 + l) * sup_diff(&solve(l), &reference))
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / hi;
    verdict(spread < 0.3, format!("(a+lambda)|v - V_ref| = {scaled:.4?}, spread {:.1}%", 100.0 * spread))
}

fn p5_jump_figure() -> Verdict {
    let fig = jump_boundary_figure(&FigureParams::default()).unwrap();
    let h = fig.curves[0].x[1] - fig.curves[0].x[0];
    let gap = fig.curves.iter().map(|c| c.max_gap()).fold(0.0, f64::max);
    let dx = fig
        .curves
        .iter()
        .map(|c| c.x_star_numeric.map_or(f64::INFINITY, |x| (x - c.x_star_analytic).abs()))
        .fold(0.0, f64::max);
    let mut monotone = true;
    for w in fig.curves.windows(2) {
        monotone &= w[0].numeric.iter().zip(&w[1].numeric).all(|(a, b)| *a <= b + 1e-8);
        monotone &= w[0].analytic.iter().zip(&w[1].analytic).all(|(a, b)| *a <= b + 1e-12);
        monotone &= w[0].x_star_numeric <= w[1].x_star_numeric;
        monotone &= w[0].x_star_analytic <= w[1].x_star_analytic;
    }
    let pts: Vec<String> = fig
        .curves
        .iter()
        .map(|c| format!("{}: {:.4}", c.label, c.x_star_analytic))
        .collect();
    verdict(
        monotone && gap <= 5e-3 && dx <= 2.0 * h && !fig.has_warnings(),
        format!("monotone {monotone}, sup |V_num - V_an| {gap:.2e}, max |dx*| {dx:.2e}; x* {}", pts.join(", ")),
    )
}

fn p6_regime_figure() -> Verdict {
    let fig = regime_figure(&FigureParams::default()).unwrap();
    let mut ordered = true;
    for w in fig.curves.windows(2) {
        ordered &= w[0].numeric.iter().zip(&w[1].numeric).all(|(a, b)| *a <= b + 5e-3);
        ordered &= w[0].x_star_numeric <= w[1].x_star_numeric;
        ordered &= w[0].x_star_analytic <= w[1].x_star_analytic;
    }
    let v0 = fig.curves[0].numeric[0].abs();
    let tol = fig.params.solver.outer_stop_tol;
    let gap = fig.curves.iter().map(|c| c.max_gap()).fold(0.0, f64::max);
    let pts: Vec<String> = fig
        .curves
        .iter()
        .map(|c| format!("{} {:.4}", c.point, c.x_star_numeric.unwrap_or(f64::NAN)))
        .collect();
    verdict(
        ordered && v0 <= tol && !fig.has_warnings(),
        format!("ordered {ordered}, |V_sticky(0)| {v0:.1e}, sup |V_num - V_an| {gap:.2e}; {}", pts.join(", ")),
    )
}

fn p7_monte_carlo() -> Verdict {
    let g = bm_generator(&line(0.0, 12.0, 61), &BmBoundary::Reflected).unwrap();
    let p = straddle(&g);
    let vf = solve_value_function(&g, &p, &PenaltyParams::default()).unwrap();
    let cfg = SimConfig {
        n_paths: 200_000,
        t_max: SimConfig::horizon_for(&p, 1e-3),
        seed: 20_260_101,
        antithetic: false,
    };
    let region = stopping_rule(&vf);
    let mut checks = Vec::new();
    for start in [0, 4, 8, 12, 16] {
        let est = simulate_stopped_value(&g, &p, &region, start, &cfg).unwrap();
        checks.push(agreement_check(&format!("value_node{start}"), &est, vf.values()[start]));
    }
    checks.extend(martingale_check(&g, &p, &vf, 8, &[1.0, 5.0, 20.0], &cfg).unwrap().checks);
    for shift in [8, -8] {
        checks.extend(perturbed_region_suboptimality(&g, &p, &vf, shift, 8, &cfg).unwrap().checks);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let min_margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    verdict(
        failed.is_empty(),
        format!("{} checks, smallest margin {min_margin:.2e}, failed {failed:?}", checks.len()),
    )
}

fn p8_semi_markov() -> Verdict {
    let x = line(0.0, 12.0, 121);
    let jumps = exp_jumps(x.step());
    let hazard = Hazard::Constant { rate: 1.0 };
    let s_max = clock_horizon(&hazard, 1e-6, 1e3);
    let n_clock = (s_max / 0.25).ceil() as usize + 1;
    let spec = SemiMarkovSpec {
        hazard,
        jump_dist: jumps.clone(),
        clock_grid: line(0.0, s_max, n_clock),
    };
    let lift = semi_markov_lift_generator(&x, &spec).unwrap();
    let vl = solve_value_function(&lift, &straddle(&lift), &PenaltyParams::default()).unwrap();
    let cp = compound_poisson_generator(&x, 1.0, &jumps).unwrap();
    let vc = solve_value_function(&cp, &straddle(&cp), &PenaltyParams::default()).unwrap();
    let nx = x.len();
    let v = vl.values();
    let mut variation = 0.0f64;
    let mut mismatch = 0.0f64;
    for i in 0..nx {
        let col: Vec<f64> = (0..n_clock).map(|k| v[k * nx + i]).collect();
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        variation = variation.max(hi - lo);
        mismatch = mismatch.max(col.iter().map(|y| (y - vc.values()[i]).abs()).fold(0.0, f64::max));
    }
    verdict(
        variation <= 1e-6 && mismatch <= 1e-4 && !vl.has_warnings(),
        format!("{n_clock} clock nodes to s={s_max:.2}: clock variation {variation:.2e}, vs compound Poisson {mismatch:.2e}"),
    )
}

fn p9_absorbing() -> Verdict {
    let g = bm_generator(&line(0.0, 12.0, 241), &BmBoundary::Sticky).unwrap();
    let s = g.space().clone();
    let mut r = rng(9);
    let params = PenaltyParams::default();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = r.random_range(0.05..1.0);
        let f = random_vec(&mut r, g.dim(), 1.0);
        let gv = random_vec(&mut r, g.dim(), 3.0);
        let p = StoppingProblem::new(
            a,
            SampledFunction::new(s.clone(), f.clone()).unwrap(),
            SampledFunction::new(s.clone(), gv.clone()).unwrap(),
        )
        .unwrap();
        let vf = solve_value_function(&g, &p, &params).unwrap();
        worst = worst.max((vf.values()[0] - (f[0] / a).max(gv[0])).abs());
    }
    verdict(worst <= params.outer_stop_tol, format!("max |V(0) - max(f(0)/a, g(0))| = {worst:.2e} over 10 fixtures"))
}

fn p10_complementarity() -> Verdict {
    let params = PenaltyParams::default();
    let bound = 10.0 * params.outer_stop_tol;
    let mut worst = 0.0f64;
    let mut worst_name = "";
    let fx = fixtures();
    for (name, g) in &fx {
        let p = straddle(g);
        let vf = solve_value_function(g, &p, &params).unwrap();
        let r = sup(&complementarity_residual(g, &p, vf.values()));
        if r > worst {
            worst = r;
            worst_name = name;
        }
    }
    verdict(worst <= bound, format!("{} fixtures, worst residual {worst:.2e} ({worst_name})", fx.len()))
}

#[test]
fn acceptance_criteria() {
    let results = [
        run("P1", "contraction", 5, p1_contraction),
        run("P2", "resolvent algebra", 30, p2_resolvent_algebra),
        run("P3", "reflected straddle oracle", 30, p3_reflected_oracle),
        run("P4", "penalty rate", 20, p4_penalty_rate),
        run("P5", "jump-boundary monotonicity", 60, p5_jump_figure),
        run("P6", "regime-switching ordering", 60, p6_regime_figure),
        run("P7", "Monte Carlo three-way", 120, p7_monte_carlo),
        run("P8", "semi-Markov degeneracy", 60, p8_semi_markov),
        run("P9", "absorbing formula", 10, p9_absorbing),
        run("P10", "complementarity", 60, p10_complementarity),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
