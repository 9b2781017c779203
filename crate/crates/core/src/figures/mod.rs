//! Data behind the jump-boundary and regime-switching figures: numeric and
//! closed-form value functions on a common grid, plus exercise points.

pub mod constants;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    jump_boundary_solution, reflected_straddle_solution, regime_switching_solution, sticky_straddle_solution,
};
use crate::error::Result;
use crate::generators::{bm_generator, regime_switching_generator, BmBoundary, JumpBoundarySpec, RegimeCouplingSpec};
use crate::grid::make_uniform_grid;
use crate::io::{fmt_f64, write_csv};
use crate::measure::DiscreteMeasure;
use crate::problem::StoppingProblem;
use crate::solver::{solve_value_function, PenaltyParams, ValueFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureParams {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub jump_rate: f64,
    pub jump_sizes: Vec<f64>,
    pub q1: f64,
    pub q2: f64,
    pub grid_hi: f64,
    pub grid_n: usize,
    pub solver: PenaltyParams,
}

impl Default for FigureParams {
    fn default() -> Self {
        use constants::*;
        Self {
            a: DISCOUNT,
            c1: C1,
            c2: C2,
            jump_rate: JUMP_RATE,
            jump_sizes: JUMP_SIZES.to_vec(),
            q1: Q1,
            q2: Q2,
            grid_hi: GRID_HI,
            grid_n: GRID_N,
            solver: PenaltyParams::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub label: String,
    /// Name of the exercise point, e.g. `x_s`.
    pub point: String,
    pub x: Vec<f64>,
    pub numeric: Vec<f64>,
    pub analytic: Vec<f64>,
    pub x_star_numeric: Option<f64>,
    pub x_star_analytic: f64,
    pub solver_warnings: bool,
}

impl Curve {
    pub fn max_gap(&self) -> f64 {
        self.numeric
            .iter()
            .zip(&self.analytic)
            .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureData {
    pub name: String,
    /// Header of the column identifying the curve.
    pub key: String,
    pub params: FigureParams,
    pub curves: Vec<Curve>,
}

impl FigureData {
    pub fn has_warnings(&self) -> bool {
        self.curves.iter().any(|c| c.solver_warnings)
    }

    /// Long format: one row per curve and node.
    pub fn write_values_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows = Vec::new();
        for c in &self.curves {
            for ((x, v), va) in c.x.iter().zip(&c.numeric).zip(&c.analytic) {
                rows.push(vec![c.label.clone(), fmt_f64(*x), fmt_f64(*v), fmt_f64(*va)]);
            }
        }
        write_csv(out, &format!("{},x,V,V_analytic", self.key), &rows)
    }

    pub fn write_points_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .curves
            .iter()
            .map(|c| {
                vec![
                    c.point.clone(),
                    c.label.clone(),
                    c.x_star_numeric.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(c.x_star_analytic),
                ]
            })
            .collect();
        write_csv(out, "point,curve,x_star,x_star_analytic", &rows)
    }
}

fn solve_line(boundary: &BmBoundary, p: &FigureParams) -> Result<(Vec<f64>, ValueFunction)> {
    let grid = make_uniform_grid(0.0, p.grid_hi, p.grid_n)?;
    let gen = bm_generator(&grid, boundary)?;
    let problem = StoppingProblem::straddle(gen.space(), p.a, p.c1, p.c2)?;
    let vf = solve_value_function(&gen, &problem, &p.solver)?;
    Ok((grid.nodes().to_vec(), vf))
}

/// Brownian motion on the half-line that jumps from 0 by a fixed size at
/// rate `jump_rate`, one curve per jump size.
pub fn jump_boundary_figure(p: &FigureParams) -> Result<FigureData> {
    let curves = p
        .jump_sizes
        .par_iter()
        .map(|&size| {
            let dist = DiscreteMeasure::point_mass(size)?;
            let an = jump_boundary_solution(p.a, p.jump_rate, &dist, p.c1, p.c2)?;
            let boundary = BmBoundary::Jump(JumpBoundarySpec::new(p.jump_rate, dist)?);
            let (x, vf) = solve_line(&boundary, p)?;
            Ok(Curve {
                label: format!("{size}"),
                point: format!("x_{size}"),
                analytic: x.iter().map(|&x| an.value(x)).collect(),
                numeric: vf.values().to_vec(),
                x,
                x_star_numeric: vf.exercise_point(0),
                x_star_analytic: an.x_star,
                solver_warnings: vf.has_warnings(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureData {
        name: "jump_boundary_fig".into(),
        key: "jump_size".into(),
        params: p.clone(),
        curves,
    })
}

/// Sticky BM, reflected BM, and the two regimes of the process switching
/// between them. Regime 0 is sticky at 0, regime 1 reflected.
pub fn regime_figure(p: &FigureParams) -> Result<FigureData> {
    let single = |boundary: BmBoundary| -> Result<Curve> {
        let sticky = matches!(boundary, BmBoundary::Sticky);
        let an = if sticky {
            sticky_straddle_solution(p.a, p.c1, p.c2)?
        } else {
            reflected_straddle_solution(p.a, p.c1, p.c2)?
        };
        let (x, vf) = solve_line(&boundary, p)?;
        Ok(Curve {
            label: if sticky { "sticky" } else { "reflected" }.into(),
            point: if sticky { "x_s" } else { "x_r" }.into(),
            analytic: x.iter().map(|&x| an.value(x)).collect(),
            numeric: vf.values().to_vec(),
            x,
            x_star_numeric: vf.exercise_point(0),
            x_star_analytic: an.x_star,
            solver_warnings: vf.has_warnings(),
        })
    };
    let coupled = || -> Result<Vec<Curve>> {
        let an = regime_switching_solution(p.a, p.q1, p.q2, p.c1, p.c2, 1)?;
        let grid = make_uniform_grid(0.0, p.grid_hi, p.grid_n)?;
        let blocks = [bm_generator(&grid, &BmBoundary::Sticky)?, bm_generator(&grid, &BmBoundary::Reflected)?];
        let gen = regime_switching_generator(&blocks, &RegimeCouplingSpec::two_state(p.q1, p.q2)?)?;
        let problem = StoppingProblem::straddle(gen.space(), p.a, p.c1, p.c2)?;
        let vf = solve_value_function(&gen, &problem, &p.solver)?;
        let x = grid.nodes().to_vec();
        let n = x.len();
        let curve = |r: usize, label: &str, point: &str, x_star: f64| Curve {
            label: label.into(),
            point: point.into(),
            analytic: x.iter().map(|&x| an.value(r, x)).collect(),
            numeric: vf.values()[r * n..(r + 1) * n].to_vec(),
            x: x.clone(),
            x_star_numeric: vf.exercise_point(r),
            x_star_analytic: x_star,
            solver_warnings: vf.has_warnings(),
        };
        Ok(vec![
            curve(0, "regime_sticky", "x_rs", an.x1_star),
            curve(1, "regime_reflected", "x_rr", an.x2_star),
        ])
    };
    let ((s, r), c) = rayon::join(
        || rayon::join(|| single(BmBoundary::Sticky), || single(BmBoundary::Reflected)),
        coupled,
    );
    let mut curves = vec![s?];
    curves.extend(c?);
    curves.push(r?);
    Ok(FigureData {
        name: "regime_fig".into(),
        key: "curve".into(),
        params: p.clone(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> FigureParams {
        FigureParams {
            grid_n: 241,
            ..FigureParams::default()
        }
    }

    #[test]
    fn regime_points_are_ordered() {
        let fig = regime_figure(&coarse()).unwrap();
        let labels: Vec<_> = fig.curves.iter().map(|c| c.point.as_str()).collect();
        assert_eq!(labels, ["x_s", "x_rs", "x_rr", "x_r"]);
        let pts: Vec<f64> = fig.curves.iter().map(|c| c.x_star_analytic).collect();
        assert!(pts.windows(2).all(|w| w[0] <= w[1]));
        assert!(!fig.has_warnings());
    }

    #[test]
    fn points_csv_layout() {
        let fig = jump_boundary_figure(&coarse()).unwrap();
        let mut buf = Vec::new();
        fig.write_points_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "point,curve,x_star,x_star_analytic");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("x_0.5,0.5,"));
    }
}
