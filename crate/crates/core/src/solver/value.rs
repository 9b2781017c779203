use std::sync::Arc;

use serde::Serialize;

use super::penalty::{check_spaces, run_stage, PenaltyParams, WarmStart};
use crate::error::{Error, Result};
use crate::function::{max_abs_diff, SampledFunction};
use crate::generators::GeneratorMatrix;
use crate::problem::StoppingProblem;
use crate::space::{Layout, StateSpace};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageDiagnostics {
    pub lambda: f64,
    pub inner_iterations: usize,
    pub final_update_norm: f64,
    /// Sup distance to the previous stage.
    pub stage_difference: Option<f64>,
    /// `max (g - v)^+`, an upper bound on `V - v` for this stage.
    pub obstacle_gap: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveWarning {
    StageNotConverged { lambda: f64, final_update_norm: f64 },
    ScheduleExhausted { last_difference: Option<f64>, obstacle_gap: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Continuation on the left, stopping on the right.
    StopAbove,
    StopBelow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExerciseBoundary {
    pub line: usize,
    pub x: f64,
    pub direction: Direction,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub stages: Vec<StageDiagnostics>,
    pub warnings: Vec<SolveWarning>,
}

#[derive(Clone, Debug)]
pub struct ValueFunction {
    pub v: SampledFunction,
    pub stopping_mask: Vec<bool>,
    pub exercise_boundaries: Vec<ExerciseBoundary>,
    pub contact_tol: f64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    lambda_schedule: Vec<f64>,
    per_stage_update_norms: Vec<f64>,
    stages: &'a [StageDiagnostics],
    contact_tol: f64,
    boundaries: &'a [ExerciseBoundary],
    warnings: &'a [SolveWarning],
}

impl ValueFunction {
    pub fn has_warnings(&self) -> bool {
        !self.diagnostics.warnings.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        self.v.values()
    }

    /// Boundaries on one line (regime or clock node), sorted by `x`.
    pub fn boundaries_on(&self, line: usize) -> Vec<f64> {
        self.exercise_boundaries
            .iter()
            .filter(|b| b.line == line)
            .map(|b| b.x)
            .collect()
    }

    /// Largest boundary on `line` above which the rule stops.
    pub fn exercise_point(&self, line: usize) -> Option<f64> {
        self.exercise_boundaries
            .iter()
            .filter(|b| b.line == line && b.direction == Direction::StopAbove)
            .map(|b| b.x)
            .last()
    }

    pub fn summary_json(&self) -> Result<String> {
        let s = SolveSummary {
            lambda_schedule: self.diagnostics.stages.iter().map(|s| s.lambda).collect(),
            per_stage_update_norms: self.diagnostics.stages.iter().map(|s| s.final_update_norm).collect(),
            stages: &self.diagnostics.stages,
            contact_tol: self.contact_tol,
            boundaries: &self.exercise_boundaries,
            warnings: &self.diagnostics.warnings,
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

/// λ-continuation: penalty stages along the schedule, each warm-started from
/// the previous one.
///
/// Stops once consecutive stages differ by at most `outer_stop_tol` and the
/// obstacle gap `max (g - v)^+` is below it too; the gap bounds `V - v` from
/// above, so the returned values are within `outer_stop_tol` of the discrete
/// value function.
pub fn solve_value_function(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    params: &PenaltyParams,
) -> Result<ValueFunction> {
    params.validate()?;
    check_spaces(gen, problem)?;
    let g = problem.terminal().values();
    let mut w = match params.warm_start {
        WarmStart::Zero => vec![0.0; g.len()],
        WarmStart::Terminal => g.to_vec(),
    };
    let mut diagnostics = SolveDiagnostics::default();
    let mut prev: Option<Vec<f64>> = None;
    let mut done = false;
    let mut last_diff = None;
    let mut gap = f64::INFINITY;
    for lambda in params.schedule(problem.discount()) {
        let (sol, converged) = run_stage(gen, problem, lambda, &w, params)?;
        let v = sol.v.into_values();
        let diff = prev.as_ref().map(|p| max_abs_diff(p, &v));
        gap = g.iter().zip(&v).fold(0.0_f64, |m, (gi, vi)| m.max(gi - vi));
        diagnostics.stages.push(StageDiagnostics {
            lambda,
            inner_iterations: sol.inner_iterations,
            final_update_norm: sol.final_update_norm,
            stage_difference: diff,
            obstacle_gap: gap,
            converged,
        });
        if !converged {
            diagnostics.warnings.push(SolveWarning::StageNotConverged {
                lambda,
                final_update_norm: sol.final_update_norm,
            });
        }
        last_diff = diff;
        w = v;
        if converged
            && diff.is_some_and(|d| d <= params.outer_stop_tol)
            && gap <= params.outer_stop_tol
        {
            done = true;
            break;
        }
        prev = Some(w.clone());
    }
    if !done {
        diagnostics.warnings.push(SolveWarning::ScheduleExhausted {
            last_difference: last_diff,
            obstacle_gap: gap,
        });
    }
    let contact_tol = 10.0 * params.outer_stop_tol;
    let v = SampledFunction::new(problem.space().clone(), w)?;
    let stopping_mask: Vec<bool> = v.values().iter().zip(g).map(|(vi, gi)| vi - gi <= contact_tol).collect();
    let exercise_boundaries = boundaries(problem.space(), &stopping_mask);
    Ok(ValueFunction {
        v,
        stopping_mask,
        exercise_boundaries,
        contact_tol,
        diagnostics,
    })
}

fn boundaries(space: &StateSpace, mask: &[bool]) -> Vec<ExerciseBoundary> {
    let xs = space.grid().nodes();
    let mut out = Vec::new();
    for line in 0..space.line_count() {
        let idx = space.line_indices(line);
        let m = &mask[idx];
        for i in 1..m.len() {
            if m[i] != m[i - 1] {
                out.push(ExerciseBoundary {
                    line,
                    x: 0.5 * (xs[i - 1] + xs[i]),
                    direction: if m[i] { Direction::StopAbove } else { Direction::StopBelow },
                });
            }
        }
    }
    out
}

/// Set of states where the rule stops.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingRegion {
    space: Arc<StateSpace>,
    mask: Vec<bool>,
}

impl StoppingRegion {
    pub fn new(space: Arc<StateSpace>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: mask.len(),
            });
        }
        Ok(Self { space, mask })
    }

    pub fn everywhere(space: Arc<StateSpace>) -> Self {
        let mask = vec![true; space.len()];
        Self { space, mask }
    }

    pub fn nowhere(space: Arc<StateSpace>) -> Self {
        let mask = vec![false; space.len()];
        Self { space, mask }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    /// Moves the region `k` nodes toward larger `x` on every line.
    ///
    /// Node `i` takes the old value at `i - k`, clamped to the line ends.
    pub fn shifted(&self, k: i64) -> Self {
        let n = self.space.grid().len() as i64;
        let mut mask = vec![false; self.mask.len()];
        for line in 0..self.space.line_count() {
            let base = self.space.index(line, 0);
            for i in 0..n {
                let src = (i - k).clamp(0, n - 1);
                mask[base + i as usize] = self.mask[base + src as usize];
            }
        }
        Self {
            space: self.space.clone(),
            mask,
        }
    }

    /// For clock × space layouts: per space node, the smallest clock value at
    /// which the rule stops, `None` if it never does.
    pub fn clock_threshold(&self) -> Option<Vec<Option<f64>>> {
        if self.space.layout() != Layout::ClockSpace {
            return None;
        }
        let clock = self.space.clock()?.nodes();
        let nx = self.space.grid().len();
        Some(
            (0..nx)
                .map(|i| {
                    (0..clock.len())
                        .find(|&k| self.mask[self.space.index(k, i)])
                        .map(|k| clock[k])
                })
                .collect(),
        )
    }
}

/// The optimal rule: stop on first entry to `{v - g <= contact_tol}`.
pub fn stopping_rule(vf: &ValueFunction) -> StoppingRegion {
    StoppingRegion {
        space: vf.v.space().clone(),
        mask: vf.stopping_mask.clone(),
    }
}

/// `min(a v - G v - f, v - g)` per state.
pub fn complementarity_residual(gen: &GeneratorMatrix, problem: &StoppingProblem, v: &[f64]) -> Vec<f64> {
    let gv = gen.apply(v);
    let a = problem.discount();
    v.iter()
        .zip(&gv)
        .zip(problem.running().values())
        .zip(problem.terminal().values())
        .map(|(((vi, gvi), f), g)| (a * vi - gvi - f).min(vi - g))
        .collect()
}

/// `a v - G v - f - λ (g - v)^+` per state.
pub fn penalty_residual(gen: &GeneratorMatrix, problem: &StoppingProblem, lambda: f64, v: &[f64]) -> Vec<f64> {
    let gv = gen.apply(v);
    let a = problem.discount();
    v.iter()
        .zip(&gv)
        .zip(problem.running().values())
        .zip(problem.terminal().values())
        .map(|(((vi, gvi), f), g)| a * vi - gvi - f - lambda * (g - vi).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bm_generator, BmBoundary};
    use crate::grid::make_uniform_grid;

    #[test]
    fn dominating_constant_stops_everywhere() {
        let gen = bm_generator(&make_uniform_grid(0.0, 5.0, 51).unwrap(), &BmBoundary::Reflected).unwrap();
        let s = gen.space().clone();
        let p = StoppingProblem::new(
            0.5,
            SampledFunction::constant(s.clone(), 0.2),
            SampledFunction::constant(s.clone(), 1.0),
        )
        .unwrap();
        let vf = solve_value_function(&gen, &p, &PenaltyParams::default()).unwrap();
        assert!(!vf.has_warnings());
        assert!(vf.stopping_mask.iter().all(|&m| m));
        assert!(vf.exercise_boundaries.is_empty());
        for &v in vf.values() {
            assert!((v - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn shifting_moves_the_boundary() {
        let space = Arc::new(StateSpace::line(make_uniform_grid(0.0, 1.0, 11).unwrap()));
        let mask: Vec<bool> = (0..11).map(|i| i >= 6).collect();
        let r = StoppingRegion::new(space, mask).unwrap();
        let later = r.shifted(2);
        assert_eq!(later.mask().iter().position(|&m| m), Some(8));
        let earlier = r.shifted(-2);
        assert_eq!(earlier.mask().iter().position(|&m| m), Some(4));
        assert_eq!(r.shifted(0), r);
    }

    #[test]
    fn boundary_midpoints() {
        let space = StateSpace::line(make_uniform_grid(0.0, 1.0, 11).unwrap());
        let mask: Vec<bool> = (0..11).map(|i| (3..7).contains(&i)).collect();
        let b = boundaries(&space, &mask);
        assert_eq!(b.len(), 2);
        assert!((b[0].x - 0.25).abs() < 1e-12 && b[0].direction == Direction::StopAbove);
        assert!((b[1].x - 0.65).abs() < 1e-12 && b[1].direction == Direction::StopBelow);
    }
}
