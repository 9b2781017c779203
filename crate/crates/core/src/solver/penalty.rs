use serde::{Deserialize, Serialize};

use super::resolvent::Resolvent;
use crate::error::{Error, Result};
use crate::function::{max_abs_diff, same_space, SampledFunction};
use crate::generators::GeneratorMatrix;
use crate::problem::StoppingProblem;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    #[default]
    Zero,
    Terminal,
}

/// Settings for the λ-continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyParams {
    /// Increasing penalty levels; `None` means `a·2^k` for `k = 1..=50`.
    pub lambda_schedule: Option<Vec<f64>>,
    pub fixed_point_tol: f64,
    /// Per-stage cap; `None` means `10·⌈ln(tol)/ln(λ/(a+λ))⌉`.
    pub max_inner_iters: Option<usize>,
    pub outer_stop_tol: f64,
    /// Alternate each Picard step with an exact solve on the current
    /// penalized set. Turn off for the textbook iteration.
    pub acceleration: bool,
    pub warm_start: WarmStart,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            lambda_schedule: None,
            fixed_point_tol: 1e-10,
            max_inner_iters: None,
            outer_stop_tol: 1e-8,
            acceleration: true,
            warm_start: WarmStart::Zero,
        }
    }
}

pub const DEFAULT_SCHEDULE_STAGES: i32 = 50;

impl PenaltyParams {
    pub fn plain() -> Self {
        Self {
            acceleration: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_point_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fixed_point_tol must be positive, got {}",
                self.fixed_point_tol
            )));
        }
        if !(self.outer_stop_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "outer_stop_tol must be positive, got {}",
                self.outer_stop_tol
            )));
        }
        if self.max_inner_iters == Some(0) {
            return Err(Error::InvalidParameter("max_inner_iters must be at least 1".into()));
        }
        if let Some(s) = &self.lambda_schedule {
            if s.is_empty() {
                return Err(Error::InvalidParameter("lambda_schedule is empty".into()));
            }
            if s.iter().any(|l| !(*l > 0.0) || !l.is_finite()) || s.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidParameter(
                    "lambda_schedule must be positive and strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn schedule(&self, a: f64) -> Vec<f64> {
        match &self.lambda_schedule {
            Some(s) => s.clone(),
            None => (1..=DEFAULT_SCHEDULE_STAGES).map(|k| a * 2f64.powi(k)).collect(),
        }
    }

    pub fn inner_iter_cap(&self, a: f64, lambda: f64) -> usize {
        self.max_inner_iters.unwrap_or_else(|| {
            let q = lambda / (a + lambda);
            let k = (self.fixed_point_tol.ln() / q.ln()).ceil();
            // Saturating float-to-int cast.
            (10.0 * k.max(1.0)) as usize
        })
    }
}

/// The map `Z(w) = R_{a+λ}(f + λ max(g, w))`, a contraction with factor `λ/(a+λ)`.
#[derive(Clone, Debug)]
pub struct PicardMap {
    resolvent: Resolvent,
    lambda: f64,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl PicardMap {
    pub fn new(gen: &GeneratorMatrix, problem: &StoppingProblem, lambda: f64) -> Result<Self> {
        check_spaces(gen, problem)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("penalty must be positive, got {lambda}")));
        }
        Ok(Self {
            resolvent: Resolvent::new(gen, problem.discount() + lambda)?,
            lambda,
            f: problem.running().values().to_vec(),
            g: problem.terminal().values().to_vec(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self
            .f
            .iter()
            .zip(&self.g)
            .zip(w)
            .map(|((f, g), w)| f + self.lambda * g.max(*w))
            .collect();
        self.resolvent.solve(&rhs)
    }
}

#[derive(Clone, Debug)]
pub struct PenaltySolution {
    pub v: SampledFunction,
    pub lambda: f64,
    pub inner_iterations: usize,
    pub final_update_norm: f64,
}

pub(crate) fn check_spaces(gen: &GeneratorMatrix, problem: &StoppingProblem) -> Result<()> {
    if gen.dim() != problem.space().len() || !same_space(gen.space(), problem.space()) {
        return Err(Error::SpaceMismatch(
            "generator and problem live on different state spaces".into(),
        ));
    }
    Ok(())
}

/// Exact solve of the penalized equation with the penalty switched on where
/// `active` holds: `(a - G + λ 1_S) v = f + λ 1_S g`.
fn active_set_solve(gen: &GeneratorMatrix, problem: &StoppingProblem, lambda: f64, active: &[bool]) -> Result<Vec<f64>> {
    let extra: Vec<f64> = active.iter().map(|&s| if s { lambda } else { 0.0 }).collect();
    let r = Resolvent::with_extra_diagonal(gen, problem.discount(), Some(&extra))?;
    let rhs: Vec<f64> = problem
        .running()
        .values()
        .iter()
        .zip(problem.terminal().values())
        .zip(active)
        .map(|((f, g), &s)| if s { f + lambda * g } else { *f })
        .collect();
    r.solve(&rhs)
}

/// Runs one penalty stage. Returns the best iterate and whether it met the
/// tolerance within the iteration cap.
pub(crate) fn run_stage(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    lambda: f64,
    warm: &[f64],
    params: &PenaltyParams,
) -> Result<(PenaltySolution, bool)> {
    let z_map = PicardMap::new(gen, problem, lambda)?;
    let cap = params.inner_iter_cap(problem.discount(), lambda);
    let g = problem.terminal().values();
    let mut w = warm.to_vec();
    let mut w_is_exact = false;
    let mut prev_update = f64::INFINITY;
    let mut update = f64::INFINITY;
    let mut iters = 0;
    while iters < cap {
        iters += 1;
        let z = z_map.apply(&w)?;
        update = max_abs_diff(&z, &w);
        if update <= params.fixed_point_tol {
            let v = if w_is_exact { w } else { z };
            return Ok((stage_solution(problem, v, lambda, iters, update)?, true));
        }
        if params.acceleration && update < prev_update {
            let active: Vec<bool> = z.iter().zip(g).map(|(zi, gi)| zi < gi).collect();
            w = active_set_solve(gen, problem, lambda, &active)?;
            w_is_exact = true;
        } else {
            w = z;
            w_is_exact = false;
        }
        prev_update = update;
    }
    Ok((stage_solution(problem, w, lambda, iters, update)?, false))
}

fn stage_solution(problem: &StoppingProblem, v: Vec<f64>, lambda: f64, iters: usize, update: f64) -> Result<PenaltySolution> {
    Ok(PenaltySolution {
        v: SampledFunction::new(problem.space().clone(), v)?,
        lambda,
        inner_iterations: iters,
        final_update_norm: update,
    })
}

/// Solves `a v - G v - f = λ (g - v)^+` by fixed-point iteration from `warm_start`.
pub fn penalty_fixed_point(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    lambda: f64,
    warm_start: &SampledFunction,
    params: &PenaltyParams,
) -> Result<PenaltySolution> {
    params.validate()?;
    if warm_start.len() != problem.space().len() {
        return Err(Error::SpaceMismatch("warm start has the wrong length".into()));
    }
    let (sol, ok) = run_stage(gen, problem, lambda, warm_start.values(), params)?;
    if ok {
        Ok(sol)
    } else {
        Err(Error::MaxItersExceeded {
            iterations: sol.inner_iterations,
            last_update: sol.final_update_norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bm_generator, BmBoundary};
    use crate::grid::make_uniform_grid;

    fn setup(g_val: f64) -> (GeneratorMatrix, StoppingProblem) {
        let gen = bm_generator(&make_uniform_grid(0.0, 10.0, 101).unwrap(), &BmBoundary::Reflected).unwrap();
        let s = gen.space().clone();
        let p = StoppingProblem::new(0.1, SampledFunction::zeros(s.clone()), SampledFunction::constant(s, g_val)).unwrap();
        (gen, p)
    }

    #[test]
    fn zero_data_converges_immediately() {
        let (gen, p) = setup(0.0);
        let w = SampledFunction::zeros(p.space().clone());
        for params in [PenaltyParams::default(), PenaltyParams::plain()] {
            let sol = penalty_fixed_point(&gen, &p, 5.0, &w, &params).unwrap();
            assert_eq!(sol.inner_iterations, 1);
            assert!(sol.v.values().iter().all(|&v| v == 0.0));
        }
    }

    // g ≡ 1 keeps every node penalized: (a + λ) v = λ.
    #[test]
    fn constant_obstacle_fixed_point() {
        let (gen, p) = setup(1.0);
        let w = SampledFunction::zeros(p.space().clone());
        let lambda = 3.0;
        let exact = lambda / (0.1 + lambda);
        for params in [PenaltyParams::default(), PenaltyParams::plain()] {
            let sol = penalty_fixed_point(&gen, &p, lambda, &w, &params).unwrap();
            assert!(sol.final_update_norm <= params.fixed_point_tol);
            for &v in sol.v.values() {
                assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (gen, p) = setup(1.0);
        let w = SampledFunction::zeros(p.space().clone());
        let params = PenaltyParams {
            max_inner_iters: Some(1),
            acceleration: false,
            ..PenaltyParams::default()
        };
        assert!(matches!(
            penalty_fixed_point(&gen, &p, 3.0, &w, &params),
            Err(Error::MaxItersExceeded { iterations: 1, .. })
        ));
    }

    #[test]
    fn default_cap_formula() {
        let params = PenaltyParams::default();
        let cap = params.inner_iter_cap(0.1, 0.1);
        assert_eq!(cap, 10 * (1e-10_f64.ln() / 0.5_f64.ln()).ceil() as usize);
        assert!(params.inner_iter_cap(0.1, 1e300) > 0);
    }

    #[test]
    fn schedule_validation() {
        let bad = PenaltyParams {
            lambda_schedule: Some(vec![1.0, 1.0]),
            ..PenaltyParams::default()
        };
        assert!(bad.validate().is_err());
        let s = PenaltyParams::default().schedule(0.1);
        assert_eq!(s.len(), DEFAULT_SCHEDULE_STAGES as usize);
        assert!((s[0] - 0.2).abs() < 1e-15);
    }
}
