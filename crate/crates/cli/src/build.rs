//! Turns a validated configuration into a generator and a stopping problem.

use feller_stop::generators::*;
use feller_stop::{make_uniform_grid, DiscreteMeasure, Grid1D, SampledFunction, StoppingProblem};

use crate::config::{CoefficientSpec, ExperimentConfig, MeasureSpec, PayoffSpec, ProcessSpec, SimpleBoundary};
use crate::ValidationError;

pub struct Experiment {
    pub grid: Grid1D,
    pub generator: GeneratorMatrix,
    pub problem: StoppingProblem,
}

fn field<T>(name: &str, r: feller_stop::Result<T>) -> Result<T, ValidationError> {
    r.map_err(|e| ValidationError(format!("{name}: {e}")))
}

pub fn measure(spec: &MeasureSpec, h: f64) -> feller_stop::Result<DiscreteMeasure> {
    match spec {
        MeasureSpec::PointMass { atom } => DiscreteMeasure::point_mass(*atom),
        MeasureSpec::Atoms { atoms, weights } => DiscreteMeasure::new(atoms.clone(), weights.clone()),
        MeasureSpec::Exponential { gamma, tail } => DiscreteMeasure::discretized_exponential(*gamma, h, *tail),
    }
}

fn coefficient(spec: &CoefficientSpec) -> feller_stop::Result<Coefficient> {
    match spec {
        CoefficientSpec::Constant(c) => Ok(Coefficient::constant(*c)),
        CoefficientSpec::PiecewiseConstant { breaks, values } => {
            Coefficient::piecewise_constant(breaks.clone(), values.clone())
        }
    }
}

pub fn simple_boundary(b: SimpleBoundary) -> BmBoundary {
    match b {
        SimpleBoundary::Reflected => BmBoundary::Reflected,
        SimpleBoundary::Sticky => BmBoundary::Sticky,
    }
}

fn interpolate(xs: &[f64], gs: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&t| t <= x);
    if k == 0 {
        gs[0]
    } else if k == xs.len() {
        gs[xs.len() - 1]
    } else {
        let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        gs[k - 1] + t * (gs[k] - gs[k - 1])
    }
}

pub fn generator(process: &ProcessSpec, grid: &Grid1D) -> feller_stop::Result<GeneratorMatrix> {
    let h = grid.step();
    match process {
        ProcessSpec::ReflectedBm => bm_generator(grid, &BmBoundary::Reflected),
        ProcessSpec::StickyBm => bm_generator(grid, &BmBoundary::Sticky),
        ProcessSpec::StickyReflectingBm { c } => bm_generator(grid, &BmBoundary::StickyReflecting { c: *c }),
        ProcessSpec::JumpBoundaryBm { lambda_rate, jump_dist } => {
            let spec = JumpBoundarySpec::new(*lambda_rate, measure(jump_dist, h)?)?;
            bm_generator(grid, &BmBoundary::Jump(spec))
        }
        ProcessSpec::SkewBm { beta } => skew_bm_generator(grid, *beta),
        ProcessSpec::PiecewiseDiffusion { sigma, rho, mu, floor } => {
            let spec = PiecewiseDiffusionSpec {
                sigma: coefficient(sigma)?,
                rho: coefficient(rho)?,
                mu: coefficient(mu)?,
                floor: *floor,
            };
            piecewise_diffusion_generator(grid, &spec)
        }
        ProcessSpec::Levy { drift, diffusion, jump_rate, jump_dist } => {
            levy_cpd_generator(grid, *drift, *diffusion, *jump_rate, &measure(jump_dist, h)?)
        }
        ProcessSpec::PerturbedBm { boundary, jump_rate, jump_dist } => {
            let base = bm_generator(grid, &simple_boundary(*boundary))?;
            let cp = compound_poisson_generator(grid, *jump_rate, &measure(jump_dist, h)?)?;
            perturb_generator(&base, &cp)
        }
        ProcessSpec::RegimeSwitching { regimes, q } => {
            let blocks = regimes
                .iter()
                .map(|b| bm_generator(grid, &simple_boundary(*b)))
                .collect::<feller_stop::Result<Vec<_>>>()?;
            regime_switching_generator(&blocks, &RegimeCouplingSpec::constant(q.clone())?)
        }
        ProcessSpec::SemiMarkov { hazard, jump_dist, clock_n, clock_max } => {
            hazard.validate()?;
            let s_max = clock_max.unwrap_or_else(|| clock_horizon(hazard, 1e-6, 1e4));
            let spec = SemiMarkovSpec {
                hazard: hazard.clone(),
                jump_dist: measure(jump_dist, h)?,
                clock_grid: make_uniform_grid(0.0, s_max, *clock_n)?,
            };
            semi_markov_lift_generator(grid, &spec)
        }
    }
}

/// Builds the experiment on a grid of `n` nodes over the configured window.
pub fn build(cfg: &ExperimentConfig, n: usize) -> Result<Experiment, ValidationError> {
    let grid = field("grid", make_uniform_grid(cfg.grid.lo, cfg.grid.hi, n))?;
    let generator = field("process", generator(&cfg.process, &grid))?;
    let space = generator.space().clone();
    let terminal = match &cfg.payoff {
        PayoffSpec::CallSpread { c1, c2 } => field("payoff", feller_stop::straddle_payoff(&space, *c1, *c2))?,
        PayoffSpec::Tabulated { x, g } => field("payoff", SampledFunction::from_x_fn(space.clone(), |t| interpolate(x, g, t)))?,
    };
    let running = SampledFunction::constant(space, cfg.running_reward);
    let problem = field("problem", StoppingProblem::new(cfg.discount_a, running, terminal))?;
    Ok(Experiment { grid, generator, problem })
}
