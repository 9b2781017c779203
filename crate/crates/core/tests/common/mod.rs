#![allow(dead_code)]

use feller_stop::generators::*;
use feller_stop::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn line(lo: f64, hi: f64, n: usize) -> Grid1D {
    make_uniform_grid(lo, hi, n).unwrap()
}

pub fn exp_jumps(h: f64) -> DiscreteMeasure {
    DiscreteMeasure::discretized_exponential(1.0, h, 1e-10).unwrap()
}

/// One generator per process family, on moderate grids.
pub fn fixtures() -> Vec<(&'static str, GeneratorMatrix)> {
    let g = line(0.0, 12.0, 241);
    let h = g.step();
    let bm = |b: BmBoundary| bm_generator(&g, &b).unwrap();
    let jump = JumpBoundarySpec::new(1.0, DiscreteMeasure::point_mass(0.5).unwrap()).unwrap();
    let sigma = Coefficient::piecewise_constant(vec![2.0], vec![1.0, 2.0]).unwrap();
    let spec = PiecewiseDiffusionSpec {
        sigma,
        rho: Coefficient::smooth(|x| 1.0 + 0.1 * x),
        mu: Coefficient::constant(-0.1),
        floor: 0.5,
    };
    let cp = compound_poisson_generator(&g, 1.0, &exp_jumps(h)).unwrap();
    let regime = regime_switching_generator(
        &[bm(BmBoundary::Sticky), bm(BmBoundary::Reflected)],
        &RegimeCouplingSpec::two_state(0.1, 0.1).unwrap(),
    )
    .unwrap();
    let x_coarse = line(0.0, 12.0, 61);
    let lift = |hazard: Hazard, s_max: f64| {
        let spec = SemiMarkovSpec {
            hazard,
            jump_dist: exp_jumps(x_coarse.step()),
            clock_grid: line(0.0, s_max, 41),
        };
        semi_markov_lift_generator(&x_coarse, &spec).unwrap()
    };
    vec![
        ("reflected_bm", bm(BmBoundary::Reflected)),
        ("sticky_bm", bm(BmBoundary::Sticky)),
        ("sticky_reflecting_bm", bm(BmBoundary::StickyReflecting { c: 2.0 })),
        ("jump_boundary_bm", bm(BmBoundary::Jump(jump))),
        ("skew_bm", skew_bm_generator(&line(-6.0, 6.0, 241), 0.9).unwrap()),
        ("piecewise_diffusion", piecewise_diffusion_generator(&g, &spec).unwrap()),
        ("levy_cpd", levy_cpd_generator(&g, 0.1, 1.0, 1.0, &exp_jumps(h)).unwrap()),
        ("perturbed_reflected_bm", perturb_generator(&bm(BmBoundary::Reflected), &cp).unwrap()),
        ("regime_switching", regime),
        (
            "semi_markov_mixture",
            lift(
                Hazard::MixtureExponential {
                    weights: vec![0.5, 0.5],
                    rates: vec![0.5, 2.0],
                },
                20.0,
            ),
        ),
        ("semi_markov_beta_prime", lift(Hazard::BetaPrime, 20.0)),
    ]
}

pub fn straddle(gen: &GeneratorMatrix) -> StoppingProblem {
    StoppingProblem::straddle(gen.space(), 0.1, 1.0, 4.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sup_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}
