//! Renewal-driven jump processes made Markov by adding the time since the
//! last jump as a clock coordinate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GeneratorBuilder, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::measure::DiscreteMeasure;
use crate::space::StateSpace;

/// Hazard rate `Q(s)` of the interarrival law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Hazard {
    /// Exponential interarrivals.
    Constant { rate: f64 },
    /// Mixture of exponentials; the hazard decreases to the smallest rate.
    MixtureExponential { weights: Vec<f64>, rates: Vec<f64> },
    /// `Q(s) = 1/(1+s)`, survival `1/(1+s)`.
    BetaPrime,
}

impl Hazard {
    pub fn validate(&self) -> Result<()> {
        match self {
            Hazard::Constant { rate } if !(*rate >= 0.0) || !rate.is_finite() => {
                Err(Error::NegativeHazard { s: 0.0, value: *rate })
            }
            Hazard::MixtureExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(Error::InvalidParameter("mixture needs matching weights and rates".into()));
                }
                if weights.iter().any(|w| !(*w > 0.0)) || rates.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::InvalidParameter("mixture weights and rates must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Hazard::Constant { rate } => *rate,
            Hazard::MixtureExponential { weights, rates } => {
                let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
                let (mut num, mut den) = (0.0, 0.0);
                for (w, r) in weights.iter().zip(rates) {
                    let e = w * (-(r - min) * s).exp();
                    num += r * e;
                    den += e;
                }
                num / den
            }
            Hazard::BetaPrime => 1.0 / (1.0 + s),
        }
    }

    /// `P(interarrival > s)`.
    pub fn survival(&self, s: f64) -> f64 {
        match self {
            Hazard::Constant { rate } => (-rate * s).exp(),
            Hazard::MixtureExponential { weights, rates } => {
                let total: f64 = weights.iter().sum();
                weights
                    .iter()
                    .zip(rates)
                    .map(|(w, r)| w * (-r * s).exp())
                    .sum::<f64>()
                    / total
            }
            Hazard::BetaPrime => 1.0 / (1.0 + s),
        }
    }
}

/// Smallest clock horizon with survival below `tail`, capped at `cap`.
pub fn clock_horizon(hazard: &Hazard, tail: f64, cap: f64) -> f64 {
    if hazard.survival(cap) >= tail {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hazard.survival(mid) < tail {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiMarkovSpec {
    pub hazard: Hazard,
    pub jump_dist: DiscreteMeasure,
    /// Uniform grid on `[0, S_max]`.
    pub clock_grid: Grid1D,
}

/// `D_s u(s,x) + Q(s) ∫ (u(0, x+y) - u(s,x)) F(dy)` on clock × space.
///
/// The clock advances by upwind transport at rate `1/ds`; the last clock row
/// keeps only the renewal term. Renewal targets snap to the nearest space node
/// and are clipped to the window.
pub fn semi_markov_lift_generator(space_grid: &Grid1D, spec: &SemiMarkovSpec) -> Result<GeneratorMatrix> {
    spec.hazard.validate()?;
    let clock = &spec.clock_grid;
    let ds = clock.require_uniform()?;
    if clock.lo().abs() > 1e-12 * ds {
        return Err(Error::InvalidParameter(format!(
            "clock grid must start at 0, starts at {}",
            clock.lo()
        )));
    }
    let space = Arc::new(StateSpace::clock_space(clock.clone(), space_grid.clone()));
    let mut b = GeneratorBuilder::new(space.clone());
    let xs = space_grid.nodes();
    let targets: Vec<Vec<(usize, f64)>> = xs
        .iter()
        .map(|&x| {
            spec.jump_dist
                .iter()
                .map(|(y, w)| (space_grid.nearest_index(x + y), w))
                .collect()
        })
        .collect();
    let last = clock.len() - 1;
    for (k, &s) in clock.nodes().iter().enumerate() {
        let q = spec.hazard.eval(s);
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::NegativeHazard { s, value: q });
        }
        for (i, row_targets) in targets.iter().enumerate() {
            let here = space.index(k, i);
            if k < last {
                b.add(here, space.index(k + 1, i), 1.0 / ds)?;
            }
            for &(j, w) in row_targets {
                b.add(here, space.index(0, j), q * w)?;
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;

    #[test]
    fn mixture_hazard_limits() {
        let h = Hazard::MixtureExponential {
            weights: vec![0.3, 0.7],
            rates: vec![2.0, 0.5],
        };
        assert!((h.eval(0.0) - (0.3 * 2.0 + 0.7 * 0.5)).abs() < 1e-14);
        assert!((h.eval(200.0) - 0.5).abs() < 1e-12);
        assert!(h.eval(1.0) > h.eval(2.0));
    }

    #[test]
    fn beta_prime_hazard() {
        assert_eq!(Hazard::BetaPrime.eval(0.0), 1.0);
        assert_eq!(Hazard::BetaPrime.eval(3.0), 0.25);
        assert_eq!(clock_horizon(&Hazard::BetaPrime, 1e-6, 50.0), 50.0);
    }

    #[test]
    fn horizon_for_exponential() {
        let s = clock_horizon(&Hazard::Constant { rate: 2.0 }, 1e-6, 1e3);
        assert!((s - 1e6_f64.ln() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn lift_structure() {
        let space_grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let spec = SemiMarkovSpec {
            hazard: Hazard::Constant { rate: 2.0 },
            jump_dist: DiscreteMeasure::point_mass(0.2).unwrap(),
            clock_grid: make_uniform_grid(0.0, 1.0, 5).unwrap(),
        };
        let g = semi_markov_lift_generator(&space_grid, &spec).unwrap();
        assert_eq!(g.dim(), 55);
        assert!(g.is_conservative());
        // (s = 0.25, x = 0.3) advances the clock and renews to (0, 0.5).
        let here = 11 + 3;
        assert!((g.rate(here, 22 + 3) - 4.0).abs() < 1e-12);
        assert!((g.rate(here, 5) - 2.0).abs() < 1e-12);
        // Last clock row: renewal only.
        let top = 44 + 3;
        let (cols, _) = g.matrix().row(top);
        assert_eq!(cols, &[5, top]);
    }

    #[test]
    fn negative_hazard_rejected() {
        let spec = SemiMarkovSpec {
            hazard: Hazard::Constant { rate: -1.0 },
            jump_dist: DiscreteMeasure::point_mass(0.2).unwrap(),
            clock_grid: make_uniform_grid(0.0, 1.0, 5).unwrap(),
        };
        let space_grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            semi_markov_lift_generator(&space_grid, &spec),
            Err(Error::NegativeHazard { .. })
        ));
    }
}
