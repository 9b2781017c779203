//! Brownian motion on a half-line grid with the classical boundary behaviours,
//! and skew Brownian motion through an interior node.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GeneratorBuilder, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid1D};
use crate::measure::DiscreteMeasure;
use crate::space::StateSpace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpBoundarySpec {
    lambda_rate: f64,
    jump_dist: DiscreteMeasure,
}

impl JumpBoundarySpec {
    pub fn new(lambda_rate: f64, jump_dist: DiscreteMeasure) -> Result<Self> {
        if !(lambda_rate > 0.0) || !lambda_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "boundary jump rate must be positive, got {lambda_rate}"
            )));
        }
        jump_dist.require_positive_atoms()?;
        Ok(Self {
            lambda_rate,
            jump_dist,
        })
    }

    pub fn lambda_rate(&self) -> f64 {
        self.lambda_rate
    }

    pub fn jump_dist(&self) -> &DiscreteMeasure {
        &self.jump_dist
    }
}

/// Behaviour of the process when it reaches the left end of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BmBoundary {
    Reflected,
    Sticky,
    StickyReflecting { c: f64 },
    Jump(JumpBoundarySpec),
}

/// Adds `coef * D_xx` on one line of a uniform grid, flat indices `first..`.
///
/// Interior rows get `coef/h²` to each neighbour. Ends that are not absorbing
/// get the ghost-node zero-flux closure `2 coef/h²` inward; the left end is
/// skipped when `left` is false so the caller can write its own row.
pub(crate) fn add_second_difference(
    b: &mut GeneratorBuilder,
    grid: &Grid1D,
    first: usize,
    coef: f64,
    left: bool,
) -> Result<()> {
    let h = grid.require_uniform()?;
    let n = grid.len();
    let r = coef / (h * h);
    for i in 1..n - 1 {
        b.add(first + i, first + i - 1, r)?;
        b.add(first + i, first + i + 1, r)?;
    }
    if left && grid.left_boundary() != BoundaryKind::Absorbing {
        b.add(first, first + 1, 2.0 * r)?;
    }
    if grid.right_boundary() != BoundaryKind::Absorbing {
        b.add(first + n - 1, first + n - 2, 2.0 * r)?;
    }
    Ok(())
}

/// `½ D_xx` on `[lo, hi]` with the given behaviour at `lo`.
pub fn bm_generator(grid: &Grid1D, boundary: &BmBoundary) -> Result<GeneratorMatrix> {
    let h = grid.require_uniform()?;
    let space = Arc::new(StateSpace::line(grid.clone()));
    let mut b = GeneratorBuilder::new(space);
    add_second_difference(&mut b, grid, 0, 0.5, false)?;
    match boundary {
        BmBoundary::Reflected => b.add(0, 1, 1.0 / (h * h))?,
        BmBoundary::Sticky => {}
        BmBoundary::StickyReflecting { c } => {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sticky-reflecting parameter must be positive, got {c}"
                )));
            }
            b.add(0, 1, c / (h * (2.0 + c * h)))?;
        }
        BmBoundary::Jump(spec) => {
            for (y, w) in spec.jump_dist.iter() {
                let target = grid.lo() + y;
                if target > grid.hi() {
                    return Err(Error::AtomOutsideDomain {
                        atom: y,
                        lo: grid.lo(),
                        hi: grid.hi(),
                    });
                }
                b.add(0, grid.nearest_index(target), spec.lambda_rate * w)?;
            }
        }
    }
    b.build()
}

/// Skew Brownian motion with skewness `beta` at the interior node `x = 0`.
///
/// The node at zero leaves left at rate `(1-beta)/h²` and right at `beta/h²`.
pub fn skew_bm_generator(grid: &Grid1D, beta: f64) -> Result<GeneratorMatrix> {
    let h = grid.require_uniform()?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0,1), got {beta}")));
    }
    let z = grid.index_of(0.0, 1e-9 * h).ok_or(Error::ZeroNotInterior)?;
    if z == 0 || z == grid.len() - 1 {
        return Err(Error::ZeroNotInterior);
    }
    let space = Arc::new(StateSpace::line(grid.clone()));
    let mut b = GeneratorBuilder::new(space);
    add_second_difference(&mut b, grid, 0, 0.5, true)?;
    b.clear_row(z);
    b.add(z, z - 1, (1.0 - beta) / (h * h))?;
    b.add(z, z + 1, beta / (h * h))?;
    b.build()
}
