//! Terminal rewards.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::space::StateSpace;

/// `g(x) = (x - c1)^+ - (x - c2)^+`: flat at 0 below `c1`, slope 1 on
/// `[c1, c2]`, flat at `c2 - c1` above `c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CallSpread {
    pub c1: f64,
    pub c2: f64,
}

impl CallSpread {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 < c2) || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidStrikes { c1, c2 });
        }
        Ok(Self { c1, c2 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Same as (x-c1)^+ - (x-c2)^+, but exactly monotone in floating point.
        (x - self.c1).clamp(0.0, self.c2 - self.c1)
    }

    /// Slope on the open linear pieces; at a kink returns the left slope.
    pub fn slope(&self, x: f64) -> f64 {
        if x > self.c1 && x <= self.c2 {
            1.0
        } else {
            0.0
        }
    }

    pub fn cap(&self) -> f64 {
        self.c2 - self.c1
    }
}

/// Samples the call-spread payoff on `space` (regime and clock coordinates ignored).
pub fn straddle_payoff(space: &Arc<StateSpace>, c1: f64, c2: f64) -> Result<SampledFunction> {
    let g = CallSpread::new(c1, c2)?;
    SampledFunction::from_x_fn(space.clone(), |x| g.eval(x))
}
