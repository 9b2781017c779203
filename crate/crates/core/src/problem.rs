use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::payoff::straddle_payoff;
use crate::space::StateSpace;

/// Discounted infinite-horizon stopping problem: maximize
/// `E[∫_0^τ e^{-as} f(X_s) ds + e^{-aτ} g(X_τ)]` over stopping times `τ`.
#[derive(Clone, Debug)]
pub struct StoppingProblem {
    space: Arc<StateSpace>,
    discount: f64,
    running: SampledFunction,
    terminal: SampledFunction,
}

impl StoppingProblem {
    pub fn new(discount: f64, running: SampledFunction, terminal: SampledFunction) -> Result<Self> {
        if !(discount > 0.0) || !discount.is_finite() {
            return Err(Error::InvalidDiscount(discount));
        }
        if !running.same_space(&terminal) {
            return Err(Error::SpaceMismatch(
                "running and terminal rewards live on different spaces".into(),
            ));
        }
        Ok(Self {
            space: running.space().clone(),
            discount,
            running,
            terminal,
        })
    }

    /// Call-spread terminal reward, no running reward.
    pub fn straddle(space: &Arc<StateSpace>, discount: f64, c1: f64, c2: f64) -> Result<Self> {
        let g = straddle_payoff(space, c1, c2)?;
        Self::new(discount, SampledFunction::zeros(space.clone()), g)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// The discount rate `a`.
    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Running reward `f`.
    pub fn running(&self) -> &SampledFunction {
        &self.running
    }

    /// Terminal reward `g`.
    pub fn terminal(&self) -> &SampledFunction {
        &self.terminal
    }
}
