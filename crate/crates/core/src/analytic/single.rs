use serde::Serialize;

use super::roots::bisect;
use crate::error::{Error, Result};
use crate::payoff::CallSpread;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencyBoundary {
    /// Homogeneous solution `e^{kx} + e^{-kx}`.
    Reflected,
    /// Homogeneous solution `e^{kx} - e^{-kx}`.
    Sticky,
}

/// Value `C φ(x)` below `x_star`, `g(x)` above, for Brownian motion on the
/// half-line and the call-spread payoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticReflectedSolution {
    pub boundary: TangencyBoundary,
    #[serde(rename = "C")]
    pub c: f64,
    pub x_star: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AnalyticReflectedSolution {
    fn k(&self) -> f64 {
        (2.0 * self.a).sqrt()
    }

    pub fn phi(&self, x: f64) -> f64 {
        phi(self.boundary, self.k(), x).0
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < self.x_star {
            self.c * self.phi(x)
        } else {
            self.payoff().eval(x)
        }
    }

    pub fn payoff(&self) -> CallSpread {
        CallSpread {
            c1: self.c1,
            c2: self.c2,
        }
    }

    /// `min (C φ - g)` over `n` points of `[0, hi]`.
    pub fn min_slack(&self, hi: f64, n: usize) -> f64 {
        let g = self.payoff();
        (0..=n)
            .map(|i| hi * i as f64 / n as f64)
            .map(|x| self.c * self.phi(x) - g.eval(x))
            .fold(f64::INFINITY, f64::min)
    }
}

fn phi(b: TangencyBoundary, k: f64, x: f64) -> (f64, f64) {
    let (ep, em) = ((k * x).exp(), (-k * x).exp());
    match b {
        TangencyBoundary::Reflected => (ep + em, k * (ep - em)),
        TangencyBoundary::Sticky => (ep - em, k * (ep + em)),
    }
}

/// Smallest multiple of `φ` that dominates the payoff, and its contact point.
pub fn tangency_solution(boundary: TangencyBoundary, a: f64, c1: f64, c2: f64) -> Result<AnalyticReflectedSolution> {
    if !(a > 0.0) {
        return Err(Error::InvalidDiscount(a));
    }
    if !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("need c1 > 0, got {c1}")));
    }
    let payoff = CallSpread::new(c1, c2)?;
    let k = (2.0 * a).sqrt();
    // On the linear piece, d/dx (g/φ) has the sign of r.
    let r = |x: f64| {
        let (p, dp) = phi(boundary, k, x);
        (x - c1) * dp - p
    };
    let x_star = if r(c2) <= 0.0 {
        c2
    } else {
        bisect(r, c1, c2, 1e-13)?
    };
    let p = phi(boundary, k, x_star).0;
    if !(p > 0.0) {
        return Err(Error::NoTangency);
    }
    Ok(AnalyticReflectedSolution {
        boundary,
        c: payoff.eval(x_star) / p,
        x_star,
        a,
        c1,
        c2,
    })
}

pub fn reflected_straddle_solution(a: f64, c1: f64, c2: f64) -> Result<AnalyticReflectedSolution> {
    tangency_solution(TangencyBoundary::Reflected, a, c1, c2)
}

pub fn sticky_straddle_solution(a: f64, c1: f64, c2: f64) -> Result<AnalyticReflectedSolution> {
    tangency_solution(TangencyBoundary::Sticky, a, c1, c2)
}
