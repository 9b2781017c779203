use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::BmBoundary;
use crate::payoff::CallSpread;

/// Continuous piecewise-linear function on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    pub start_value: f64,
    /// Sorted, positive kink locations.
    pub kinks: Vec<f64>,
    /// `slopes[k]` holds between `kinks[k-1]` and `kinks[k]`.
    pub slopes: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(start_value: f64, kinks: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != kinks.len() + 1 {
            return Err(Error::InvalidParameter("need one more slope than kinks".into()));
        }
        if kinks.iter().any(|k| !(*k > 0.0)) || kinks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("kinks must be positive and increasing".into()));
        }
        Ok(Self {
            start_value,
            kinks,
            slopes,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            start_value: c,
            kinks: Vec::new(),
            slopes: vec![0.0],
        }
    }

    pub fn call_spread(p: &CallSpread) -> Result<Self> {
        if !(p.c1 > 0.0) {
            return Err(Error::InvalidParameter("half-line payoff needs c1 > 0".into()));
        }
        Self::new(0.0, vec![p.c1, p.c2], vec![0.0, 1.0, 0.0])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            start_value: s * self.start_value,
            kinks: self.kinks.clone(),
            slopes: self.slopes.iter().map(|m| s * m).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.start_value;
        let mut left = 0.0;
        for (k, &t) in self.kinks.iter().enumerate() {
            if x <= t {
                return v + self.slopes[k] * (x - left);
            }
            v += self.slopes[k] * (t - left);
            left = t;
        }
        v + self.slopes[self.kinks.len()] * (x - left)
    }

    /// Right derivative.
    pub fn slope(&self, x: f64) -> f64 {
        self.slopes[self.kinks.partition_point(|&t| t <= x)]
    }
}

/// Bounded solution of `(a - ½ D_xx) u = h` on `[0, ∞)` with a boundary
/// condition at 0:
/// `u = h/a + Σ_j Δ_j/(2ak) e^{-k|x - t_j|} + B e^{-kx}`, `k = √(2a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineSolution {
    a: f64,
    k: f64,
    h: PiecewiseLinear,
    /// `(t_j, Δ_j/(2ak))`.
    bumps: Vec<(f64, f64)>,
    b: f64,
}

impl HalfLineSolution {
    fn particular(&self, x: f64) -> (f64, f64) {
        let mut u = self.h.eval(x) / self.a;
        let mut du = self.h.slope(x) / self.a;
        for &(t, c) in &self.bumps {
            let e = (-self.k * (x - t).abs()).exp();
            u += c * e;
            du -= c * self.k * (x - t).signum() * e;
        }
        (u, du)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.particular(x).0 + self.b * (-self.k * x).exp()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.particular(x).1 - self.k * self.b * (-self.k * x).exp()
    }

    pub fn boundary_coefficient(&self) -> f64 {
        self.b
    }
}

pub fn halfline_resolvent(a: f64, boundary: &BmBoundary, h: &PiecewiseLinear) -> Result<HalfLineSolution> {
    if !(a > 0.0) {
        return Err(Error::InvalidDiscount(a));
    }
    let k = (2.0 * a).sqrt();
    let bumps = h
        .kinks
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, (h.slopes[j + 1] - h.slopes[j]) / (2.0 * a * k)))
        .collect();
    let mut sol = HalfLineSolution {
        a,
        k,
        h: h.clone(),
        bumps,
        b: 0.0,
    };
    let (p0, dp0) = sol.particular(0.0);
    let h0 = h.eval(0.0);
    sol.b = match boundary {
        BmBoundary::Reflected => dp0 / k,
        BmBoundary::Sticky => h0 / a - p0,
        // a u(0) - (c/2) u'(0) = h(0)
        BmBoundary::StickyReflecting { c } => (c * dp0 - 2.0 * a * p0 + 2.0 * h0) / (2.0 * a + c * k),
        BmBoundary::Jump(_) => {
            return Err(Error::UnsupportedBoundary(
                "jump boundary has no local half-line resolvent".into(),
            ))
        }
    };
    Ok(sol)
}
