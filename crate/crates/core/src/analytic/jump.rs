use serde::Serialize;

use super::roots::{bisect, sign_changes};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::payoff::CallSpread;

const SCAN_INTERVALS: usize = 2000;

/// Brownian motion that jumps away from 0 at rate `lambda` with law `F`.
///
/// On the continuation region `[0, x*)` the value is
/// `u(x) = C1 e^{-kx} + C2 e^{kx}`, `k = √(2a)`; above `x*` it is the payoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticJumpSolution {
    #[serde(rename = "C1")]
    pub c1_coef: f64,
    #[serde(rename = "C2")]
    pub c2_coef: f64,
    pub x_star: f64,
    pub a: f64,
    pub lambda: f64,
    pub jump_dist: DiscreteMeasure,
    pub c1: f64,
    pub c2: f64,
    /// False when no interior smooth-fit point passed the checks and the
    /// contact was placed at the upper strike.
    pub smooth_fit: bool,
    /// Every root of the linkage residual that was found, before selection.
    pub candidates: Vec<f64>,
    pub linkage_residual: f64,
}

struct Trial {
    c1_coef: f64,
    c2_coef: f64,
    residual: f64,
}

impl AnalyticJumpSolution {
    fn k(&self) -> f64 {
        (2.0 * self.a).sqrt()
    }

    pub fn payoff(&self) -> CallSpread {
        CallSpread {
            c1: self.c1,
            c2: self.c2,
        }
    }

    pub fn continuation(&self, x: f64) -> f64 {
        let k = self.k();
        self.c1_coef * (-k * x).exp() + self.c2_coef * (k * x).exp()
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < self.x_star {
            self.continuation(x)
        } else {
            self.payoff().eval(x)
        }
    }

    pub fn min_slack(&self, hi: f64, n: usize) -> f64 {
        let g = self.payoff();
        (0..=n)
            .map(|i| hi * i as f64 / n as f64)
            .map(|x| self.value(x) - g.eval(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(a+λ) u(0) - λ ∫ value dF` for a trial contact point.
fn linkage(a: f64, lambda: f64, f: &DiscreteMeasure, g: &CallSpread, x: f64, c1: f64, c2: f64) -> f64 {
    let k = (2.0 * a).sqrt();
    let u = |y: f64| c1 * (-k * y).exp() + c2 * (k * y).exp();
    let jump: f64 = f
        .iter()
        .map(|(y, w)| w * if y < x { u(y) } else { g.eval(y) })
        .sum();
    (a + lambda) * (c1 + c2) - lambda * jump
}

fn smooth_fit_trial(a: f64, lambda: f64, f: &DiscreteMeasure, g: &CallSpread, x: f64) -> Trial {
    let k = (2.0 * a).sqrt();
    let gx = g.eval(x);
    let c2 = 0.5 * (gx + 1.0 / k) * (-k * x).exp();
    let c1 = 0.5 * (gx - 1.0 / k) * (k * x).exp();
    Trial {
        c1_coef: c1,
        c2_coef: c2,
        residual: linkage(a, lambda, f, g, x, c1, c2),
    }
}

/// Solves for the contact point by scanning the linkage residual over
/// `(c1, c2)` and bisecting each sign change. Among roots whose value
/// dominates the payoff, the one with the largest value at 0 is kept. If
/// none qualifies, the contact is placed at `c2` with value matching only.
pub fn jump_boundary_solution(a: f64, lambda: f64, f: &DiscreteMeasure, c1: f64, c2: f64) -> Result<AnalyticJumpSolution> {
    if !(a > 0.0) {
        return Err(Error::InvalidDiscount(a));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("jump rate must be positive, got {lambda}")));
    }
    if !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("need c1 > 0, got {c1}")));
    }
    f.require_positive_atoms()?;
    let g = CallSpread::new(c1, c2)?;
    let res = |x: f64| smooth_fit_trial(a, lambda, f, &g, x).residual;
    let eps = 1e-12 * c2;
    let mut candidates = Vec::new();
    let mut best: Option<AnalyticJumpSolution> = None;
    for (lo, hi) in sign_changes(res, c1 + eps, c2 - eps, SCAN_INTERVALS) {
        let x = bisect(res, lo, hi, 1e-12)?;
        candidates.push(x);
        let t = smooth_fit_trial(a, lambda, f, &g, x);
        let sol = assemble(a, lambda, f, c1, c2, x, t, true);
        if sol.min_slack(x, 4000) >= -1e-9 && best.as_ref().is_none_or(|b| sol.value(0.0) > b.value(0.0)) {
            best = Some(sol);
        }
    }
    let mut sol = match best {
        Some(s) => s,
        None => {
            // Value matching at c2 plus the linkage condition, both linear in (C1, C2).
            let k = (2.0 * a).sqrt();
            let gx = g.eval(c2);
            let (em, ep) = ((-k * c2).exp(), (k * c2).exp());
            let jump_stop: f64 = f.iter().filter(|(y, _)| *y >= c2).map(|(y, w)| w * g.eval(y)).sum();
            let (mut s1, mut s2) = (0.0, 0.0);
            for (y, w) in f.iter().filter(|(y, _)| *y < c2) {
                s1 += w * (-k * y).exp();
                s2 += w * (k * y).exp();
            }
            // [em, ep; (a+λ) - λ s1, (a+λ) - λ s2] (C1, C2) = (g(c2), λ jump_stop)
            let m11 = (a + lambda) - lambda * s1;
            let m12 = (a + lambda) - lambda * s2;
            let det = em * m12 - ep * m11;
            if det == 0.0 {
                return Err(Error::BracketFailure("degenerate fallback system at c2".into()));
            }
            let c1c = (gx * m12 - ep * lambda * jump_stop) / det;
            let c2c = (em * lambda * jump_stop - m11 * gx) / det;
            let t = Trial {
                c1_coef: c1c,
                c2_coef: c2c,
                residual: linkage(a, lambda, f, &g, c2, c1c, c2c),
            };
            let s = assemble(a, lambda, f, c1, c2, c2, t, false);
            if s.min_slack(c2, 4000) < -1e-9 {
                return Err(Error::BracketFailure(format!(
                    "no contact point in ({c1}, {c2}] dominates the payoff; roots tried: {candidates:?}"
                )));
            }
            s
        }
    };
    sol.candidates = candidates;
    Ok(sol)
}

#[allow(clippy::too_many_arguments)]
fn assemble(a: f64, lambda: f64, f: &DiscreteMeasure, c1: f64, c2: f64, x: f64, t: Trial, smooth_fit: bool) -> AnalyticJumpSolution {
    AnalyticJumpSolution {
        c1_coef: t.c1_coef,
        c2_coef: t.c2_coef,
        x_star: x,
        a,
        lambda,
        jump_dist: f.clone(),
        c1,
        c2,
        smooth_fit,
        candidates: Vec::new(),
        linkage_residual: t.residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::sticky_straddle_solution;

    fn solve(jump: f64) -> AnalyticJumpSolution {
        jump_boundary_solution(0.1, 1.0, &DiscreteMeasure::point_mass(jump).unwrap(), 1.0, 4.0).unwrap()
    }

    #[test]
    fn linkage_and_contact_hold() {
        for jump in [0.5, 3.0, 5.0] {
            let s = solve(jump);
            assert!(s.linkage_residual.abs() <= 1e-8, "{jump}: {}", s.linkage_residual);
            let g = s.payoff();
            assert!((s.continuation(s.x_star) - g.eval(s.x_star)).abs() <= 1e-8);
            assert!(s.min_slack(12.0, 10_000) >= -1e-9);
        }
    }

    #[test]
    fn small_jump_has_interior_smooth_fit() {
        let s = solve(0.5);
        assert!(s.smooth_fit);
        assert!(s.x_star > 3.3 && s.x_star < 3.4, "{}", s.x_star);
        assert!((s.value(0.0) - 0.76939).abs() < 1e-4, "{}", s.value(0.0));
    }

    #[test]
    fn far_jump_stops_at_upper_strike() {
        let s = solve(5.0);
        assert!(!s.smooth_fit);
        assert_eq!(s.x_star, 4.0);
        assert!((s.value(0.0) - 3.0 / 1.1).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_jump_size() {
        let sols: Vec<_> = [0.5, 3.0, 5.0].iter().map(|&j| solve(j)).collect();
        for w in sols.windows(2) {
            assert!(w[1].x_star >= w[0].x_star);
            for i in 0..=1200 {
                let x = i as f64 * 0.01;
                assert!(w[1].value(x) >= w[0].value(x) - 1e-12);
            }
        }
    }

    #[test]
    fn vanishing_rate_approaches_sticky() {
        let s = jump_boundary_solution(0.1, 1e-6, &DiscreteMeasure::point_mass(0.5).unwrap(), 1.0, 4.0).unwrap();
        let sticky = sticky_straddle_solution(0.1, 1.0, 4.0).unwrap();
        for i in 0..=120 {
            let x = i as f64 * 0.1;
            assert!((s.value(x) - sticky.value(x)).abs() < 1e-4);
        }
    }
}
