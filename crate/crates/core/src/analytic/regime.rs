use serde::Serialize;

use super::halfline::{halfline_resolvent, HalfLineSolution, PiecewiseLinear};
use super::roots::bisect;
use crate::error::{Error, Result};
use crate::generators::BmBoundary;
use crate::linalg::dense_solve;
use crate::payoff::CallSpread;

const SCAN: usize = 400;

/// Two-regime Brownian motion on the half-line: regime 0 is sticky at 0,
/// regime 1 reflected; `q1` switches 0 → 1 and `q2` switches 1 → 0.
///
/// Regime `m = 1 - l` stops at `x1_star`, regime `l` continues until
/// `x2_star`. Below `x1_star` both value functions are combinations
/// `Σ_k A_k α_{ik} e^{β_k x}`; between the two points regime `l` solves
/// `(a + q_l - ½ D_xx) u = q_l g`, i.e. `u = v_l + B1 e^{γx} + B2 e^{-γx}`.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticRegimeSolution {
    #[serde(rename = "A")]
    pub a_coef: [f64; 4],
    #[serde(rename = "B")]
    pub b_coef: [f64; 2],
    pub x1_star: f64,
    pub x2_star: f64,
    pub l: usize,
    pub beta: [f64; 4],
    pub gamma: [f64; 2],
    /// `alpha[i][k]`: weight of mode `k` in regime `i`.
    pub alpha: [[f64; 4]; 2],
    pub a: f64,
    pub q1: f64,
    pub q2: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(skip)]
    particular: HalfLineSolution,
}

pub fn regime_boundary(i: usize) -> BmBoundary {
    if i == 0 {
        BmBoundary::Sticky
    } else {
        BmBoundary::Reflected
    }
}

/// Exponents and eigenvector weights of the coupled homogeneous system.
///
/// `alpha[1][k] = (a + q1 - ½ β_k²) / q1`, which is 1 for `β = ±√(2a)` and
/// `-q2/q1` for `β = ±√(2(a+q1+q2))`.
pub fn fundamental_modes(a: f64, q1: f64, q2: f64) -> ([f64; 4], [[f64; 4]; 2]) {
    let b1 = (2.0 * a).sqrt();
    let b3 = (2.0 * (a + q1 + q2)).sqrt();
    let beta = [b1, -b1, b3, -b3];
    let mut alpha = [[1.0; 4]; 2];
    for k in 0..4 {
        alpha[1][k] = (a + q1 - 0.5 * beta[k] * beta[k]) / q1;
    }
    (beta, alpha)
}

impl AnalyticRegimeSolution {
    fn coupled(&self, i: usize, x: f64) -> (f64, f64) {
        let mut u = 0.0;
        let mut du = 0.0;
        for k in 0..4 {
            let e = self.a_coef[k] * self.alpha[i][k] * (self.beta[k] * x).exp();
            u += e;
            du += self.beta[k] * e;
        }
        (u, du)
    }

    fn middle(&self, x: f64) -> (f64, f64) {
        let g = self.gamma[self.l];
        let (ep, em) = ((g * x).exp(), (-g * x).exp());
        (
            self.particular.eval(x) + self.b_coef[0] * ep + self.b_coef[1] * em,
            self.particular.deriv(x) + g * (self.b_coef[0] * ep - self.b_coef[1] * em),
        )
    }

    pub fn payoff(&self) -> CallSpread {
        CallSpread {
            c1: self.c1,
            c2: self.c2,
        }
    }

    /// Value and derivative in `regime` at `x`.
    pub fn value_and_slope(&self, regime: usize, x: f64) -> (f64, f64) {
        let g = self.payoff();
        if x < self.x1_star {
            self.coupled(regime, x)
        } else if regime == self.l && x < self.x2_star {
            self.middle(x)
        } else {
            (g.eval(x), g.slope(x))
        }
    }

    pub fn value(&self, regime: usize, x: f64) -> f64 {
        self.value_and_slope(regime, x).0
    }

    /// Residuals of the linkage system at the reported boundaries: two
    /// boundary conditions at 0, value and slope matching of regime `m` at
    /// `x1`, continuity of value and slope of regime `l` at `x1`, and value and
    /// slope matching of regime `l` at `x2`.
    pub fn linkage_residuals(&self) -> [f64; 8] {
        let m = 1 - self.l;
        let g = self.payoff();
        let mut r = [0.0; 8];
        for k in 0..4 {
            r[0] += self.a_coef[k] * self.alpha[0][k] * self.beta[k] * self.beta[k];
            r[1] += self.a_coef[k] * self.alpha[1][k] * self.beta[k];
        }
        let (um, dum) = self.coupled(m, self.x1_star);
        r[2] = um - g.eval(self.x1_star);
        r[3] = dum - 1.0;
        let (ul, dul) = self.coupled(self.l, self.x1_star);
        let (vm, dvm) = self.middle(self.x1_star);
        r[4] = ul - vm;
        r[5] = dul - dvm;
        let (v2, dv2) = self.middle(self.x2_star);
        r[6] = v2 - g.eval(self.x2_star);
        r[7] = if self.x2_star < self.c2 { dv2 - 1.0 } else { 0.0 };
        r
    }

    /// `min_i min_x (u_i - g)` over `n` points of `[0, hi]`.
    pub fn min_slack(&self, hi: f64, n: usize) -> f64 {
        let g = self.payoff();
        (0..=n)
            .map(|j| hi * j as f64 / n as f64)
            .flat_map(|x| [0, 1].map(|i| self.value(i, x) - g.eval(x)))
            .fold(f64::INFINITY, f64::min)
    }
}

struct Setup {
    a: f64,
    q: [f64; 2],
    c1: f64,
    c2: f64,
    l: usize,
    beta: [f64; 4],
    alpha: [[f64; 4]; 2],
    gamma: [f64; 2],
    particular: HalfLineSolution,
}

impl Setup {
    /// Coefficients for a trial `x1`, before locating `x2`.
    fn trial(&self, x1: f64) -> Result<AnalyticRegimeSolution> {
        let m = 1 - self.l;
        let g = CallSpread {
            c1: self.c1,
            c2: self.c2,
        };
        let mut rows = vec![vec![0.0; 4]; 4];
        for k in 0..4 {
            let (b, e) = (self.beta[k], (self.beta[k] * x1).exp());
            rows[0][k] = self.alpha[0][k] * b * b;
            rows[1][k] = self.alpha[1][k] * b;
            rows[2][k] = self.alpha[m][k] * e;
            rows[3][k] = self.alpha[m][k] * b * e;
        }
        let a = dense_solve(rows, vec![0.0, 0.0, g.eval(x1), 1.0])?;
        let mut sol = AnalyticRegimeSolution {
            a_coef: [a[0], a[1], a[2], a[3]],
            b_coef: [0.0; 2],
            x1_star: x1,
            x2_star: self.c2,
            l: self.l,
            beta: self.beta,
            gamma: self.gamma,
            alpha: self.alpha,
            a: self.a,
            q1: self.q[0],
            q2: self.q[1],
            c1: self.c1,
            c2: self.c2,
            particular: self.particular.clone(),
        };
        let (u, du) = sol.coupled(self.l, x1);
        let gm = self.gamma[self.l];
        let (ep, em) = ((gm * x1).exp(), (-gm * x1).exp());
        let su = u - self.particular.eval(x1);
        let sd = (du - self.particular.deriv(x1)) / gm;
        sol.b_coef = [0.5 * (su + sd) / ep, 0.5 * (su - sd) / em];
        Ok(sol)
    }

    /// Lowest point of `u_l - g` on `[x1, c2]`.
    fn lowest_contact(&self, sol: &AnalyticRegimeSolution) -> (f64, f64) {
        let g = sol.payoff();
        let x1 = sol.x1_star;
        let gap = |x: f64| sol.middle(x).0 - g.eval(x);
        let n = SCAN;
        let xs: Vec<f64> = (0..=n).map(|i| x1 + (self.c2 - x1) * i as f64 / n as f64).collect();
        let (imin, _) = xs
            .iter()
            .map(|&x| gap(x))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty scan");
        let lo = xs[imin.saturating_sub(1)];
        let hi = xs[(imin + 1).min(n)];
        let slope = |x: f64| sol.middle(x).1 - 1.0;
        let x2 = if slope(lo) < 0.0 && slope(hi) > 0.0 {
            bisect(slope, lo, hi, 1e-14).unwrap_or(xs[imin])
        } else {
            xs[imin]
        };
        (x2, gap(x2))
    }
}

/// Closed-form value for the two-regime sticky/reflected problem, found by
/// bisection on `x1` until regime `l` just touches the payoff.
pub fn regime_switching_solution(a: f64, q1: f64, q2: f64, c1: f64, c2: f64, l: usize) -> Result<AnalyticRegimeSolution> {
    regime_switching_solution_with(a, q1, q2, c1, c2, l, &regime_boundary(l))
}

/// As [`regime_switching_solution`], with the boundary used for the
/// particular solution of the middle region chosen explicitly.
pub fn regime_switching_solution_with(
    a: f64,
    q1: f64,
    q2: f64,
    c1: f64,
    c2: f64,
    l: usize,
    particular_boundary: &BmBoundary,
) -> Result<AnalyticRegimeSolution> {
    if !(a > 0.0) {
        return Err(Error::InvalidDiscount(a));
    }
    if !(q1 > 0.0 && q2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "switching rates must be positive, got {q1} and {q2}"
        )));
    }
    if l > 1 {
        return Err(Error::InvalidParameter(format!("regime index must be 0 or 1, got {l}")));
    }
    let g = CallSpread::new(c1, c2)?;
    let q = [q1, q2];
    let (beta, alpha) = fundamental_modes(a, q1, q2);
    let gamma = [(2.0 * (a + q1)).sqrt(), (2.0 * (a + q2)).sqrt()];
    let h = PiecewiseLinear::call_spread(&g)?.scaled(q[l]);
    let particular = halfline_resolvent(a + q[l], particular_boundary, &h)?;
    let setup = Setup {
        a,
        q,
        c1,
        c2,
        l,
        beta,
        alpha,
        gamma,
        particular,
    };
    let touch = |x1: f64| -> f64 {
        match setup.trial(x1) {
            Ok(s) => setup.lowest_contact(&s).1,
            Err(_) => f64::NAN,
        }
    };
    let eps = 1e-9 * c2;
    let n = SCAN;
    let xs: Vec<f64> = (0..=n).map(|i| c1 + eps + (c2 - c1 - 2.0 * eps) * i as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| touch(x)).collect();
    let k = (0..n)
        .find(|&i| fs[i].is_finite() && fs[i + 1].is_finite() && fs[i] < 0.0 && fs[i + 1] >= 0.0)
        .ok_or_else(|| {
            Error::BracketFailure(format!(
                "touch residual never crosses zero on ({c1}, {c2}); ends {:e}, {:e}",
                fs[0], fs[n]
            ))
        })?;
    let x1 = bisect(touch, xs[k], xs[k + 1], 1e-13)?;
    let mut sol = setup.trial(x1)?;
    sol.x2_star = setup.lowest_contact(&sol).0;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{reflected_straddle_solution, sticky_straddle_solution};

    #[test]
    fn eigen_weights() {
        let (beta, alpha) = fundamental_modes(0.1, 0.1, 0.1);
        assert!((alpha[1][0] - 1.0).abs() < 1e-15);
        assert!((alpha[1][1] - 1.0).abs() < 1e-15);
        assert!((alpha[1][2] + 1.0).abs() < 1e-14);
        assert!((alpha[1][3] + 1.0).abs() < 1e-14);
        assert!((beta[2] - 0.6_f64.sqrt()).abs() < 1e-15);
        // Unequal rates: the weights still solve the coupled system.
        let (a, q1, q2) = (0.2, 0.3, 0.7);
        let (beta, alpha) = fundamental_modes(a, q1, q2);
        for k in 0..4 {
            let b2 = 0.5 * beta[k] * beta[k];
            let r0 = (a - b2) * alpha[0][k] - q1 * (alpha[1][k] - alpha[0][k]);
            let r1 = (a - b2) * alpha[1][k] - q2 * (alpha[0][k] - alpha[1][k]);
            assert!(r0.abs() < 1e-14 && r1.abs() < 1e-14, "{k}: {r0} {r1}");
        }
        assert!((alpha[1][2] + q2 / q1).abs() < 1e-14);
    }

    #[test]
    fn linkage_system_holds() {
        let s = regime_switching_solution(0.1, 0.1, 0.1, 1.0, 4.0, 1).unwrap();
        let r = s.linkage_residuals();
        assert!(r.iter().all(|v| v.abs() <= 1e-8), "{r:?}");
        assert!(s.min_slack(12.0, 10_000) >= -1e-9);
    }

    #[test]
    fn ordering_between_single_regime_solutions() {
        let s = regime_switching_solution(0.1, 0.1, 0.1, 1.0, 4.0, 1).unwrap();
        let xs = sticky_straddle_solution(0.1, 1.0, 4.0).unwrap().x_star;
        let xr = reflected_straddle_solution(0.1, 1.0, 4.0).unwrap().x_star;
        assert!(xs <= s.x1_star && s.x1_star <= s.x2_star && s.x2_star <= xr);
    }

    #[test]
    fn smooth_at_first_boundary() {
        let s = regime_switching_solution(0.1, 0.1, 0.1, 1.0, 4.0, 1).unwrap();
        let d = 1e-6;
        let x = s.x1_star;
        let (ul, _) = s.value_and_slope(1, x - d);
        let (ur, _) = s.value_and_slope(1, x + d);
        assert!((ul - ur).abs() < 1e-5);
        let left = (s.value(1, x - d) - s.value(1, x - 2.0 * d)) / d;
        let right = (s.value(1, x + 2.0 * d) - s.value(1, x + d)) / d;
        assert!((left - right).abs() < 1e-4);
    }

    #[test]
    fn particular_boundary_is_immaterial() {
        let a = regime_switching_solution(0.1, 0.1, 0.1, 1.0, 4.0, 1).unwrap();
        let b = regime_switching_solution_with(0.1, 0.1, 0.1, 1.0, 4.0, 1, &BmBoundary::Sticky).unwrap();
        for i in 0..=1200 {
            let x = i as f64 * 0.01;
            for r in 0..2 {
                assert!((a.value(r, x) - b.value(r, x)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn weak_coupling_decouples() {
        let s = regime_switching_solution(0.1, 1e-9, 1e-9, 1.0, 4.0, 1).unwrap();
        let xs = sticky_straddle_solution(0.1, 1.0, 4.0).unwrap();
        let xr = reflected_straddle_solution(0.1, 1.0, 4.0).unwrap();
        assert!((s.x1_star - xs.x_star).abs() < 1e-4);
        assert!((s.x2_star - xr.x_star).abs() < 1e-4);
        for i in 0..=120 {
            let x = i as f64 * 0.1;
            assert!((s.value(0, x) - xs.value(x)).abs() < 1e-5);
            assert!((s.value(1, x) - xr.value(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_zero_coupling() {
        assert!(regime_switching_solution(0.1, 0.0, 0.1, 1.0, 4.0, 1).is_err());
    }
}
