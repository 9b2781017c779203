//! Divergence-form diffusion `(rho/2) D_x(sigma D_x u) + mu D_x u` with
//! coefficients that may jump at finitely many points.

use std::fmt;
use std::sync::Arc;

use super::{GeneratorBuilder, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid1D};
use crate::space::StateSpace;

type Piece = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A coefficient that is continuous between sorted break points.
#[derive(Clone)]
pub struct Coefficient {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("breaks", &self.breaks)
            .field("pieces", &self.pieces.len())
            .finish()
    }
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Self {
            breaks: Vec::new(),
            pieces: vec![Arc::new(move |_| c)],
        }
    }

    pub fn smooth(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            breaks: Vec::new(),
            pieces: vec![Arc::new(f)],
        }
    }

    /// `pieces[k]` applies between `breaks[k-1]` and `breaks[k]`.
    pub fn piecewise(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} break points need {} pieces, got {}",
                breaks.len(),
                breaks.len() + 1,
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("break points must be finite and strictly increasing".into()));
        }
        Ok(Self { breaks, pieces })
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let pieces = values
            .into_iter()
            .map(|v| Arc::new(move |_: f64| v) as Piece)
            .collect();
        Self::piecewise(breaks, pieces)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn piece_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b < x)
    }

    /// One-sided limits at `x`; equal away from break points.
    pub fn limits(&self, x: f64) -> (f64, f64) {
        let k = self.piece_index(x);
        if k < self.breaks.len() && self.breaks[k] == x {
            (self.pieces[k](x), self.pieces[k + 1](x))
        } else {
            let v = self.pieces[k](x);
            (v, v)
        }
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseDiffusionSpec {
    pub sigma: Coefficient,
    pub rho: Coefficient,
    pub mu: Coefficient,
    /// Ellipticity floor for `sigma` and `rho`.
    pub floor: f64,
}

impl PiecewiseDiffusionSpec {
    /// Sorted union of all coefficient break points.
    pub fn discontinuity_set(&self) -> Vec<f64> {
        let mut j: Vec<f64> = [&self.sigma, &self.rho, &self.mu]
            .iter()
            .flat_map(|c| c.breaks.iter().copied())
            .collect();
        j.sort_by(f64::total_cmp);
        j.dedup();
        j
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Finite-volume generator with harmonic face averaging of `sigma`.
///
/// Nodal values at a break point are the harmonic mean of the one-sided limits
/// for `sigma` and `rho`, and the arithmetic mean for `mu`. The grid need not be
/// uniform.
pub fn piecewise_diffusion_generator(grid: &Grid1D, spec: &PiecewiseDiffusionSpec) -> Result<GeneratorMatrix> {
    if !(spec.floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ellipticity floor must be positive, got {}",
            spec.floor
        )));
    }
    let xs = grid.nodes();
    let n = xs.len();
    let tol = 1e-9 * (xs[n - 1] - xs[0]);
    for &j in &spec.discontinuity_set() {
        if j > xs[0] - tol && j < xs[n - 1] + tol && grid.index_of(j, tol).is_none() {
            return Err(Error::DiscontinuityOffGrid(j));
        }
    }

    let nodal = |c: &Coefficient, name: &'static str, x: f64| -> Result<f64> {
        let (l, r) = c.limits(x);
        if !l.is_finite() || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("{name}({x}) is not finite")));
        }
        for v in [l, r] {
            if v < spec.floor {
                return Err(Error::EllipticityViolation {
                    name,
                    x,
                    value: v,
                    floor: spec.floor,
                });
            }
        }
        Ok(harmonic(l, r))
    };
    let mut sigma = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    for &x in xs {
        sigma.push(nodal(&spec.sigma, "sigma", x)?);
        rho.push(nodal(&spec.rho, "rho", x)?);
        let (l, r) = spec.mu.limits(x);
        if !l.is_finite() || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("mu({x}) is not finite")));
        }
        mu.push(0.5 * (l + r));
    }

    let space = Arc::new(StateSpace::line(grid.clone()));
    let mut b = GeneratorBuilder::new(space);
    for i in 0..n {
        let at_left = i == 0;
        let at_right = i == n - 1;
        if (at_left && grid.left_boundary() == BoundaryKind::Absorbing)
            || (at_right && grid.right_boundary() == BoundaryKind::Absorbing)
        {
            continue;
        }
        // Ghost nodes mirror the neighbour, which doubles the single face flux.
        if at_left {
            let h = xs[1] - xs[0];
            b.add(i, 1, rho[0] * harmonic(sigma[0], sigma[1]) / (h * h))?;
            b.add(i, 1, mu[0].max(0.0) / h)?;
        } else if at_right {
            let h = xs[i] - xs[i - 1];
            b.add(i, i - 1, rho[i] * harmonic(sigma[i - 1], sigma[i]) / (h * h))?;
            b.add(i, i - 1, (-mu[i]).max(0.0) / h)?;
        } else {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            let vol = 0.5 * (hl + hr);
            let sl = harmonic(sigma[i - 1], sigma[i]);
            let sr = harmonic(sigma[i], sigma[i + 1]);
            b.add(i, i - 1, 0.5 * rho[i] * sl / (hl * vol) + (-mu[i]).max(0.0) / hl)?;
            b.add(i, i + 1, 0.5 * rho[i] * sr / (hr * vol) + mu[i].max(0.0) / hr)?;
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bm_generator, BmBoundary};
    use crate::grid::make_uniform_grid;
    use crate::linalg::dense_solve;

    fn unit() -> PiecewiseDiffusionSpec {
        PiecewiseDiffusionSpec {
            sigma: Coefficient::constant(1.0),
            rho: Coefficient::constant(1.0),
            mu: Coefficient::constant(0.0),
            floor: 0.5,
        }
    }

    #[test]
    fn unit_coefficients_reduce_to_bm() {
        let grid = make_uniform_grid(0.0, 2.0, 41).unwrap();
        let a = piecewise_diffusion_generator(&grid, &unit()).unwrap();
        let b = bm_generator(&grid, &BmBoundary::Reflected).unwrap();
        for i in 0..41 {
            for j in 0..41 {
                assert!((a.rate(i, j) - b.rate(i, j)).abs() <= 1e-9 * b.rate(1, 1).abs());
            }
        }
    }

    #[test]
    fn nodal_value_at_jump_is_harmonic_mean() {
        let sigma = Coefficient::piecewise_constant(vec![0.0], vec![1.0, 2.0]).unwrap();
        let (l, r) = sigma.limits(0.0);
        assert_eq!(harmonic(l, r), 4.0 / 3.0);
        assert_eq!(sigma.limits(-0.5), (1.0, 1.0));
        assert_eq!(sigma.limits(0.5), (2.0, 2.0));
    }

    #[test]
    fn off_grid_break_rejected() {
        let grid = make_uniform_grid(-1.0, 1.0, 21).unwrap();
        let mut spec = unit();
        spec.sigma = Coefficient::piecewise_constant(vec![0.05], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            piecewise_diffusion_generator(&grid, &spec),
            Err(Error::DiscontinuityOffGrid(_))
        ));
    }

    #[test]
    fn ellipticity_floor_enforced() {
        let grid = make_uniform_grid(-1.0, 1.0, 21).unwrap();
        let mut spec = unit();
        spec.rho = Coefficient::smooth(|x| 1.0 + x);
        assert!(matches!(
            piecewise_diffusion_generator(&grid, &spec),
            Err(Error::EllipticityViolation { name: "rho", .. })
        ));
    }

    #[test]
    fn upwind_drift() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let mut spec = unit();
        spec.mu = Coefficient::constant(-3.0);
        let g = piecewise_diffusion_generator(&grid, &spec).unwrap();
        assert!((g.rate(5, 4) - (50.0 + 30.0)).abs() < 1e-9);
        assert!((g.rate(5, 6) - 50.0).abs() < 1e-9);
    }

    // Harmonic functions of D_x(sigma D_x u) have sigma u' constant.
    #[test]
    fn flux_continuity_across_jump() {
        let (l, n) = (1.0, 81);
        let grid = make_uniform_grid(-l, l, n).unwrap();
        let h = grid.step();
        let mut spec = unit();
        spec.sigma = Coefficient::piecewise_constant(vec![0.0], vec![1.0, 2.0]).unwrap();
        let g = piecewise_diffusion_generator(&grid, &spec).unwrap();
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        rhs[n - 1] = 1.0;
        for (i, row) in a.iter_mut().enumerate().take(n - 1).skip(1) {
            let (cols, vals) = g.matrix().row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        let u = dense_solve(a, rhs).unwrap();
        // slope s on the left, s/2 on the right, u(-l) = 0, u(l) = 1.
        let s = 1.0 / (l + 0.5 * l);
        let exact = |x: f64| if x <= 0.0 { s * (x + l) } else { s * l + 0.5 * s * x };
        let err = grid
            .nodes()
            .iter()
            .zip(&u)
            .fold(0.0_f64, |m, (&x, &ui)| m.max((ui - exact(x)).abs()));
        assert!(err <= 2.0 * h, "sup error {err} vs 2h = {}", 2.0 * h);
    }
}
