//! Finite-activity one-dimensional Lévy generators and bounded perturbations.

use std::sync::Arc;

use super::brownian::add_second_difference;
use super::{require_same_space, validate_generator, GeneratorBuilder, GeneratorMatrix, GENERATOR_TOL};
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid1D};
use crate::measure::DiscreteMeasure;
use crate::space::StateSpace;

/// `drift D_x + ½ diffusion² D_xx + jump_rate ∫ (u(x+y) - u(x)) F(dy)`.
///
/// Drift is upwinded. Jump targets snap to the nearest node and are clipped
/// to the grid window.
pub fn levy_cpd_generator(
    grid: &Grid1D,
    drift: f64,
    diffusion: f64,
    jump_rate: f64,
    jump_dist: &DiscreteMeasure,
) -> Result<GeneratorMatrix> {
    let h = grid.require_uniform()?;
    if !(diffusion >= 0.0) || !diffusion.is_finite() {
        return Err(Error::NegativeDiffusion(diffusion));
    }
    if !(jump_rate >= 0.0) || !jump_rate.is_finite() {
        return Err(Error::NegativeRate(jump_rate));
    }
    if !drift.is_finite() {
        return Err(Error::InvalidParameter(format!("drift must be finite, got {drift}")));
    }
    let space = Arc::new(StateSpace::line(grid.clone()));
    let mut b = GeneratorBuilder::new(space);
    let n = grid.len();
    if diffusion > 0.0 {
        add_second_difference(&mut b, grid, 0, 0.5 * diffusion * diffusion, true)?;
    }
    let xs = grid.nodes();
    for i in 0..n {
        if (i == 0 && grid.left_boundary() == BoundaryKind::Absorbing)
            || (i == n - 1 && grid.right_boundary() == BoundaryKind::Absorbing)
        {
            b.clear_row(i);
            continue;
        }
        if drift > 0.0 && i + 1 < n {
            b.add(i, i + 1, drift / h)?;
        } else if drift < 0.0 && i > 0 {
            b.add(i, i - 1, -drift / h)?;
        }
        if jump_rate > 0.0 {
            for (y, w) in jump_dist.iter() {
                b.add(i, grid.nearest_index(xs[i] + y), jump_rate * w)?;
            }
        }
    }
    b.build()
}

/// Pure compound-Poisson generator with intensity `rate` and jump law `dist`.
pub fn compound_poisson_generator(grid: &Grid1D, rate: f64, dist: &DiscreteMeasure) -> Result<GeneratorMatrix> {
    levy_cpd_generator(grid, 0.0, 0.0, rate, dist)
}

/// Entrywise sum `base + bounded_op`, re-validated.
///
/// The diagonal is recomputed from the summed jump rates, so adding a
/// compound-Poisson part gives the same matrix as building it in directly.
pub fn perturb_generator(base: &GeneratorMatrix, bounded_op: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    require_same_space(base, bounded_op)?;
    for op in [base, bounded_op] {
        let report = validate_generator(op);
        if !report.is_valid() {
            return Err(Error::InvalidGenerator(report.summary()));
        }
    }
    let mut b = GeneratorBuilder::new(base.space().clone());
    for op in [base, bounded_op] {
        for (i, j, v) in op.matrix().triplets() {
            if i != j {
                b.add(i, j, v)?;
            }
        }
    }
    for i in 0..base.dim() {
        let k = -(base.row_sum(i) + bounded_op.row_sum(i));
        if k > GENERATOR_TOL {
            b.kill(i, k)?;
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bm_generator, BmBoundary};
    use crate::grid::make_uniform_grid;
    use crate::solver::resolvent_apply;
    use crate::function::{sup_norm_diff, SampledFunction};

    fn none() -> DiscreteMeasure {
        DiscreteMeasure::point_mass(1.0).unwrap()
    }

    #[test]
    fn pure_bm_matches_bm_generator() {
        let grid = make_uniform_grid(0.0, 5.0, 51).unwrap();
        let a = levy_cpd_generator(&grid, 0.0, 1.0, 0.0, &none()).unwrap();
        let b = bm_generator(&grid, &BmBoundary::Reflected).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn upwind_drift_row() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let g = levy_cpd_generator(&grid, 1.0, 0.0, 0.0, &none()).unwrap();
        assert!((g.rate(4, 4) + 10.0).abs() < 1e-12);
        assert!((g.rate(4, 5) - 10.0).abs() < 1e-12);
        assert_eq!(g.rate(4, 3), 0.0);
        assert!(g.is_absorbing(10));
    }

    #[test]
    fn bad_parameters() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            levy_cpd_generator(&grid, 0.0, -1.0, 0.0, &none()),
            Err(Error::NegativeDiffusion(_))
        ));
        assert!(matches!(
            levy_cpd_generator(&grid, 0.0, 1.0, -1.0, &none()),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn jumps_past_the_window_are_clipped() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let g = compound_poisson_generator(&grid, 2.0, &DiscreteMeasure::point_mass(0.75).unwrap()).unwrap();
        assert_eq!(g.rate(5, 10), 2.0);
        assert_eq!(g.rate(3, 10), 2.0);
        assert!(g.is_absorbing(10));
        assert!(g.is_conservative());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let grid = make_uniform_grid(0.0, 1.0, 11).unwrap();
        let base = bm_generator(&grid, &BmBoundary::Reflected).unwrap();
        let zero = GeneratorBuilder::new(base.space().clone()).build().unwrap();
        assert_eq!(perturb_generator(&base, &zero).unwrap().matrix(), base.matrix());
    }

    #[test]
    fn perturbation_space_mismatch() {
        let a = bm_generator(&make_uniform_grid(0.0, 1.0, 11).unwrap(), &BmBoundary::Reflected).unwrap();
        let b = bm_generator(&make_uniform_grid(0.0, 2.0, 11).unwrap(), &BmBoundary::Reflected).unwrap();
        assert!(matches!(perturb_generator(&a, &b), Err(Error::SpaceMismatch(_))));
    }

    // Two construction paths for reflected BM plus exponential upward jumps.
    #[test]
    fn levy_equals_perturbed_bm() {
        let grid = make_uniform_grid(0.0, 12.0, 241).unwrap();
        let f = DiscreteMeasure::discretized_exponential(1.0, grid.step(), 1e-12).unwrap();
        let direct = levy_cpd_generator(&grid, 0.0, 1.0, 1.0, &f).unwrap();
        let base = bm_generator(&grid, &BmBoundary::Reflected).unwrap();
        let cp = compound_poisson_generator(&grid, 1.0, &f).unwrap();
        let summed = perturb_generator(&base, &cp).unwrap();
        for i in 0..grid.len() {
            assert!(summed.row_sum(i).abs() <= 1e-10);
            assert!((summed.row_sum(i) - base.row_sum(i)).abs() <= 1e-10);
        }
        let h = SampledFunction::from_x_fn(direct.space().clone(), |x| (x - 1.0).max(0.0).min(3.0)).unwrap();
        let h2 = SampledFunction::new(summed.space().clone(), h.values().to_vec()).unwrap();
        let u1 = resolvent_apply(&direct, 0.1, &h).unwrap();
        let u2 = resolvent_apply(&summed, 0.1, &h2).unwrap();
        let d = sup_norm_diff(&u1, &u2).unwrap();
        assert!(d <= 1e-10, "{d:e}");
    }
}
