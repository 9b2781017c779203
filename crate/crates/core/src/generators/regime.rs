//! Regime-switching assembly: one generator per regime on a shared grid,
//! coupled by switching rates `q_ij(x)`.

use std::fmt;
use std::sync::Arc;

use super::{GeneratorBuilder, GeneratorMatrix, GENERATOR_TOL};
use crate::error::{Error, Result};
use crate::space::{Layout, StateSpace};

type RateFn = Arc<dyn Fn(usize, usize, f64) -> f64 + Send + Sync>;

/// Switching rates between `n` regimes; `rate(i, j, x)` for `i != j`.
#[derive(Clone)]
pub struct RegimeCouplingSpec {
    n: usize,
    rate: RateFn,
}

impl fmt::Debug for RegimeCouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegimeCouplingSpec").field("n", &self.n).finish()
    }
}

impl RegimeCouplingSpec {
    /// State-independent rates; the diagonal must be zero.
    pub fn constant(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        for (i, row) in q.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter("coupling matrix is not square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if i == j && v != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "coupling diagonal must be zero, q[{i}][{i}] = {v}"
                    )));
                }
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeRate(v));
                }
            }
        }
        Ok(Self {
            n,
            rate: Arc::new(move |i, j, _| q[i][j]),
        })
    }

    pub fn from_fn(n: usize, rate: impl Fn(usize, usize, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            n,
            rate: Arc::new(rate),
        }
    }

    /// Two regimes switching at rates `q1` (0 to 1) and `q2` (1 to 0).
    pub fn two_state(q1: f64, q2: f64) -> Result<Self> {
        Self::constant(vec![vec![0.0, q1], vec![q2, 0.0]])
    }

    pub fn regimes(&self) -> usize {
        self.n
    }

    pub fn rate(&self, i: usize, j: usize, x: f64) -> f64 {
        (self.rate)(i, j, x)
    }
}

/// Block-diagonal regime generators plus switching rates at equal nodes.
pub fn regime_switching_generator(
    per_regime: &[GeneratorMatrix],
    coupling: &RegimeCouplingSpec,
) -> Result<GeneratorMatrix> {
    let first = per_regime
        .first()
        .ok_or_else(|| Error::InvalidParameter("no regime generators given".into()))?;
    if coupling.regimes() != per_regime.len() {
        return Err(Error::CouplingDimensionMismatch {
            expected: per_regime.len(),
            found: coupling.regimes(),
        });
    }
    let grid = first.space().grid().clone();
    for g in per_regime {
        if g.space().layout() != Layout::Line || g.space().grid() != &grid {
            return Err(Error::GridMismatch);
        }
    }
    let nx = grid.len();
    let space = Arc::new(StateSpace::regimes(per_regime.len(), grid.clone())?);
    let mut b = GeneratorBuilder::new(space.clone());
    for (r, g) in per_regime.iter().enumerate() {
        for (i, j, v) in g.matrix().triplets() {
            if i != j {
                b.add(space.index(r, i), space.index(r, j), v)?;
            }
        }
        if !g.is_conservative() {
            for i in 0..nx {
                let k = -g.row_sum(i);
                if k > GENERATOR_TOL {
                    b.kill(space.index(r, i), k)?;
                }
            }
        }
        for s in 0..per_regime.len() {
            if s == r {
                continue;
            }
            for (k, &x) in grid.nodes().iter().enumerate() {
                let q = coupling.rate(r, s, x);
                if !(q >= 0.0) || !q.is_finite() {
                    return Err(Error::NegativeRate(q));
                }
                b.add(space.index(r, k), space.index(s, k), q)?;
            }
        }
    }
    b.build()
}
