use crate::error::{Error, Result};
use crate::function::{max_abs, SampledFunction};
use crate::generators::GeneratorMatrix;
use crate::linalg::{CsrMatrix, SparseLu};

const RESIDUAL_REL: f64 = 1e-10;
const REFINE_STEPS: usize = 3;
const REFINE_TARGET: f64 = 1e-14;

/// Factored `(lambda I + diag(extra) - G)`, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct Resolvent {
    lambda: f64,
    system: CsrMatrix,
    lu: SparseLu,
}

impl Resolvent {
    pub fn new(g: &GeneratorMatrix, lambda: f64) -> Result<Self> {
        Self::with_extra_diagonal(g, lambda, None)
    }

    /// `extra[i] >= 0` is added to the diagonal shift of row `i`.
    pub fn with_extra_diagonal(g: &GeneratorMatrix, lambda: f64, extra: Option<&[f64]>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "resolvent parameter must be positive, got {lambda}"
            )));
        }
        let system = g
            .matrix()
            .shifted_negation(|i| lambda + extra.map_or(0.0, |e| e[i]));
        let order = g.space().elimination_order();
        let lu = SparseLu::factor(&system, order.as_deref())?;
        Ok(Self { lambda, system, lu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Solves the shifted system, refining until the residual is at most
    /// `1e-10 (1 + |h|)`.
    pub fn solve(&self, h: &[f64]) -> Result<Vec<f64>> {
        let scale = 1.0 + max_abs(h);
        let bound = RESIDUAL_REL * scale;
        let mut u = self.lu.solve(h);
        let mut best = f64::INFINITY;
        for step in 0..=REFINE_STEPS {
            let au = self.system.mul_vec(&u);
            let r: Vec<f64> = h.iter().zip(&au).map(|(hi, ai)| hi - ai).collect();
            let res = max_abs(&r);
            // Refine toward rounding level; stop once it no longer helps.
            if res <= REFINE_TARGET * scale || res >= 0.5 * best || step == REFINE_STEPS {
                best = best.min(res);
                break;
            }
            best = res;
            let du = self.lu.solve(&r);
            u.iter_mut().zip(du).for_each(|(ui, d)| *ui += d);
        }
        if best <= bound {
            Ok(u)
        } else {
            Err(Error::ResidualTooLarge { residual: best, bound })
        }
    }
}

/// `R_lambda h = (lambda I - G)^{-1} h`.
pub fn resolvent_apply(g: &GeneratorMatrix, lambda: f64, h: &SampledFunction) -> Result<SampledFunction> {
    if h.len() != g.dim() {
        return Err(Error::SpaceMismatch(format!(
            "function has {} values, generator acts on {}",
            h.len(),
            g.dim()
        )));
    }
    let u = Resolvent::new(g, lambda)?.solve(h.values())?;
    SampledFunction::new(h.space().clone(), u)
}
