//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};

use feller_stop::generators::Hazard;
use feller_stop::PenaltyParams;
use serde::{Deserialize, Serialize};

use crate::ValidationError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub process: ProcessSpec,
    pub payoff: PayoffSpec,
    pub discount_a: f64,
    /// Constant running reward `f`.
    #[serde(default)]
    pub running_reward: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: PenaltyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PayoffSpec {
    CallSpread { c1: f64, c2: f64 },
    /// Linear interpolation between `(x, g)` pairs, flat outside.
    Tabulated { x: Vec<f64>, g: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpleBoundary {
    Reflected,
    Sticky,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    PointMass { atom: f64 },
    Atoms { atoms: Vec<f64>, weights: Vec<f64> },
    /// Exponential law binned on the grid spacing, tail mass dropped below `tail`.
    Exponential {
        gamma: f64,
        #[serde(default = "default_tail")]
        tail: f64,
    },
}

fn default_tail() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant(f64),
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    ReflectedBm,
    StickyBm,
    StickyReflectingBm {
        c: f64,
    },
    JumpBoundaryBm {
        lambda_rate: f64,
        jump_dist: MeasureSpec,
    },
    SkewBm {
        beta: f64,
    },
    PiecewiseDiffusion {
        sigma: CoefficientSpec,
        rho: CoefficientSpec,
        mu: CoefficientSpec,
        floor: f64,
    },
    Levy {
        drift: f64,
        diffusion: f64,
        jump_rate: f64,
        jump_dist: MeasureSpec,
    },
    /// Brownian motion plus compound-Poisson jumps.
    PerturbedBm {
        boundary: SimpleBoundary,
        jump_rate: f64,
        jump_dist: MeasureSpec,
    },
    RegimeSwitching {
        regimes: Vec<SimpleBoundary>,
        q: Vec<Vec<f64>>,
    },
    SemiMarkov {
        hazard: Hazard,
        jump_dist: MeasureSpec,
        clock_n: usize,
        /// Defaults to the point where the survival drops below 1e-6.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clock_max: Option<f64>,
    },
}

impl ProcessSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ProcessSpec::ReflectedBm => "reflected_bm",
            ProcessSpec::StickyBm => "sticky_bm",
            ProcessSpec::StickyReflectingBm { .. } => "sticky_reflecting_bm",
            ProcessSpec::JumpBoundaryBm { .. } => "jump_boundary_bm",
            ProcessSpec::SkewBm { .. } => "skew_bm",
            ProcessSpec::PiecewiseDiffusion { .. } => "piecewise_diffusion",
            ProcessSpec::Levy { .. } => "levy",
            ProcessSpec::PerturbedBm { .. } => "perturbed_bm",
            ProcessSpec::RegimeSwitching { .. } => "regime_switching",
            ProcessSpec::SemiMarkov { .. } => "semi_markov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub n_paths: usize,
    /// Defaults to a horizon whose truncation bias is below half of `target_se`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub target_se: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Node count of the grid the chain is simulated on.
    pub grid_n: usize,
    /// Start points, snapped to the simulation grid.
    pub start_x: Vec<f64>,
    pub checkpoints: Vec<f64>,
    /// Region perturbation, in nodes, applied in both directions.
    pub shift: i64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            t_max: None,
            target_se: 1e-3,
            seed: 1,
            antithetic: false,
            grid_n: 61,
            start_x: vec![0.0, 1.0, 2.0],
            checkpoints: vec![1.0, 5.0, 20.0],
            shift: 8,
        }
    }
}

fn invalid(msg: String) -> ValidationError {
    ValidationError(msg)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ValidationError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Field-level checks; library constructors catch the rest.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if !(self.discount_a > 0.0) || !self.discount_a.is_finite() {
            return Err(invalid(format!("discount_a: must be positive, got {}", self.discount_a)));
        }
        if !self.running_reward.is_finite() {
            return Err(invalid("running_reward: must be finite".into()));
        }
        let GridSpec { lo, hi, n } = self.grid;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("grid: lo = {lo} must be below hi = {hi}")));
        }
        if n < 3 {
            return Err(invalid(format!("grid.n: need at least 3 nodes, got {n}")));
        }
        match &self.payoff {
            PayoffSpec::CallSpread { c1, c2 } => {
                if !(c1 < c2) || !c1.is_finite() || !c2.is_finite() {
                    return Err(invalid(format!("payoff.c1: must be below payoff.c2 (c1 = {c1}, c2 = {c2})")));
                }
            }
            PayoffSpec::Tabulated { x, g } => {
                if x.is_empty() || x.len() != g.len() {
                    return Err(invalid("payoff.tabulated: x and g must be non-empty and equally long".into()));
                }
                if x.windows(2).any(|w| !(w[0] < w[1])) || g.iter().chain(x).any(|v| !v.is_finite()) {
                    return Err(invalid("payoff.x: must be finite and strictly increasing".into()));
                }
            }
        }
        self.solver.validate().map_err(|e| invalid(format!("solver: {e}")))?;
        if let Some(mc) = &self.mc {
            if mc.n_paths == 0 || (mc.antithetic && mc.n_paths % 2 != 0) {
                return Err(invalid("mc.n_paths: must be positive, and even with antithetic".into()));
            }
            if mc.grid_n < 3 {
                return Err(invalid(format!("mc.grid_n: need at least 3 nodes, got {}", mc.grid_n)));
            }
            if !(mc.target_se > 0.0) {
                return Err(invalid("mc.target_se: must be positive".into()));
            }
            if mc.start_x.is_empty() {
                return Err(invalid("mc.start_x: need at least one start point".into()));
            }
        }
        Ok(())
    }
}
