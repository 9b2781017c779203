use thiserror::Error;

/// Errors produced while building or solving stopping problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo = {lo} must be strictly below hi = {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("a grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("grid nodes must be strictly increasing and finite (offending node {0})")]
    NonIncreasingNodes(usize),

    #[error("strikes must satisfy c1 < c2 (c1 = {c1}, c2 = {c2})")]
    InvalidStrikes { c1: f64, c2: f64 },

    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid state space: {0}")]
    InvalidSpace(String),

    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("discount rate must be positive, got {0}")]
    InvalidDiscount(f64),

    #[error("operation requires a uniform grid")]
    NonUniformGrid,

    #[error("jump atom {atom} lands outside the grid window [{lo}, {hi}]")]
    AtomOutsideDomain { atom: f64, lo: f64, hi: f64 },

    #[error("zero must be an interior node of the grid")]
    ZeroNotInterior,

    #[error("ellipticity violated: {name}({x}) = {value} is below the floor {floor}")]
    EllipticityViolation {
        name: &'static str,
        x: f64,
        value: f64,
        floor: f64,
    },

    #[error("coefficient discontinuity at x = {0} is not a grid node")]
    DiscontinuityOffGrid(f64),

    #[error("diffusion coefficient must be nonnegative, got {0}")]
    NegativeDiffusion(f64),

    #[error("rate must be nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("hazard must be nonnegative, got {value} at clock {s}")]
    NegativeHazard { s: f64, value: f64 },

    #[error("all regime generators must live on one shared grid")]
    GridMismatch,

    #[error("coupling describes {found} regimes but {expected} generators were given")]
    CouplingDimensionMismatch { expected: usize, found: usize },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("singular system: zero pivot at elimination step {0}")]
    SingularSystem(usize),

    #[error("linear solve residual {residual:e} exceeds {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("fixed point not reached within {iterations} iterations (last update {last_update:e})")]
    MaxItersExceeded { iterations: usize, last_update: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no tangency point between the payoff and the homogeneous solution")]
    NoTangency,

    #[error("no root in [{lo}, {hi}] (residuals {f_lo:e} and {f_hi:e})")]
    NoRootInBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("bracketing failed: {0}")]
    BracketFailure(String),

    #[error("boundary not supported here: {0}")]
    UnsupportedBoundary(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
