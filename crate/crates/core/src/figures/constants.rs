//! Parameters of the two reference figures.

/// Discount rate `a`.
pub const DISCOUNT: f64 = 0.1;
pub const C1: f64 = 1.0;
pub const C2: f64 = 4.0;

/// Rate `λ` of the jump away from 0.
pub const JUMP_RATE: f64 = 1.0;
pub const JUMP_SIZES: [f64; 3] = [0.5, 3.0, 5.0];

/// Switching rates; both directions use the same value.
pub const Q1: f64 = 0.1;
pub const Q2: f64 = 0.1;

/// Truncation point and node count of the default grid (`h = 0.0125`).
pub const GRID_HI: f64 = 12.0;
pub const GRID_N: usize = 961;
