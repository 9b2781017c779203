//! Closed-form value functions for Brownian benchmarks with the call-spread
//! payoff, used as oracles for the numerical solver.

mod halfline;
mod jump;
mod regime;
pub mod roots;
mod single;

pub use halfline::{halfline_resolvent, HalfLineSolution, PiecewiseLinear};
pub use jump::{jump_boundary_solution, AnalyticJumpSolution};
pub use regime::{
    fundamental_modes, regime_boundary, regime_switching_solution, regime_switching_solution_with,
    AnalyticRegimeSolution,
};
pub use single::{
    reflected_straddle_solution, sticky_straddle_solution, tangency_solution, AnalyticReflectedSolution,
    TangencyBoundary,
};
