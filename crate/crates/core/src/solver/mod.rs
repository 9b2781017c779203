//! Penalized resolvent iteration for the stopping problem.

mod penalty;
mod resolvent;
mod value;

pub use penalty::{penalty_fixed_point, PenaltyParams, PenaltySolution, PicardMap, WarmStart, DEFAULT_SCHEDULE_STAGES};
pub use resolvent::{resolvent_apply, Resolvent};
pub use value::{
    complementarity_residual, penalty_residual, solve_value_function, stopping_rule, Direction, ExerciseBoundary,
    SolveDiagnostics, SolveWarning, StageDiagnostics, StoppingRegion, ValueFunction,
};
