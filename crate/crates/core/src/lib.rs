//! Optimal stopping of Feller processes.
//!
//! A process is approximated by a sparse rate matrix on a grid (see
//! [`generators`]). The value function of the discounted stopping problem
//! is computed by penalized resolvent iteration (see [`solver`]), checked
//! against closed forms ([`analytic`]) and against simulation of the chain
//! itself ([`mc`]).

pub mod analytic;
pub mod error;
pub mod figures;
pub mod function;
pub mod generators;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod mc;
pub mod measure;
pub mod payoff;
pub mod problem;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use function::{sup_norm, sup_norm_diff, SampledFunction};
pub use generators::{validate_generator, GeneratorMatrix};
pub use grid::{make_uniform_grid, BoundaryKind, Grid1D};
pub use measure::DiscreteMeasure;
pub use payoff::{straddle_payoff, CallSpread};
pub use problem::StoppingProblem;
pub use solver::{solve_value_function, stopping_rule, PenaltyParams, StoppingRegion, ValueFunction};
pub use space::StateSpace;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/penalty.md")]
    mod penalty {}
    #[doc = include_str!("../../../book/src/closed_forms.md")]
    mod closed_forms {}
    #[doc = include_str!("../../../book/src/monte_carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/command_line.md")]
    mod command_line {}
}
