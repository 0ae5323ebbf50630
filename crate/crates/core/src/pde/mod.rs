//! Finite-difference KdV boundary-control solvers.

pub mod banded;
pub mod gramian;
pub mod operator;
pub mod solver;
pub mod studies;

pub use solver::{solve_linear, solve_nonlinear, solve_second_order, Grid, Stepper, Trajectory};
