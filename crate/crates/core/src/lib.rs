//! Finite-horizon optimal control with dynamics and running costs that jump
//! across the flat interface `H = {x_N = 0}` separating `Ω₁ = {x_N > 0}` from
//! `Ω₂ = {x_N < 0}`.
//!
//! The crate computes the two value functions of such problems:
//!
//! - `U⁻`, the infimum of the cost over every admissible trajectory of the
//!   differential inclusion, including trajectories that stay on `H` by mixing
//!   two dynamics that both point away from it ("singular" sliding);
//! - `U⁺`, the same infimum restricted to trajectories that only use
//!   "regular" mixtures on `H`.
//!
//! Both are computed by a semi-Lagrangian scheme ([`solver`]) and by brute
//! force over piecewise-constant control schedules ([`trajectory`]). The
//! [`hamiltonians`] module evaluates the side Hamiltonians, the tangential
//! Hamiltonians on `H` and the quantitative bounds they satisfy, and
//! [`verification`] turns the structural results (viscosity inequalities,
//! comparison, stability, closure of regular trajectories) into numerical
//! checks.

pub mod audit;
pub mod cli;
pub mod config;
pub mod error;
pub mod family;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod hamiltonians;
pub mod hull;
pub mod output;
pub mod problem;
pub mod reference;
mod sampling;
pub mod solver;
pub mod trajectory;
pub mod verification;

pub use error::{Error, Result};
pub use field::{ValueField, Variant};
pub use geometry::Region;
pub use grid::{GridSpec, UniformGrid};
pub use hamiltonians::{ControlTriple, InterfaceControlSet};
pub use problem::{Bounds, ControlSet, ProblemSpec, Side, SideData};
pub use solver::solve;
pub use trajectory::{ControlSchedule, OracleMode, Trajectory};
