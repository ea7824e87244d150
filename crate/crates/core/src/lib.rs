//! Multistage stochastic linear programming with rolling-horizon policies.
//!
//! - [`lp`]: dense bounded simplex returning primal values and row duals.
//! - [`model`]: stage templates, discrete processes, hydrothermal instances.
//! - [`sddp`]: finite-horizon SDDP training.
//! - [`stationary`]: discounted SDDP with one shared cut collection.
//! - [`rolling`]: rolling-horizon simulation with cut reuse.
//! - [`horizon`]: horizon maps, stability scans, bounds, value iteration.
//! - [`cli`]: the command implementations behind the `rollhorizon` binary.

pub mod cli;
pub mod error;
pub mod horizon;
pub mod lp;
pub mod model;
pub mod rolling;
pub mod sddp;
pub mod stationary;

pub use error::{Error, Result};
