//! Horizon learning, forecast-horizon bounds and value-iteration ground truth.

pub mod bound;
pub mod map;
pub mod scan;
pub mod value_iteration;

pub use bound::{compute_kappa, epsilon_sufficient_horizon, suboptimality_bound, BoundInput, Regime};
pub use map::{fit_horizon_map, HorizonMap, Piece};
pub use scan::{run_scan, stability_scan, ScanConfig, ScanSample};
pub use value_iteration::{value_iteration_oracle, FiniteMdp, Transition};
