//! Forecast-horizon bounds for discounted stationary problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::hpop::HpopInstance;
use crate::model::template::Epigraph;
use crate::sddp::solve_stage;

/// Default tolerance for the ε-sufficient horizon.
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Stage costs are all nonpositive.
    Nonpositive,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub kappa: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub regime: Regime,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("γ = {gamma} is outside (0, 1)")))
    }
}

/// `ln(ε(1-γ)/κ) / ln γ`, or 0 when `ε(1-γ)/κ >= 1`.
pub fn epsilon_sufficient_horizon(b: &BoundInput) -> Result<f64> {
    check_gamma(b.gamma)?;
    if !(b.epsilon > 0.0) || !(b.kappa >= 0.0) {
        return Err(Error::Config("ε must be positive and κ nonnegative".into()));
    }
    let ratio = b.epsilon * (1.0 - b.gamma) / b.kappa;
    if ratio >= 1.0 {
        return Ok(0.0);
    }
    Ok(ratio.ln() / b.gamma.ln())
}

/// `γ^τ κ / (1-γ)`, doubled in the general regime.
pub fn suboptimality_bound(tau: f64, gamma: f64, kappa: f64, regime: Regime) -> f64 {
    let base = gamma.powf(tau) * kappa / (1.0 - gamma);
    match regime {
        Regime::Nonpositive => base,
        Regime::General => 2.0 * base,
    }
}

/// Optimal single-stage cost with empty reservoirs and no inflow.
pub fn compute_kappa(inst: &HpopInstance) -> Result<f64> {
    inst.validate()?;
    let tmpl = inst.template();
    let zero_state = vec![0.0; tmpl.state_dim()];
    let zero_inflow = vec![0.0; inst.hydro.len()];
    let sol = solve_stage(
        &tmpl,
        &zero_state,
        &zero_inflow,
        &[],
        Epigraph::Terminal,
        1.0,
        &mut Vec::new(),
        1,
    )?;
    Ok(sol.stage_cost)
}
