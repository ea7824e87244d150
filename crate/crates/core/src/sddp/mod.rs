//! Finite-horizon stochastic dual dynamic programming.

pub mod cuts;
pub mod stage;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::template::{Epigraph, MspModel};
pub use cuts::{Cut, CutPool};
pub use stage::{solve_stage, StageSolution};

/// Minimum improvement at the trial point for a new cut to be kept.
pub const CUT_VIOLATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iterations: usize,
    pub time_limit_seconds: f64,
    /// Stall window `j̄`.
    pub stall_window: usize,
    pub stall_rel_tol: f64,
    pub forward_paths_per_iteration: usize,
    pub rng_seed: u64,
    /// Number of trailing forward passes summarized as the statistical upper bound.
    pub upper_bound_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 100_000,
            time_limit_seconds: 10_800.0,
            stall_window: 500,
            stall_rel_tol: 1e-4,
            forward_paths_per_iteration: 1,
            rng_seed: 0,
            upper_bound_window: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stall_window == 0 || self.forward_paths_per_iteration == 0 || self.upper_bound_window == 0 {
            return Err(Error::Config(
                "stall window, forward paths and upper-bound window must be positive".into(),
            ));
        }
        if !(self.stall_rel_tol > 0.0 && self.stall_rel_tol < 1.0) {
            return Err(Error::Config("stall tolerance must lie in (0, 1)".into()));
        }
        if !(self.time_limit_seconds > 0.0) {
            return Err(Error::Config("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Iterations,
    Time,
    Stall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    /// Lower bound after each iteration.
    pub lower_bounds: Vec<f64>,
    pub wall_seconds: f64,
    pub termination: Termination,
    pub cuts_added: usize,
    /// Mean and standard deviation of trailing forward-pass costs.
    pub upper_bound_mean: f64,
    pub upper_bound_std: f64,
}

impl TrainReport {
    pub fn final_lower_bound(&self) -> Option<f64> {
        self.lower_bounds.last().copied()
    }

    /// Same report with the wall time zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> TrainReport {
        TrainReport {
            wall_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// One forward simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Outgoing state `x̌_t` of each stage.
    pub states: Vec<Vec<f64>>,
    /// Realization index of stages `2..=τ`; stage one uses the model's first data.
    pub realizations: Vec<usize>,
    pub stage_costs: Vec<f64>,
    /// Objective of the first-stage LP including its cost-to-go term.
    pub first_objective: f64,
    pub first_decision: Vec<f64>,
}

impl Trajectory {
    pub fn total_cost(&self) -> f64 {
        self.stage_costs.iter().sum()
    }
}

/// Reusable cut-activity hints, one list per stage and realization.
#[derive(Debug, Clone, Default)]
pub struct Hints {
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<Vec<usize>>>,
}

impl Hints {
    fn ensure(&mut self, horizon: usize, outcomes: usize) {
        if self.forward.len() < horizon {
            self.forward.resize(horizon, Vec::new());
        }
        if self.backward.len() < horizon {
            self.backward.resize(horizon, Vec::new());
        }
        for b in &mut self.backward {
            if b.len() < outcomes {
                b.resize(outcomes, Vec::new());
            }
        }
    }
}

fn epigraph(pool: &CutPool, t: usize, horizon: usize) -> Epigraph {
    if t == horizon {
        Epigraph::Terminal
    } else {
        Epigraph::Floor(pool.floor)
    }
}

fn check_pool(model: &MspModel, pool: &CutPool, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if pool.stages.len() + 1 != horizon {
        return Err(Error::Dimension(format!(
            "pool has {} collections for a {horizon}-stage problem",
            pool.stages.len()
        )));
    }
    if pool.dim != model.template.state_dim() {
        return Err(Error::Dimension(format!(
            "pool cuts have dimension {}, state has {}",
            pool.dim,
            model.template.state_dim()
        )));
    }
    Ok(())
}

/// Solves the first-stage LP with the current cuts.
pub fn first_stage(model: &MspModel, pool: &CutPool, horizon: usize) -> Result<StageSolution> {
    check_pool(model, pool, horizon)?;
    let cuts: &[Cut] = if horizon > 1 { pool.stage(2) } else { &[] };
    solve_stage(
        &model.template,
        &model.initial_state,
        &model.first_data,
        cuts,
        epigraph(pool, 1, horizon),
        1.0,
        &mut Vec::new(),
        1,
    )
}

/// Objective of the first-stage LP: a lower bound on the optimal value.
pub fn lower_bound(model: &MspModel, pool: &CutPool, horizon: usize) -> Result<f64> {
    Ok(first_stage(model, pool, horizon)?.objective)
}

pub fn forward_pass<R: Rng + ?Sized>(
    model: &MspModel,
    pool: &CutPool,
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    forward_pass_hinted(model, pool, horizon, rng, &mut Hints::default())
}

fn forward_pass_hinted<R: Rng + ?Sized>(
    model: &MspModel,
    pool: &CutPool,
    horizon: usize,
    rng: &mut R,
    hints: &mut Hints,
) -> Result<Trajectory> {
    check_pool(model, pool, horizon)?;
    hints.ensure(horizon, model.process.len());
    let mut states = Vec::with_capacity(horizon);
    let mut realizations = Vec::with_capacity(horizon.saturating_sub(1));
    let mut stage_costs = Vec::with_capacity(horizon);
    let mut incoming = model.initial_state.clone();
    let mut first_objective = 0.0;
    let mut first_decision = Vec::new();
    for t in 1..=horizon {
        let data = if t == 1 {
            &model.first_data
        } else {
            let k = model.process.sample(rng);
            realizations.push(k);
            &model.process.realizations[k].data
        };
        let cuts: &[Cut] = if t < horizon { pool.stage(t + 1) } else { &[] };
        let sol = solve_stage(
            &model.template,
            &incoming,
            data,
            cuts,
            epigraph(pool, t, horizon),
            1.0,
            &mut hints.forward[t - 1],
            t,
        )?;
        if t == 1 {
            first_objective = sol.objective;
            first_decision = sol.decision.clone();
        }
        stage_costs.push(sol.stage_cost);
        incoming = sol.state.clone();
        states.push(sol.state);
    }
    Ok(Trajectory {
        states,
        realizations,
        stage_costs,
        first_objective,
        first_decision,
    })
}

/// Expected-value cut of one stage at a trial point: solves the stage for
/// every realization and aggregates values and subgradients by probability.
pub fn expected_cut(
    model: &MspModel,
    cuts_after: &[Cut],
    epigraph: Epigraph,
    discount: f64,
    trial: &[f64],
    hints: &mut [Vec<usize>],
    stage: usize,
    iteration: usize,
) -> Result<Cut> {
    let dim = model.template.state_dim();
    let mut beta = vec![0.0; dim];
    let mut value = 0.0;
    for (k, r) in model.process.realizations.iter().enumerate() {
        let sol = solve_stage(
            &model.template,
            trial,
            &r.data,
            cuts_after,
            epigraph,
            discount,
            &mut hints[k],
            stage,
        )?;
        let g = model.template.state_subgradient(&sol.duals);
        for (b, gi) in beta.iter_mut().zip(&g) {
            *b += r.probability * gi;
        }
        value += r.probability * sol.objective;
    }
    let alpha = value - beta.iter().zip(trial).map(|(b, x)| b * x).sum::<f64>();
    Ok(Cut::new(beta, alpha, iteration))
}

pub fn backward_pass(model: &MspModel, pool: &mut CutPool, trajectory: &Trajectory, iteration: usize) -> Result<usize> {
    backward_pass_hinted(model, pool, trajectory, iteration, &mut Hints::default())
}

fn backward_pass_hinted(
    model: &MspModel,
    pool: &mut CutPool,
    trajectory: &Trajectory,
    iteration: usize,
    hints: &mut Hints,
) -> Result<usize> {
    let horizon = trajectory.states.len();
    check_pool(model, pool, horizon)?;
    hints.ensure(horizon, model.process.len());
    let mut added = 0;
    for t in (2..=horizon).rev() {
        let trial = &trajectory.states[t - 2];
        let cuts_after: &[Cut] = if t < horizon { pool.stage(t + 1) } else { &[] };
        let cut = expected_cut(
            model,
            cuts_after,
            epigraph(pool, t, horizon),
            1.0,
            trial,
            &mut hints.backward[t - 1],
            t,
            iteration,
        )?;
        if cut.eval(trial) > pool.value(t, trial) + CUT_VIOLATION_TOL {
            pool.stage_mut(t).push(cut);
            added += 1;
        }
    }
    Ok(added)
}

/// `(LB^i - LB^{i-j̄}) / LB^i < ε`, with absolute progress when `|LB^i| < 1`.
pub fn stalled(lower_bounds: &[f64], window: usize, tol: f64) -> bool {
    let i = lower_bounds.len();
    if i <= window {
        return false;
    }
    let now = lower_bounds[i - 1];
    let then = lower_bounds[i - 1 - window];
    let progress = now - then;
    if now.abs() < 1.0 {
        progress < tol
    } else {
        progress / now.abs() < tol
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Trains a fresh pool for a `horizon`-stage problem.
pub fn train(model: &MspModel, horizon: usize, config: &TrainConfig) -> Result<(CutPool, TrainReport)> {
    model.validate()?;
    let mut pool = CutPool::for_horizon(horizon, model.template.state_dim(), model.floor);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let report = train_from(model, horizon, &mut pool, config, &mut rng)?;
    Ok((pool, report))
}

/// Continues training an existing pool from the model's start state.
pub fn train_from<R: Rng + ?Sized>(
    model: &MspModel,
    horizon: usize,
    pool: &mut CutPool,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    config.validate()?;
    check_pool(model, pool, horizon)?;
    let start = Instant::now();
    let mut hints = Hints::default();
    let mut lower_bounds = Vec::new();
    let mut ub_samples = Vec::new();
    let mut cuts_added = 0;
    let mut termination = Termination::Iterations;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        if start.elapsed().as_secs_f64() >= config.time_limit_seconds {
            termination = Termination::Time;
            break;
        }
        iterations += 1;
        for _ in 0..config.forward_paths_per_iteration {
            let traj = forward_pass_hinted(model, pool, horizon, rng, &mut hints)?;
            ub_samples.push(traj.total_cost());
            cuts_added += backward_pass_hinted(model, pool, &traj, iterations, &mut hints)?;
        }
        lower_bounds.push(lower_bound(model, pool, horizon)?);
        if stalled(&lower_bounds, config.stall_window, config.stall_rel_tol) {
            termination = Termination::Stall;
            break;
        }
    }
    let tail = ub_samples.len().saturating_sub(config.upper_bound_window);
    let (upper_bound_mean, upper_bound_std) = mean_std(&ub_samples[tail..]);
    Ok(TrainReport {
        iterations,
        lower_bounds,
        wall_seconds: start.elapsed().as_secs_f64(),
        termination,
        cuts_added,
        upper_bound_mean,
        upper_bound_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stall_rule() {
        assert!(!stalled(&[1.0, 1.0], 2, 1e-4));
        assert!(stalled(&[5.0, 5.0, 5.0], 2, 1e-4));
        assert!(!stalled(&[5.0, 5.0, 6.0], 2, 1e-4));
        assert!(stalled(&[0.0, 0.0, 0.00001], 2, 1e-4));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            stall_rel_tol: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
