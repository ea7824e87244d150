//! Discounted infinite-horizon SDDP with a single shared cut collection.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::template::{Epigraph, MspModel};
use crate::rolling::SimulationResult;
use crate::sddp::{
    expected_cut, solve_stage, stalled, CutPool, StageSolution, Termination, TrainConfig, TrainReport,
    CUT_VIOLATION_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryModel {
    pub model: MspModel,
    pub gamma: f64,
}

impl StationaryModel {
    pub fn new(model: MspModel, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Config(format!("γ = {gamma} is outside (0, 1)")));
        }
        model.validate()?;
        Ok(StationaryModel { model, gamma })
    }

    /// Largest forward horizon ever sampled.
    pub fn horizon_cap(&self) -> usize {
        horizon_cap(self.gamma)
    }
}

/// `⌈50 / (1 - γ)⌉`.
pub fn horizon_cap(gamma: f64) -> usize {
    (50.0 / (1.0 - gamma)).ceil() as usize
}

/// Draws `T ≥ 1` with `P(T = k) = (1-γ) γ^{k-1}`, truncated at
/// [`horizon_cap`].
pub fn sample_horizon<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> usize {
    if gamma <= 0.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let k = 1.0 + (u.ln() / gamma.ln()).floor();
    let cap = horizon_cap(gamma);
    if k.is_finite() && k < cap as f64 {
        k.max(1.0) as usize
    } else {
        cap
    }
}

fn solve_one(
    sm: &StationaryModel,
    pool: &CutPool,
    incoming: &[f64],
    data: &[f64],
    hint: &mut Vec<usize>,
    stage: usize,
) -> Result<StageSolution> {
    solve_stage(
        &sm.model.template,
        incoming,
        data,
        &pool.stages[0],
        Epigraph::Floor(pool.floor),
        sm.gamma,
        hint,
        stage,
    )
}

/// First-stage objective `f + γ·𝔔̌` at the model's start.
pub fn stationary_lower_bound(sm: &StationaryModel, pool: &CutPool) -> Result<f64> {
    let m = &sm.model;
    Ok(solve_one(sm, pool, &m.initial_state, &m.first_data, &mut Vec::new(), 1)?.objective)
}

pub fn train_stationary(sm: &StationaryModel, config: &TrainConfig) -> Result<(CutPool, TrainReport)> {
    let mut pool = CutPool::shared(sm.model.template.state_dim(), sm.model.floor);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let report = train_stationary_from(sm, &mut pool, config, &mut rng)?;
    Ok((pool, report))
}

pub fn train_stationary_from<R: Rng + ?Sized>(
    sm: &StationaryModel,
    pool: &mut CutPool,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    config.validate()?;
    if pool.stages.len() != 1 || pool.dim != sm.model.template.state_dim() {
        return Err(Error::Dimension(
            "stationary training needs a shared pool of matching dimension".into(),
        ));
    }
    let m = &sm.model;
    let start = Instant::now();
    let mut lower_bounds = Vec::new();
    let mut ub = Vec::new();
    let mut added = 0;
    let mut iterations = 0;
    let mut termination = Termination::Iterations;
    let mut fwd_hint = Vec::new();
    let mut bwd_hints = vec![Vec::new(); m.process.len()];
    while iterations < config.max_iterations {
        if start.elapsed().as_secs_f64() >= config.time_limit_seconds {
            termination = Termination::Time;
            break;
        }
        iterations += 1;
        for _ in 0..config.forward_paths_per_iteration {
            let horizon = sample_horizon(sm.gamma, rng);
            let mut states = Vec::with_capacity(horizon);
            let mut incoming = m.initial_state.clone();
            let mut cost = 0.0;
            let mut discount = 1.0;
            for t in 1..=horizon {
                let data = if t == 1 {
                    &m.first_data
                } else {
                    &m.process.realizations[m.process.sample(rng)].data
                };
                let sol = solve_one(sm, pool, &incoming, data, &mut fwd_hint, t)?;
                cost += discount * sol.stage_cost;
                discount *= sm.gamma;
                incoming = sol.state.clone();
                states.push(sol.state);
            }
            ub.push(cost);
            for t in (2..=horizon).rev() {
                let trial = &states[t - 2];
                let cut = expected_cut(
                    m,
                    &pool.stages[0],
                    Epigraph::Floor(pool.floor),
                    sm.gamma,
                    trial,
                    &mut bwd_hints,
                    t,
                    iterations,
                )?;
                if cut.eval(trial) > CutPool::value_of(&pool.stages[0], pool.floor, trial) + CUT_VIOLATION_TOL {
                    pool.stages[0].push(cut);
                    added += 1;
                }
            }
        }
        lower_bounds.push(stationary_lower_bound(sm, pool)?);
        if stalled(&lower_bounds, config.stall_window, config.stall_rel_tol) {
            termination = Termination::Stall;
            break;
        }
    }
    let tail = ub.len().saturating_sub(config.upper_bound_window);
    let window = &ub[tail..];
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let std = if window.len() > 1 {
        (window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(TrainReport {
        iterations,
        lower_bounds,
        wall_seconds: start.elapsed().as_secs_f64(),
        termination,
        cuts_added: added,
        upper_bound_mean: if ub.is_empty() { f64::NAN } else { mean },
        upper_bound_std: if ub.is_empty() { f64::NAN } else { std },
    })
}

/// Greedy stationary policy along `path`; costs are accrued undiscounted.
pub fn evaluate_stationary(sm: &StationaryModel, pool: &CutPool, path: &[usize]) -> Result<SimulationResult> {
    let m = &sm.model;
    if let Some(&k) = path.iter().find(|&&k| k >= m.process.len()) {
        return Err(Error::Config(format!("path references realization {k}")));
    }
    let start = Instant::now();
    let mut incoming = m.initial_state.clone();
    let mut hint = Vec::new();
    let n = path.len();
    let (mut costs, mut decisions, mut wall) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (t, &k) in path.iter().enumerate() {
        let roll = Instant::now();
        let sol = solve_one(sm, pool, &incoming, &m.process.realizations[k].data, &mut hint, t + 1)?;
        costs.push(sol.stage_cost);
        incoming = sol.state;
        decisions.push(sol.decision);
        wall.push(roll.elapsed().as_secs_f64() * 1e3);
    }
    Ok(SimulationResult::from_trace(
        costs,
        vec![0; n],
        vec![0; n],
        vec![0; n],
        decisions,
        wall,
        start.elapsed().as_secs_f64(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_gamma_always_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(sample_horizon(1e-300, &mut rng), 1);
        }
    }

    #[test]
    fn mean_near_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let s: usize = (0..n).map(|_| sample_horizon(0.9, &mut rng)).sum();
        assert!((s as f64 / n as f64 - 10.0).abs() < 0.3);
    }

    #[test]
    fn reproducible() {
        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            (0..50).map(|_| sample_horizon(0.7, &mut r)).collect()
        };
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let b: Vec<_> = (0..50).map(|_| sample_horizon(0.7, &mut r)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_gamma_one() {
        let m = crate::model::build_hpop(crate::model::Preset::new(1, 1000.0, 5))
            .unwrap()
            .model();
        assert!(StationaryModel::new(m, 1.0).is_err());
    }
}
