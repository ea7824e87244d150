//! Stability scan: the shortest horizon after which the first-stage
//! decision stops changing, for sampled start states.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::hpop::HpopInstance;
use crate::model::template::MspModel;
use crate::rolling::ProblemCache;
use crate::sddp::{first_stage, train_from, CutPool, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub samples: usize,
    pub epsilon: f64,
    pub w: usize,
    pub tau_max: usize,
    pub train: TrainConfig,
    pub seed: u64,
    /// Reuse each horizon's cuts across samples; samples then run in order.
    pub share_cuts: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            samples: 50,
            epsilon: 1e-5,
            w: 10,
            tau_max: 64,
            train: TrainConfig {
                stall_window: 50,
                ..TrainConfig::default()
            },
            seed: 0,
            share_cuts: true,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w == 0 || self.tau_max <= self.w || !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "scan needs w >= 1, τ_max > w and ε > 0 (w = {}, τ_max = {}, ε = {})",
                self.w, self.tau_max, self.epsilon
            )));
        }
        self.train.validate()
    }
}

/// `‖a - b‖ / max(1, ‖b‖)`.
pub fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / nb.max(1.0)
}

/// First-stage decision of a trained `tau`-stage problem from the model's start.
pub fn first_decision(
    model: &MspModel,
    tau: usize,
    pool: &mut CutPool,
    train: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if tau > 1 {
        train_from(model, tau, pool, train, rng)?;
    }
    Ok(first_stage(model, pool, tau)?.decision)
}

/// `τ - w` at the first `τ` whose decision is within `ε` of the decision at
/// `τ - w`; `τ_max` if that never happens.
pub fn stability_scan(
    model: &MspModel,
    cfg: &ScanConfig,
    cache: &mut ProblemCache,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    cfg.validate()?;
    let dim = model.template.state_dim();
    let mut decisions: Vec<Vec<f64>> = Vec::with_capacity(cfg.tau_max);
    for tau in 1..=cfg.tau_max {
        let pool = cache.lookup(tau, dim, model.floor);
        let x = first_decision(model, tau, pool, &cfg.train, rng)?;
        if tau > cfg.w && relative_change(&x, &decisions[tau - 1 - cfg.w]) < cfg.epsilon {
            return Ok(tau - cfg.w);
        }
        decisions.push(x);
    }
    Ok(cfg.tau_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub n: usize,
    pub storage: Vec<f64>,
    pub realization: usize,
    pub phi1: f64,
    pub tau_star: usize,
    pub wall_ms: f64,
}

/// Storage uniform on each reservoir's range plus one sampled realization.
pub fn sample_states(inst: &HpopInstance, count: usize, seed: u64) -> Vec<(Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let storage = inst
                .reservoirs()
                .iter()
                .map(|&h| {
                    let r = inst.hydro[h].reservoir.as_ref().unwrap();
                    rng.gen_range(r.lower..=r.upper)
                })
                .collect();
            let k = inst.inflow.sample(&mut rng);
            (storage, k)
        })
        .collect()
}

/// Runs the scan over `cfg.samples` sampled states of a hydrothermal instance.
pub fn run_scan(inst: &HpopInstance, cfg: &ScanConfig) -> Result<Vec<ScanSample>> {
    cfg.validate()?;
    let base = inst.model();
    let states = sample_states(inst, cfg.samples, cfg.seed);
    let one = |n: usize, storage: &Vec<f64>, k: usize, cache: &mut ProblemCache| -> Result<ScanSample> {
        let t0 = Instant::now();
        let data = inst.inflow.realizations[k].data.clone();
        let model = base.with_start(storage.clone(), data.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.rng_seed.wrapping_add(n as u64));
        let tau_star = stability_scan(&model, cfg, cache, &mut rng)?;
        Ok(ScanSample {
            n,
            storage: storage.clone(),
            realization: k,
            phi1: inst.system_state(storage, &data).phi1,
            tau_star,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        })
    };
    if cfg.share_cuts {
        let mut cache = ProblemCache::new();
        states
            .iter()
            .enumerate()
            .map(|(n, (s, k))| one(n, s, *k, &mut cache))
            .collect()
    } else {
        states
            .par_iter()
            .enumerate()
            .map(|(n, (s, k))| one(n, s, *k, &mut ProblemCache::new()))
            .collect()
    }
}

/// Columns: `n, phi1, tau_star, realization, wall_ms`.
pub fn write_scan_csv(samples: &[ScanSample], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["n", "phi1", "tau_star", "realization", "wall_ms"])?;
        for s in samples {
            w.write_record([
                s.n.to_string(),
                s.phi1.to_string(),
                s.tau_star.to_string(),
                s.realization.to_string(),
                format!("{:.3}", s.wall_ms),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn scan_points(samples: &[ScanSample]) -> Vec<(f64, f64)> {
    samples.iter().map(|s| (s.phi1, s.tau_star as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_norm() {
        assert_eq!(relative_change(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert!((relative_change(&[0.5], &[0.0]) - 0.5).abs() < 1e-15);
        assert!((relative_change(&[110.0], &[100.0]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_checks() {
        let bad = ScanConfig {
            w: 16,
            tau_max: 16,
            ..ScanConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
