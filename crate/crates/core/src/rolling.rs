//! Rolling-horizon simulation with cut reuse.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::map::HorizonMap;
use crate::model::hpop::HpopInstance;
use crate::model::template::MspModel;
use crate::sddp::{first_stage, train_from, CutPool, Termination, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Static { tau: usize },
    Dynamic { map: HorizonMap, tau_max: usize },
    Stationary { gamma: f64 },
}

impl PolicySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PolicySpec::Static { tau } if *tau == 0 => Err(Error::Config("τ must be at least 1".into())),
            PolicySpec::Dynamic { tau_max, .. } if *tau_max == 0 => {
                Err(Error::Config("τ_max must be at least 1".into()))
            }
            PolicySpec::Stationary { gamma } if !(*gamma > 0.0 && *gamma < 1.0) => {
                Err(Error::Config(format!("γ = {gamma} is outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::Static { tau } => format!("static(tau={tau})"),
            PolicySpec::Dynamic { tau_max, .. } => format!("dynamic(tau_max={tau_max})"),
            PolicySpec::Stationary { gamma } => format!("stationary(gamma={gamma})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub stage_costs: Vec<f64>,
    pub horizons: Vec<usize>,
    pub efforts: Vec<usize>,
    pub training_iterations: Vec<usize>,
    pub decisions: Vec<Vec<f64>>,
    pub roll_wall_ms: Vec<f64>,
    pub zbar: f64,
    pub wall_seconds: f64,
    pub cost_mean: f64,
    pub cost_std: f64,
}

/// `(1/T) Σ_t f_t`.
pub fn long_run_average(costs: &[f64]) -> f64 {
    if costs.is_empty() {
        return f64::NAN;
    }
    costs.iter().sum::<f64>() / costs.len() as f64
}

impl SimulationResult {
    pub(crate) fn from_trace(
        stage_costs: Vec<f64>,
        horizons: Vec<usize>,
        efforts: Vec<usize>,
        training_iterations: Vec<usize>,
        decisions: Vec<Vec<f64>>,
        roll_wall_ms: Vec<f64>,
        wall_seconds: f64,
    ) -> Self {
        let zbar = long_run_average(&stage_costs);
        let n = stage_costs.len() as f64;
        let cost_std = if stage_costs.len() > 1 {
            (stage_costs.iter().map(|c| (c - zbar).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        SimulationResult {
            stage_costs,
            horizons,
            efforts,
            training_iterations,
            decisions,
            roll_wall_ms,
            zbar,
            wall_seconds,
            cost_mean: zbar,
            cost_std,
        }
    }

    pub fn rolls(&self) -> usize {
        self.stage_costs.len()
    }

    /// Writes one row per roll and a closing summary row.
    ///
    /// Columns: `t, tau, jbar, iterations, stage_cost, cum_avg, wall_ms`.
    /// The summary row has `t = summary`, `stage_cost = z̄` and the total wall
    /// time. Only `wall_ms` varies between identical runs.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{other:?}")),
        })?;
        w.write_record(["t", "tau", "jbar", "iterations", "stage_cost", "cum_avg", "wall_ms"])?;
        let mut acc = 0.0;
        for i in 0..self.rolls() {
            acc += self.stage_costs[i];
            w.write_record([
                (i + 1).to_string(),
                self.horizons[i].to_string(),
                self.efforts[i].to_string(),
                self.training_iterations[i].to_string(),
                self.stage_costs[i].to_string(),
                (acc / (i + 1) as f64).to_string(),
                format!("{:.3}", self.roll_wall_ms[i]),
            ])?;
        }
        w.write_record([
            "summary".to_string(),
            String::new(),
            String::new(),
            self.training_iterations.iter().sum::<usize>().to_string(),
            self.zbar.to_string(),
            self.zbar.to_string(),
            format!("{:.3}", self.wall_seconds * 1e3),
        ])?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Reads `z̄` from the summary row of a result table.
pub fn read_zbar(path: &Path) -> Result<f64> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec?;
        if rec.get(0) == Some("summary") {
            return rec.get(4).and_then(|v| v.parse().ok()).ok_or_else(|| Error::Schema {
                path: path.to_path_buf(),
                msg: "summary row has no z̄".into(),
            });
        }
    }
    Err(Error::Schema {
        path: path.to_path_buf(),
        msg: "no summary row".into(),
    })
}

/// Stall parameter per phase of an online run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortSchedule {
    pub initial: usize,
    pub after_first_roll: usize,
    pub all_realizations_seen: usize,
    /// Value that switches online training off.
    pub off: usize,
    /// Consecutive minimal-effort rolls tolerated before training is switched off.
    pub stall_rolls: usize,
}

impl Default for EffortSchedule {
    fn default() -> Self {
        EffortSchedule {
            initial: 500,
            after_first_roll: 50,
            all_realizations_seen: 10,
            off: 1,
            stall_rolls: 50,
        }
    }
}

impl EffortSchedule {
    /// Training disabled from the first roll.
    pub fn frozen() -> Self {
        EffortSchedule {
            initial: 1,
            after_first_roll: 1,
            all_realizations_seen: 1,
            off: 1,
            stall_rolls: 0,
        }
    }
}

/// `j̄` for roll `roll_index` (1-based).
pub fn next_effort(
    schedule: &EffortSchedule,
    roll_index: usize,
    seen_all_realizations: bool,
    stall_streak: usize,
) -> usize {
    if roll_index <= 1 {
        schedule.initial
    } else if seen_all_realizations && stall_streak > schedule.stall_rolls {
        schedule.off
    } else if seen_all_realizations {
        schedule.all_realizations_seen
    } else {
        schedule.after_first_roll
    }
}

/// One cut pool per forecast horizon, created on first use.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemCache {
    pools: BTreeMap<usize, CutPool>,
}

impl ProblemCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&mut self, tau: usize, dim: usize, floor: f64) -> &mut CutPool {
        self.pools
            .entry(tau)
            .or_insert_with(|| CutPool::for_horizon(tau, dim, floor))
    }

    pub fn insert(&mut self, tau: usize, pool: CutPool) {
        self.pools.insert(tau, pool);
    }

    pub fn get(&self, tau: usize) -> Option<&CutPool> {
        self.pools.get(&tau)
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.pools.keys().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub train: TrainConfig,
    pub schedule: EffortSchedule,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            train: TrainConfig::default(),
            schedule: EffortSchedule::default(),
        }
    }
}

/// `clamp(ceil(T(s)), 1, τ_max)`.
pub fn dynamic_horizon(map: &HorizonMap, phi1: f64, tau_max: usize) -> usize {
    let raw = map.predict_phi(phi1).ceil();
    if raw.is_nan() || raw < 1.0 {
        1
    } else if raw >= tau_max as f64 {
        tau_max
    } else {
        raw as usize
    }
}

/// Runs the rolling-horizon procedure along `path` (one realization index
/// per roll). `phi` maps (incoming state, observed data) to the feature fed
/// to a horizon map; it is only used by dynamic policies. Pools in `cache`
/// are reused and extended.
pub fn simulate(
    model: &MspModel,
    policy: &PolicySpec,
    path: &[usize],
    opts: &SimulationOptions,
    cache: &mut ProblemCache,
    phi: &dyn Fn(&[f64], &[f64]) -> f64,
) -> Result<SimulationResult> {
    policy.validate()?;
    model.validate()?;
    if let Some(&k) = path.iter().find(|&&k| k >= model.process.len()) {
        return Err(Error::Config(format!("path references realization {k}")));
    }
    if let PolicySpec::Stationary { gamma } = policy {
        let sm = crate::stationary::StationaryModel::new(model.clone(), *gamma)?;
        let (pool, _) = crate::stationary::train_stationary(&sm, &opts.train)?;
        return crate::stationary::evaluate_stationary(&sm, &pool, path);
    }
    let start = Instant::now();
    let dim = model.template.state_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.train.rng_seed);
    let mut seen = BTreeSet::new();
    let mut stall_streak = 0;
    let mut switched_off = false;
    let mut prev_effort = usize::MAX;
    let mut incoming = model.initial_state.clone();

    let n = path.len();
    let mut costs = Vec::with_capacity(n);
    let mut horizons = Vec::with_capacity(n);
    let mut efforts = Vec::with_capacity(n);
    let mut iters = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);
    let mut wall = Vec::with_capacity(n);

    for (t, &k) in path.iter().enumerate() {
        let roll_start = Instant::now();
        let data = &model.process.realizations[k].data;
        seen.insert(k);
        let tau = match policy {
            PolicySpec::Static { tau } => *tau,
            PolicySpec::Dynamic { map, tau_max } => dynamic_horizon(map, phi(&incoming, data), *tau_max),
            PolicySpec::Stationary { .. } => unreachable!(),
        };
        let all_seen = seen.len() == model.process.len();
        let mut jbar = if switched_off {
            opts.schedule.off
        } else {
            next_effort(&opts.schedule, t + 1, all_seen, stall_streak)
        };
        jbar = jbar.min(prev_effort);
        prev_effort = jbar;
        if jbar == opts.schedule.off && t > 0 {
            switched_off = true;
        }
        let roll_model = model.with_start(incoming.clone(), data.clone());
        let pool = cache.lookup(tau, dim, model.floor);
        let mut ran = 0;
        if tau > 1 && jbar > 1 {
            let cfg = TrainConfig {
                stall_window: jbar,
                ..opts.train.clone()
            };
            let report = train_from(&roll_model, tau, pool, &cfg, &mut rng)?;
            ran = report.iterations;
            let minimal = report.termination == Termination::Stall && report.iterations == jbar + 1;
            if jbar == opts.schedule.all_realizations_seen && minimal {
                stall_streak += 1;
            } else {
                stall_streak = 0;
            }
        }
        let sol = first_stage(&roll_model, pool, tau)?;
        costs.push(sol.stage_cost);
        horizons.push(tau);
        efforts.push(jbar);
        iters.push(ran);
        incoming = sol.state;
        decisions.push(sol.decision);
        wall.push(roll_start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(SimulationResult::from_trace(
        costs,
        horizons,
        efforts,
        iters,
        decisions,
        wall,
        start.elapsed().as_secs_f64(),
    ))
}

/// [`simulate`] on a hydrothermal instance with `φ1` as the horizon feature.
pub fn simulate_hpop(
    inst: &HpopInstance,
    policy: &PolicySpec,
    path: &[usize],
    opts: &SimulationOptions,
    cache: &mut ProblemCache,
) -> Result<SimulationResult> {
    let phi = |x: &[f64], b: &[f64]| inst.system_state(x, b).phi1;
    simulate(&inst.model(), policy, path, opts, cache, &phi)
}
