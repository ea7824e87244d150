//! Hydrothermal power operation planning instances.
//!
//! Stage LP columns, in order: reservoir storage `x` (one per reservoir
//! plant), turbined flow `y`, spill `v+` and pump-back `v-` (one per plant),
//! thermal output `g`, unmet demand `p`, demand surplus. Rows: one water
//! balance per hydro plant in plant order, then the demand row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::model::process::DiscreteProcess;
use crate::model::template::{MspModel, RandomRhs, StageTemplate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reservoir {
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroPlant {
    pub name: String,
    /// MW per unit of turbined flow.
    pub efficiency: f64,
    pub max_turbine: f64,
    /// `None` for run-of-river plants.
    pub reservoir: Option<Reservoir>,
    pub upstream: Vec<usize>,
    pub downstream: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalPlant {
    pub name: String,
    pub capacity: f64,
    #[serde(default)]
    pub min_output: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpopInstance {
    pub hydro: Vec<HydroPlant>,
    pub thermal: Vec<ThermalPlant>,
    pub demand: f64,
    pub penalty: f64,
    /// One inflow per hydro plant per realization.
    pub inflow: DiscreteProcess,
    /// Inflow-to-storage scale applied to every realization.
    pub c0: f64,
}

/// Preset selector for the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub plants: usize,
    pub demand: f64,
    pub realizations: usize,
    pub c0: f64,
}

impl Preset {
    pub fn new(plants: usize, demand: f64, realizations: usize) -> Self {
        Preset {
            plants,
            demand,
            realizations,
            c0: 1.0,
        }
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }
}

pub const BENCHMARK_DEMANDS: [f64; 5] = [1000.0, 1500.0, 1750.0, 2000.0, 2250.0];
pub const PENALTY: f64 = 500.0;
/// Flow-to-volume conversion constant of the benchmark data.
pub const FLOW_TO_VOLUME: f64 = 2.592;

const EFFICIENCY: [f64; 6] = [0.18, 0.35, 0.75, 0.32, 0.56, 0.15];
const MAX_TURBINE: [f64; 6] = [220.0, 585.0, 1688.0, 5220.0, 2028.0, 1480.0];
const MAX_STORAGE: [Option<f64>; 6] = [Some(672.0), None, Some(17217.0), Some(2500.0), None, None];
const INITIAL_STORAGE: [Option<f64>; 6] = [Some(336.0), None, Some(10330.2), Some(1250.0), None, None];
const UPSTREAM: [&[usize]; 6] = [&[], &[0], &[], &[1, 2], &[], &[3, 4]];
const DOWNSTREAM: [&[usize]; 6] = [&[1], &[3], &[3], &[5], &[5], &[]];

const INFLOW_5: [[f64; 6]; 5] = [
    [245.5, 125.2, 1438.0, 311.0, 16.2, 29.7],
    [201.7, 103.9, 1085.3, 221.9, 13.0, 23.6],
    [158.0, 82.6, 732.5, 132.7, 9.9, 17.5],
    [130.2, 58.6, 488.1, 93.1, 7.0, 10.7],
    [102.4, 34.6, 243.6, 53.4, 4.2, 3.9],
];
const PROB_5: [f64; 5] = [0.20, 0.15, 0.30, 0.15, 0.20];

const INFLOW_12: [[f64; 6]; 12] = [
    [245.5, 125.2, 1438.0, 120.0, 16.2, 29.7],
    [232.5, 117.0, 1329.5, 111.0, 15.1, 27.4],
    [219.4, 108.7, 1220.9, 101.9, 14.0, 25.0],
    [206.4, 100.5, 1112.3, 92.9, 12.9, 22.7],
    [193.4, 92.3, 1003.7, 83.9, 11.8, 20.3],
    [180.4, 84.0, 895.1, 74.8, 10.7, 18.0],
    [167.4, 75.8, 786.6, 65.8, 9.7, 15.6],
    [154.4, 67.5, 678.0, 56.7, 8.6, 13.3],
    [141.4, 59.3, 569.4, 47.7, 7.5, 10.9],
    [128.4, 51.1, 460.8, 38.7, 6.4, 8.6],
    [115.4, 42.8, 352.2, 29.6, 5.3, 6.2],
    [102.4, 34.6, 243.6, 20.6, 4.2, 3.9],
];
const PROB_12: [f64; 12] = [0.09, 0.10, 0.10, 0.09, 0.07, 0.06, 0.06, 0.07, 0.09, 0.10, 0.10, 0.09];

const THERMAL_CAPACITY: f64 = 20.0;
const THERMAL_COST: [f64; 4] = [20.0, 40.0, 80.0, 160.0];

/// Builds a benchmark instance. `plants` selects plant 3 (1), plants 2-4 (3)
/// or the full six-plant network (6); `realizations` selects the 5- or
/// 12-point inflow distribution.
pub fn build_hpop(preset: Preset) -> Result<HpopInstance> {
    let chosen: Vec<usize> = match preset.plants {
        1 => vec![2],
        3 => vec![1, 2, 3],
        6 => (0..6).collect(),
        n => {
            return Err(Error::Config(format!(
                "no preset with {n} hydro plants (use 1, 3 or 6)"
            )))
        }
    };
    let (rows, probs): (Vec<[f64; 6]>, Vec<f64>) = match preset.realizations {
        5 => (INFLOW_5.to_vec(), PROB_5.to_vec()),
        12 => (INFLOW_12.to_vec(), PROB_12.to_vec()),
        n => return Err(Error::Config(format!("no preset with {n} realizations (use 5 or 12)"))),
    };
    if !(preset.demand >= 0.0) || !preset.demand.is_finite() {
        return Err(Error::Config("demand must be nonnegative".into()));
    }
    if !(preset.c0 > 0.0) {
        return Err(Error::Config("c0 must be positive".into()));
    }
    let local = |g: usize| chosen.iter().position(|&c| c == g);
    let hydro = chosen
        .iter()
        .map(|&g| HydroPlant {
            name: format!("h{}", g + 1),
            efficiency: EFFICIENCY[g],
            max_turbine: MAX_TURBINE[g],
            reservoir: MAX_STORAGE[g].map(|upper| Reservoir {
                lower: 0.0,
                upper,
                initial: INITIAL_STORAGE[g].unwrap_or(0.0),
            }),
            upstream: UPSTREAM[g].iter().filter_map(|&m| local(m)).collect(),
            downstream: DOWNSTREAM[g].iter().filter_map(|&m| local(m)).collect(),
        })
        .collect();
    let thermal = THERMAL_COST
        .iter()
        .enumerate()
        .map(|(f, &cost)| ThermalPlant {
            name: format!("f{}", f + 1),
            capacity: THERMAL_CAPACITY,
            min_output: 0.0,
            cost,
        })
        .collect();
    let data = rows.iter().map(|r| chosen.iter().map(|&g| r[g]).collect()).collect();
    let inst = HpopInstance {
        hydro,
        thermal,
        demand: preset.demand,
        penalty: PENALTY,
        inflow: DiscreteProcess::new(data, probs)?,
        c0: preset.c0,
    };
    inst.validate()?;
    Ok(inst)
}

/// Available water per hydro plant and the aggregate energy potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub water: Vec<f64>,
    pub phi1: f64,
}

/// Column indices of the stage LP.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub storage: Vec<usize>,
    pub turbine: Vec<usize>,
    pub spill: Vec<usize>,
    pub pump: Vec<usize>,
    pub thermal: Vec<usize>,
    pub unmet: usize,
    pub surplus: usize,
    pub demand_row: usize,
    pub num_vars: usize,
}

impl HpopInstance {
    pub fn validate(&self) -> Result<()> {
        let n = self.hydro.len();
        for (h, plant) in self.hydro.iter().enumerate() {
            for &m in plant.upstream.iter().chain(&plant.downstream) {
                if m >= n || m == h {
                    return Err(Error::Config(format!("plant {h} references invalid plant {m}")));
                }
            }
            for &m in &plant.upstream {
                if !self.hydro[m].downstream.contains(&h) {
                    return Err(Error::Config(format!(
                        "plant {m} is upstream of {h} but does not list it downstream"
                    )));
                }
            }
            for &m in &plant.downstream {
                if !self.hydro[m].upstream.contains(&h) {
                    return Err(Error::Config(format!(
                        "plant {m} is downstream of {h} but does not list it upstream"
                    )));
                }
            }
            if !(plant.efficiency >= 0.0) || !(plant.max_turbine >= 0.0) {
                return Err(Error::Config(format!("plant {h} has negative data")));
            }
            if let Some(r) = &plant.reservoir {
                if !(r.lower <= r.upper) || r.lower < 0.0 || r.initial < r.lower || r.initial > r.upper {
                    return Err(Error::Config(format!("plant {h} has inconsistent storage bounds")));
                }
            }
        }
        for (f, t) in self.thermal.iter().enumerate() {
            if !(t.min_output >= 0.0 && t.min_output <= t.capacity) || !(t.cost >= 0.0) {
                return Err(Error::Config(format!("thermal plant {f} has inconsistent data")));
            }
        }
        if !(self.demand >= 0.0) || !(self.penalty >= 0.0) || !(self.c0 > 0.0) {
            return Err(Error::Config("demand, penalty and c0 must be nonnegative".into()));
        }
        if self.inflow.dim() != n {
            return Err(Error::Dimension(format!(
                "inflow realizations have {} entries for {n} hydro plants",
                self.inflow.dim()
            )));
        }
        if self.inflow.realizations.iter().flat_map(|r| &r.data).any(|&b| b < 0.0) {
            return Err(Error::Config("inflows must be nonnegative".into()));
        }
        Ok(())
    }

    /// Indices of plants with a reservoir, in plant order.
    pub fn reservoirs(&self) -> Vec<usize> {
        (0..self.hydro.len())
            .filter(|&h| self.hydro[h].reservoir.is_some())
            .collect()
    }

    pub fn layout(&self) -> Layout {
        let nr = self.reservoirs().len();
        let nh = self.hydro.len();
        let nf = self.thermal.len();
        let mut next = 0;
        let mut take = |k: usize| {
            let r: Vec<usize> = (next..next + k).collect();
            next += k;
            r
        };
        let storage = take(nr);
        let turbine = take(nh);
        let spill = take(nh);
        let pump = take(nh);
        let thermal = take(nf);
        let unmet = take(1)[0];
        let surplus = take(1)[0];
        Layout {
            storage,
            turbine,
            spill,
            pump,
            thermal,
            unmet,
            surplus,
            demand_row: nh,
            num_vars: next,
        }
    }

    /// Stage template. Pump-back on a plant without upstream plants would
    /// create water from nothing, so it is bounded at zero there.
    pub fn template(&self) -> StageTemplate {
        let lay = self.layout();
        let nh = self.hydro.len();
        let res = self.reservoirs();
        let mut lp = LinearProgram::new(lay.num_vars);
        for (k, &h) in res.iter().enumerate() {
            let r = self.hydro[h].reservoir.as_ref().expect("reservoir plant");
            lp.var_lower[lay.storage[k]] = r.lower;
            lp.var_upper[lay.storage[k]] = r.upper;
        }
        for h in 0..nh {
            lp.var_upper[lay.turbine[h]] = self.hydro[h].max_turbine;
            if self.hydro[h].upstream.is_empty() {
                lp.var_upper[lay.pump[h]] = 0.0;
            }
        }
        for (f, t) in self.thermal.iter().enumerate() {
            let j = lay.thermal[f];
            lp.objective[j] = t.cost;
            lp.var_lower[j] = t.min_output;
            lp.var_upper[j] = t.capacity;
        }
        lp.objective[lay.unmet] = self.penalty;

        let mut linking = Vec::with_capacity(nh + 1);
        let mut random = Vec::with_capacity(nh);
        for h in 0..nh {
            let plant = &self.hydro[h];
            let mut terms = vec![(lay.turbine[h], 1.0), (lay.spill[h], 1.0), (lay.pump[h], -1.0)];
            for &m in &plant.upstream {
                terms.push((lay.turbine[m], -1.0));
                terms.push((lay.spill[m], -1.0));
            }
            for &m in &plant.downstream {
                terms.push((lay.pump[m], 1.0));
            }
            let mut link = vec![0.0; res.len()];
            if let Some(k) = res.iter().position(|&r| r == h) {
                terms.push((lay.storage[k], 1.0));
                link[k] = -1.0;
            }
            lp.add_row(&terms, 0.0);
            linking.push(link);
            random.push(RandomRhs {
                row: h,
                data_index: h,
                scale: self.c0,
            });
        }
        let mut terms: Vec<(usize, f64)> = (0..nh).map(|h| (lay.turbine[h], self.hydro[h].efficiency)).collect();
        terms.extend(lay.thermal.iter().map(|&j| (j, 1.0)));
        terms.push((lay.unmet, 1.0));
        terms.push((lay.surplus, -1.0));
        lp.add_row(&terms, self.demand);
        linking.push(vec![0.0; res.len()]);

        StageTemplate {
            base_lp: lp,
            linking_matrix: linking,
            rhs_random_map: random,
            state_extract: lay.storage.clone(),
        }
    }

    pub fn initial_storage(&self) -> Vec<f64> {
        self.reservoirs()
            .iter()
            .map(|&h| self.hydro[h].reservoir.as_ref().map_or(0.0, |r| r.initial))
            .collect()
    }

    /// Probability-weighted mean inflow, used as first-stage data when no
    /// observed realization is supplied.
    pub fn mean_inflow(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.hydro.len()];
        for r in &self.inflow.realizations {
            for (a, b) in m.iter_mut().zip(&r.data) {
                *a += r.probability * b;
            }
        }
        m
    }

    /// Multistage model starting from the initial storage.
    pub fn model(&self) -> MspModel {
        MspModel {
            template: self.template(),
            process: self.inflow.clone(),
            initial_state: self.initial_storage(),
            first_data: self.mean_inflow(),
            floor: 0.0,
        }
    }

    /// `s_h = x_prev,h + c0·b_h` for reservoirs, `c0·b_h` for run-of-river,
    /// and `φ1 = Σ r_h s_h`.
    pub fn system_state(&self, storage: &[f64], inflow: &[f64]) -> SystemState {
        let mut k = 0;
        let water: Vec<f64> = self
            .hydro
            .iter()
            .enumerate()
            .map(|(h, plant)| {
                let b = self.c0 * inflow[h];
                if plant.reservoir.is_some() {
                    k += 1;
                    storage[k - 1] + b
                } else {
                    b
                }
            })
            .collect();
        let phi1 = water.iter().zip(&self.hydro).map(|(s, p)| p.efficiency * s).sum();
        SystemState { water, phi1 }
    }

    /// State after a stage decision once the next inflow is observed.
    pub fn extract_state(&self, decision: &[f64], next_inflow: &[f64]) -> SystemState {
        let storage = self.template().outgoing_state(decision);
        self.system_state(&storage, next_inflow)
    }
}
