use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub id: usize,
    pub probability: f64,
    /// Stage-random quantities; for hydrothermal instances, one inflow per plant.
    pub data: Vec<f64>,
}

/// Stage-wise independent discrete process. The same realization set applies
/// at every stage after the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProcess {
    pub realizations: Vec<Realization>,
    pub stationary: bool,
}

impl DiscreteProcess {
    /// Builds a process from raw rows and weights. Weights are divided by
    /// their sum so they need not add up to one exactly; weights already
    /// summing to one within rounding are kept as given, so saved processes
    /// load back bit for bit.
    pub fn new(data: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Config("process needs at least one realization".into()));
        }
        if data.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} realizations but {} probabilities",
                data.len(),
                weights.len()
            )));
        }
        let dim = data[0].len();
        if data.iter().any(|d| d.len() != dim) {
            return Err(Error::Dimension("realizations have differing lengths".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Config("probabilities must be positive and finite".into()));
        }
        let mut total: f64 = weights.iter().sum();
        if (total - 1.0).abs() <= 1e-12 {
            total = 1.0;
        }
        let realizations = data
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(id, (data, w))| Realization {
                id,
                probability: w / total,
                data,
            })
            .collect();
        Ok(DiscreteProcess {
            realizations,
            stationary: true,
        })
    }

    /// A single realization with probability one.
    pub fn deterministic(data: Vec<f64>) -> Self {
        DiscreteProcess {
            realizations: vec![Realization {
                id: 0,
                probability: 1.0,
                data,
            }],
            stationary: true,
        }
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.realizations.first().map_or(0, |r| r.data.len())
    }

    /// Draws a realization index by inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, r) in self.realizations.iter().enumerate() {
            acc += r.probability;
            if u < acc {
                return i;
            }
        }
        self.realizations.len() - 1
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        (0..len).map(|_| self.sample(rng)).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.realizations.iter().map(|r| r.probability).sum()
    }
}
