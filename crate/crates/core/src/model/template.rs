use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::model::process::DiscreteProcess;
use crate::sddp::cuts::Cut;

/// A right-hand-side entry written by each realization:
/// `rhs[row] += scale * data[data_index]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomRhs {
    pub row: usize,
    pub data_index: usize,
    pub scale: f64,
}

/// One stage of a stage-wise identical multistage LP:
/// `min c'x  s.t.  A x + B x_prev = b(ξ),  l <= x <= u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTemplate {
    pub base_lp: LinearProgram,
    /// `B`, one row per equality row of `base_lp`, one column per state entry.
    pub linking_matrix: Vec<Vec<f64>>,
    pub rhs_random_map: Vec<RandomRhs>,
    /// Columns of `base_lp` that form the outgoing state `x_t`.
    pub state_extract: Vec<usize>,
}

/// How the epigraph column is bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epigraph {
    /// `θ >= floor`; the cost-to-go is approximated by cuts.
    Floor(f64),
    /// `θ = 0`; the stage is the last one of the horizon.
    Terminal,
}

impl StageTemplate {
    pub fn state_dim(&self) -> usize {
        self.state_extract.len()
    }

    pub fn num_decisions(&self) -> usize {
        self.base_lp.num_vars()
    }

    pub fn validate(&self) -> Result<()> {
        self.base_lp.validate().map_err(Error::Config)?;
        let rows = self.base_lp.num_rows();
        if self.linking_matrix.len() != rows {
            return Err(Error::Dimension(format!(
                "linking matrix has {} rows, stage LP has {rows}",
                self.linking_matrix.len()
            )));
        }
        let k = self.state_dim();
        if self.linking_matrix.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension(format!("linking matrix rows must have {k} entries")));
        }
        if self.state_extract.iter().any(|&j| j >= self.num_decisions()) {
            return Err(Error::Dimension("state column out of range".into()));
        }
        if self.rhs_random_map.iter().any(|m| m.row >= rows) {
            return Err(Error::Dimension("random rhs row out of range".into()));
        }
        Ok(())
    }

    /// `b(ξ) - B x_prev`.
    pub fn rhs(&self, incoming: &[f64], data: &[f64]) -> Vec<f64> {
        let mut b = self.base_lp.eq_rhs.clone();
        for m in &self.rhs_random_map {
            b[m.row] += m.scale * data[m.data_index];
        }
        for (i, row) in self.linking_matrix.iter().enumerate() {
            for (k, &coef) in row.iter().enumerate() {
                if coef != 0.0 {
                    b[i] -= coef * incoming[k];
                }
            }
        }
        b
    }

    /// Immediate cost of a decision (the epigraph column excluded).
    pub fn stage_cost(&self, decision: &[f64]) -> f64 {
        self.base_lp.evaluate(&decision[..self.num_decisions()])
    }

    pub fn outgoing_state(&self, decision: &[f64]) -> Vec<f64> {
        self.state_extract.iter().map(|&j| decision[j]).collect()
    }

    /// Subgradient of the stage value in `x_prev` from equality-row duals:
    /// `g = -Bᵀ π`.
    pub fn state_subgradient(&self, duals: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.state_dim()];
        for (i, row) in self.linking_matrix.iter().enumerate() {
            for (k, &coef) in row.iter().enumerate() {
                g[k] -= coef * duals[i];
            }
        }
        g
    }
}

/// Column index of `θ` in an instantiated stage LP.
pub fn theta_column(tmpl: &StageTemplate) -> usize {
    tmpl.num_decisions()
}

/// Builds the stage LP `min f(x) + discount·θ` with one row
/// `θ - β·x - slack = α` per cut and the RHS set from `incoming` and `data`.
pub fn instantiate_stage(
    tmpl: &StageTemplate,
    incoming: &[f64],
    data: &[f64],
    cuts: &[Cut],
    epigraph: Epigraph,
    discount: f64,
) -> Result<LinearProgram> {
    if incoming.len() != tmpl.state_dim() {
        return Err(Error::Dimension(format!(
            "incoming state has {} entries, template expects {}",
            incoming.len(),
            tmpl.state_dim()
        )));
    }
    if let Some(c) = cuts.iter().find(|c| c.beta.len() != tmpl.state_dim()) {
        return Err(Error::Dimension(format!(
            "cut has {} coefficients, state has {}",
            c.beta.len(),
            tmpl.state_dim()
        )));
    }
    let mut lp = tmpl.base_lp.clone();
    lp.eq_rhs = tmpl.rhs(incoming, data);
    let (lo, hi) = match epigraph {
        Epigraph::Floor(f) => (f, f64::INFINITY),
        Epigraph::Terminal => (0.0, 0.0),
    };
    let theta = lp.add_var(discount, lo, hi);
    if epigraph == Epigraph::Terminal {
        return Ok(lp);
    }
    for cut in cuts {
        let slack = lp.add_var(0.0, 0.0, f64::INFINITY);
        let mut terms = vec![(theta, 1.0), (slack, -1.0)];
        for (k, &j) in tmpl.state_extract.iter().enumerate() {
            if cut.beta[k] != 0.0 {
                terms.push((j, -cut.beta[k]));
            }
        }
        lp.add_row(&terms, cut.alpha);
    }
    Ok(lp)
}

/// A stage-wise identical multistage problem: template, random process,
/// incoming state before stage one, and the deterministic first-stage data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MspModel {
    pub template: StageTemplate,
    pub process: DiscreteProcess,
    pub initial_state: Vec<f64>,
    pub first_data: Vec<f64>,
    /// Lower bound on every cost-to-go function.
    pub floor: f64,
}

impl MspModel {
    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.initial_state.len() != self.template.state_dim() {
            return Err(Error::Dimension("initial state length".into()));
        }
        let need = self
            .template
            .rhs_random_map
            .iter()
            .map(|m| m.data_index + 1)
            .max()
            .unwrap_or(0);
        if self.first_data.len() < need || self.process.dim() < need {
            return Err(Error::Dimension(format!("random rhs reads {need} data entries")));
        }
        Ok(())
    }

    pub fn with_start(&self, incoming: Vec<f64>, data: Vec<f64>) -> MspModel {
        MspModel {
            initial_state: incoming,
            first_data: data,
            ..self.clone()
        }
    }
}
