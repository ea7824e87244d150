//! Value iteration on finite discounted models, used as ground truth.
//!
//! At state `x` an outcome `ξ` is drawn, then an action is chosen among
//! `choices[x][ξ]`, each with an immediate cost and a successor state:
//! `g^k(x) = Σ_ξ p_ξ min_a [c_a + γ g^{k-1}(next_a)]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub cost: f64,
    pub next: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    pub outcome_probs: Vec<f64>,
    /// `choices[state][outcome]` lists the available actions.
    pub choices: Vec<Vec<Vec<Transition>>>,
}

impl FiniteMdp {
    pub fn num_states(&self) -> usize {
        self.choices.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        let m = self.outcome_probs.len();
        let total: f64 = self.outcome_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.outcome_probs.iter().any(|&p| p < 0.0) {
            return Err(Error::Config("outcome probabilities must sum to one".into()));
        }
        for (x, row) in self.choices.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "state {x} lists {} outcomes, expected {m}",
                    row.len()
                )));
            }
            for acts in row {
                if acts.is_empty() || acts.iter().any(|a| a.next >= n) {
                    return Err(Error::Config(format!("state {x} has an empty or invalid action set")));
                }
            }
        }
        Ok(())
    }

    /// Largest stage-cost magnitude.
    pub fn kappa(&self) -> f64 {
        self.choices
            .iter()
            .flatten()
            .flatten()
            .map(|a| a.cost.abs())
            .fold(0.0, f64::max)
    }

    fn backup(&self, gamma: f64, g: &[f64]) -> Vec<f64> {
        self.choices
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.outcome_probs)
                    .map(|(acts, p)| {
                        p * acts
                            .iter()
                            .map(|a| a.cost + gamma * g[a.next])
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum()
            })
            .collect()
    }
}

/// `g^0, …, g^K` starting from `g^0 = 0`.
pub fn value_iteration_oracle(mdp: &FiniteMdp, gamma: f64, iterations: usize) -> Vec<Vec<f64>> {
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(vec![0.0; mdp.num_states()]);
    for k in 0..iterations {
        let next = mdp.backup(gamma, &trace[k]);
        trace.push(next);
    }
    trace
}

/// Iterates until the sup-norm change falls below `tol`.
pub fn fixed_point(mdp: &FiniteMdp, gamma: f64, tol: f64) -> Vec<f64> {
    let mut g = vec![0.0; mdp.num_states()];
    loop {
        let next = mdp.backup(gamma, &g);
        let diff = sup_dist(&next, &g);
        g = next;
        if diff <= tol || gamma == 0.0 {
            return g;
        }
    }
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Lowest-index minimizing action per state and outcome.
pub fn greedy_policy(mdp: &FiniteMdp, gamma: f64, g: &[f64]) -> Vec<Vec<usize>> {
    mdp.choices
        .iter()
        .map(|row| {
            row.iter()
                .map(|acts| {
                    let mut best = 0;
                    let mut val = f64::INFINITY;
                    for (i, a) in acts.iter().enumerate() {
                        let v = a.cost + gamma * g[a.next];
                        if v < val - 1e-12 {
                            val = v;
                            best = i;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect()
}

/// Look-ahead policy of horizon `τ`: greedy with respect to `g^{τ-1}`.
pub fn lookahead_policy(mdp: &FiniteMdp, gamma: f64, tau: usize) -> Vec<Vec<usize>> {
    let trace = value_iteration_oracle(mdp, gamma, tau.saturating_sub(1));
    greedy_policy(mdp, gamma, trace.last().unwrap())
}

/// Exact discounted value of a stationary policy by solving
/// `(I - γ P) v = c` with Gaussian elimination.
pub fn evaluate_policy(mdp: &FiniteMdp, gamma: f64, policy: &[Vec<usize>]) -> Vec<f64> {
    let n = mdp.num_states();
    let mut a = vec![vec![0.0; n + 1]; n];
    for x in 0..n {
        a[x][x] += 1.0;
        for (w, p) in mdp.outcome_probs.iter().enumerate() {
            let t = mdp.choices[x][w][policy[x][w]];
            a[x][t.next] -= gamma * p;
            a[x][n] += p * t.cost;
        }
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let p = a[c][c];
        for k in c..=n {
            a[c][k] /= p;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    a.iter().map(|row| row[n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c: f64) -> FiniteMdp {
        FiniteMdp {
            outcome_probs: vec![1.0],
            choices: vec![vec![vec![Transition { cost: c, next: 0 }]]],
        }
    }

    #[test]
    fn geometric_series() {
        let (c, g) = (3.0, 0.7);
        let tr = value_iteration_oracle(&single(c), g, 30);
        for (k, v) in tr.iter().enumerate() {
            let exact = c * (1.0 - g.powi(k as i32)) / (1.0 - g);
            assert!((v[0] - exact).abs() < 1e-12);
        }
        assert!((fixed_point(&single(c), g, 1e-13)[0] - c / (1.0 - g)).abs() < 1e-10);
    }

    #[test]
    fn two_state_chain() {
        // 0 -> 1 at cost 1, 1 -> 0 at cost 4, γ = 0.5:
        // v0 = 1 + v1/2, v1 = 4 + v0/2  =>  v0 = 4, v1 = 6.
        let mdp = FiniteMdp {
            outcome_probs: vec![1.0],
            choices: vec![
                vec![vec![Transition { cost: 1.0, next: 1 }]],
                vec![vec![Transition { cost: 4.0, next: 0 }]],
            ],
        };
        let g = fixed_point(&mdp, 0.5, 1e-14);
        assert!((g[0] - 4.0).abs() < 1e-10 && (g[1] - 6.0).abs() < 1e-10);
        let v = evaluate_policy(&mdp, 0.5, &[vec![0], vec![0]]);
        assert!((v[0] - 4.0).abs() < 1e-12 && (v[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_discount_is_myopic() {
        let mdp = FiniteMdp {
            outcome_probs: vec![0.5, 0.5],
            choices: vec![vec![
                vec![Transition { cost: 2.0, next: 0 }, Transition { cost: 1.0, next: 0 }],
                vec![Transition { cost: 5.0, next: 0 }],
            ]],
        };
        let tr = value_iteration_oracle(&mdp, 0.0, 5);
        for v in &tr[1..] {
            assert_eq!(v[0], 3.0);
        }
    }
}
