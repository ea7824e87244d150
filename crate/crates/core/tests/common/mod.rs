#![allow(dead_code)]

use rand::Rng;
use rollhorizon::lp::LinearProgram;
use rollhorizon::model::template::{MspModel, RandomRhs, StageTemplate};
use rollhorizon::model::DiscreteProcess;

/// Minimum objective over all basic feasible solutions, found by choosing
/// every set of `m` basic columns and every placement of the nonbasic
/// columns at a finite bound. `None` if no basic solution is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let reduced = independent_rows(lp)?;
    let lp = &reduced;
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut best: Option<f64> = None;
    let mut basis = Vec::with_capacity(m);
    combos(n, m, 0, &mut basis, &mut |basis| {
        let nonbasic: Vec<usize> = (0..n).filter(|j| !basis.contains(j)).collect();
        let choices: Vec<Vec<f64>> = nonbasic
            .iter()
            .map(|&j| {
                let mut v = Vec::new();
                if lp.var_lower[j].is_finite() {
                    v.push(lp.var_lower[j]);
                }
                if lp.var_upper[j].is_finite() && lp.var_upper[j] != lp.var_lower[j] {
                    v.push(lp.var_upper[j]);
                }
                v
            })
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            return;
        }
        let mut idx = vec![0usize; nonbasic.len()];
        loop {
            let mut x = vec![0.0; n];
            for (k, &j) in nonbasic.iter().enumerate() {
                x[j] = choices[k][idx[k]];
            }
            if let Some(xb) = solve_basis(lp, basis, &x) {
                for (k, &j) in basis.iter().enumerate() {
                    x[j] = xb[k];
                }
                let tol = 1e-9;
                let ok = (0..n).all(|j| x[j] >= lp.var_lower[j] - tol && x[j] <= lp.var_upper[j] + tol)
                    && lp.residual(&x) <= 1e-7;
                if ok {
                    let v = lp.evaluate(&x);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    });
    best
}

/// Keeps a maximal linearly independent subset of the rows. `None` when a
/// dependent row contradicts the others.
fn independent_rows(lp: &LinearProgram) -> Option<LinearProgram> {
    let n = lp.num_vars();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut out = LinearProgram::new(n);
    out.objective = lp.objective.clone();
    out.var_lower = lp.var_lower.clone();
    out.var_upper = lp.var_upper.clone();
    for (row, &rhs) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        let mut r: Vec<f64> = row.iter().copied().chain([rhs]).collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            let f = r[p] / b[p];
            for k in 0..=n {
                r[k] -= f * b[k];
            }
        }
        match (0..n).max_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())) {
            Some(p) if r[p].abs() > 1e-9 => {
                pivots.push(p);
                basis.push(r);
                let terms: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
                out.add_row(&terms, rhs);
            }
            _ if r[n].abs() > 1e-9 => return None,
            _ => {}
        }
    }
    Some(out)
}

fn combos(n: usize, m: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == m {
        f(cur);
        return;
    }
    for j in start..n {
        cur.push(j);
        combos(n, m, j + 1, cur, f);
        cur.pop();
    }
}

/// Solves `B x_B = b - N x_N` by Gaussian elimination; `None` if singular.
fn solve_basis(lp: &LinearProgram, basis: &[usize], x: &[f64]) -> Option<Vec<f64>> {
    let m = basis.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        let mut r = lp.eq_rhs[i];
        for j in 0..lp.num_vars() {
            if !basis.contains(&j) {
                r -= lp.eq_matrix[i][j] * x[j];
            }
        }
        for (k, &j) in basis.iter().enumerate() {
            a[i][k] = lp.eq_matrix[i][j];
        }
        a[i][m] = r;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

/// Random LP with finite bounds, usually built around a known feasible
/// point.
pub fn random_lp<R: Rng>(rng: &mut R, n: usize, m: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        lp.objective[j] = rng.gen_range(-5..=5) as f64;
        lp.var_lower[j] = rng.gen_range(-2..=1) as f64;
        lp.var_upper[j] = lp.var_lower[j] + rng.gen_range(0..=4) as f64;
    }
    let anchor: Vec<f64> = (0..n)
        .map(|j| rng.gen_range(lp.var_lower[j]..=lp.var_upper[j]))
        .collect();
    let feasible = rng.gen_bool(0.7);
    for _ in 0..m {
        let row: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| rng.gen_bool(0.7).then(|| (j, rng.gen_range(-3..=3) as f64)))
            .collect();
        let rhs = if feasible {
            row.iter().map(|&(j, a)| a * anchor[j]).sum()
        } else {
            rng.gen_range(-6..=6) as f64
        };
        lp.add_row(&row, rhs);
    }
    lp
}

/// Data for a single-reservoir model: storage `x ∈ [0, cap]` with holding
/// cost, turbined flow `y ∈ [0, turbine]`, spill, thermal output up to
/// `thermal_cap` and unmet demand, with rows
/// `x + y + spill = x_prev + ξ` and `y + g + p - surplus = demand`.
#[derive(Debug, Clone)]
pub struct ToySpec {
    pub cap: f64,
    pub turbine: f64,
    pub holding: f64,
    pub thermal_cap: f64,
    pub thermal_cost: f64,
    pub penalty: f64,
    pub demand: f64,
    pub inflows: Vec<f64>,
    pub probs: Vec<f64>,
    pub x0: f64,
    pub first_inflow: f64,
}

pub fn toy_template(s: &ToySpec) -> StageTemplate {
    // x, y, spill, g, p, surplus
    let mut lp = LinearProgram::new(6);
    lp.objective = vec![s.holding, 0.0, 0.0, s.thermal_cost, s.penalty, 0.0];
    lp.var_upper[0] = s.cap;
    lp.var_upper[1] = s.turbine;
    lp.var_upper[3] = s.thermal_cap;
    lp.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], 0.0);
    lp.add_row(&[(1, 1.0), (3, 1.0), (4, 1.0), (5, -1.0)], s.demand);
    StageTemplate {
        base_lp: lp,
        linking_matrix: vec![vec![-1.0], vec![0.0]],
        rhs_random_map: vec![RandomRhs {
            row: 0,
            data_index: 0,
            scale: 1.0,
        }],
        state_extract: vec![0],
    }
}

pub fn toy_model(s: &ToySpec) -> MspModel {
    MspModel {
        template: toy_template(s),
        process: DiscreteProcess::new(s.inflows.iter().map(|&b| vec![b]).collect(), s.probs.clone()).unwrap(),
        initial_state: vec![s.x0],
        first_data: vec![s.first_inflow],
        floor: 0.0,
    }
}

pub fn random_toy_spec<R: Rng>(rng: &mut R, outcomes: usize) -> ToySpec {
    let cap = rng.gen_range(2.0..10.0);
    let demand = rng.gen_range(1.0..6.0);
    let thermal_cost = rng.gen_range(1.0..5.0);
    ToySpec {
        cap,
        turbine: rng.gen_range(1.0..6.0),
        holding: rng.gen_range(0.0..0.2),
        thermal_cap: rng.gen_range(0.0..3.0),
        thermal_cost,
        penalty: thermal_cost + rng.gen_range(1.0..20.0),
        demand,
        inflows: (0..outcomes).map(|_| rng.gen_range(0.0..6.0)).collect(),
        probs: (0..outcomes).map(|_| rng.gen_range(0.2..1.0)).collect(),
        x0: rng.gen_range(0.0..cap),
        first_inflow: rng.gen_range(0.0..4.0),
    }
}

/// Deterministic-equivalent LP of a `horizon`-stage problem over the full
/// scenario tree, rooted at `incoming` with first-stage data `root_data`.
/// Returns the LP and the column range of the root decision.
pub fn deterministic_equivalent(
    model: &MspModel,
    horizon: usize,
    incoming: &[f64],
    root_data: &[f64],
) -> (LinearProgram, std::ops::Range<usize>) {
    let tmpl = &model.template;
    let nv = tmpl.num_decisions();
    let mut lp = LinearProgram::new(0);
    struct Node {
        offset: usize,
        parent: Option<usize>,
        data: Vec<f64>,
    }
    let mut stack = vec![(None::<usize>, 1.0, root_data.to_vec(), 1usize)];
    let mut nodes: Vec<Node> = Vec::new();
    while let Some((parent, prob, data, stage)) = stack.pop() {
        let offset = lp.num_vars();
        for j in 0..nv {
            lp.add_var(
                prob * tmpl.base_lp.objective[j],
                tmpl.base_lp.var_lower[j],
                tmpl.base_lp.var_upper[j],
            );
        }
        nodes.push(Node {
            offset,
            parent,
            data: data.clone(),
        });
        if stage < horizon {
            for r in model.process.realizations.iter().rev() {
                stack.push((Some(offset), prob * r.probability, r.data.clone(), stage + 1));
            }
        }
    }
    for node in &nodes {
        let zero = vec![0.0; tmpl.state_dim()];
        let base_in = if node.parent.is_none() { incoming } else { &zero[..] };
        let rhs = tmpl.rhs(base_in, &node.data);
        for (i, row) in tmpl.base_lp.eq_matrix.iter().enumerate() {
            let mut terms: Vec<(usize, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (node.offset + j, *a))
                .collect();
            if let Some(p) = node.parent {
                for (k, &col) in tmpl.state_extract.iter().enumerate() {
                    let b = tmpl.linking_matrix[i][k];
                    if b != 0.0 {
                        terms.push((p + col, b));
                    }
                }
            }
            lp.add_row(&terms, rhs[i]);
        }
    }
    (lp, 0..nv)
}

/// Optimal value of the deterministic equivalent.
pub fn de_value(model: &MspModel, horizon: usize, incoming: &[f64], root_data: &[f64]) -> f64 {
    let (lp, _) = deterministic_equivalent(model, horizon, incoming, root_data);
    let s = rollhorizon::lp::solve(&lp);
    assert!(s.is_optimal(), "deterministic equivalent not optimal: {:?}", s.status);
    s.objective
}

/// `𝔔(x)` for a cost-to-go with `remaining` stages left, by averaging the
/// deterministic equivalents rooted at each realization.
pub fn brute_force_cost_to_go(model: &MspModel, remaining: usize, x: &[f64]) -> f64 {
    model
        .process
        .realizations
        .iter()
        .map(|r| r.probability * de_value(model, remaining, x, &r.data))
        .sum()
}

/// Three-state inventory model: stock 0..=2, demand 0 or 1 with equal
/// probability, unmet demand costs 6, orders cost 2 per unit and arrive
/// next period, leftover stock costs 0.5 to hold. Ordering never pays off
/// within the current period, so short look-ahead is visibly suboptimal.
pub fn inventory_mdp() -> rollhorizon::horizon::FiniteMdp {
    use rollhorizon::horizon::{FiniteMdp, Transition};
    let choices = (0..3usize)
        .map(|stock| {
            (0..2usize)
                .map(|demand| {
                    let served = stock.min(demand);
                    let left = stock - served;
                    (0..=(2 - left))
                        .map(|q| Transition {
                            cost: 6.0 * (demand - served) as f64 + 2.0 * q as f64 + 0.5 * left as f64,
                            next: left + q,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    FiniteMdp {
        outcome_probs: vec![0.5, 0.5],
        choices,
    }
}

/// Scalar toy whose first-stage storage is `min(τ - 1, 2)`: one unit of
/// demand per stage met only by turbining, inflow 0 or 0.5 after a first
/// inflow of 3, a tiny holding cost and a large shortage penalty.
pub fn scan_toy(cap: f64) -> MspModel {
    toy_model(&ToySpec {
        cap,
        turbine: 1.0,
        holding: 0.01,
        thermal_cap: 0.0,
        thermal_cost: 1.0,
        penalty: 10.0,
        demand: 1.0,
        inflows: vec![0.0, 0.5],
        probs: vec![0.5, 0.5],
        x0: 0.0,
        first_inflow: 3.0,
    })
}

/// Root decision of the deterministic equivalent.
pub fn de_first_decision(model: &MspModel, horizon: usize) -> Vec<f64> {
    let (lp, root) = deterministic_equivalent(model, horizon, &model.initial_state, &model.first_data);
    let s = rollhorizon::lp::solve(&lp);
    assert!(s.is_optimal());
    s.primal[root].to_vec()
}
