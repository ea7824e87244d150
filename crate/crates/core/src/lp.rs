//! Dense bounded-variable revised simplex.
//!
//! Solves `min c'x  s.t.  A x = b,  l <= x <= u` with a two-phase primal
//! method. Entering and leaving variables are chosen by Bland's rule, so the
//! solver terminates on degenerate problems and is deterministic. Artificial
//! columns `±e_i` are appended for phase one; their reduced costs give the
//! equality-row duals directly.
//!
//! Stage subproblems in this crate have a few dozen columns at most, so the
//! basis inverse is kept explicitly and updated with a rank-one eta step.

use serde::{Deserialize, Serialize};

/// Primal feasibility tolerance on `‖Ax - b‖∞` and bounds.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance for primal/dual objective agreement.
pub const DUALITY_TOL: f64 = 1e-6;
/// Entries below this magnitude are treated as zero in pivoting.
pub const PIVOT_TOL: f64 = 1e-9;

const REFACTOR_EVERY: usize = 64;
const MAX_PIVOTS: usize = 200_000;

/// `min c'x` subject to `eq_matrix · x = eq_rhs` and variable bounds.
///
/// `var_upper` may hold `f64::INFINITY`; `var_lower` may hold
/// `f64::NEG_INFINITY` (free variables are supported but not needed by the
/// stage models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    /// One multiplier per equality row: `∂ objective / ∂ eq_rhs[i]`.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            var_lower: vec![0.0; num_vars],
            var_upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Appends a column with the given cost and bounds, returning its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.var_lower.push(lower);
        self.var_upper.push(upper);
        for row in &mut self.eq_matrix {
            row.push(0.0);
        }
        self.objective.len() - 1
    }

    /// Appends an equality row given as sparse `(column, coefficient)` terms.
    pub fn add_row(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self.eq_rhs.len() - 1
    }

    /// Checks the shape and bound invariants.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.objective.len();
        if self.var_lower.len() != n || self.var_upper.len() != n {
            return Err(format!(
                "bound vectors have lengths {}/{} but objective has {n}",
                self.var_lower.len(),
                self.var_upper.len()
            ));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() {
            return Err(format!(
                "{} matrix rows but {} right-hand sides",
                self.eq_matrix.len(),
                self.eq_rhs.len()
            ));
        }
        for (i, row) in self.eq_matrix.iter().enumerate() {
            if row.len() != n {
                return Err(format!("row {i} has {} entries, expected {n}", row.len()));
            }
        }
        for j in 0..n {
            if self.var_lower[j] > self.var_upper[j] || self.var_lower[j].is_nan() {
                return Err(format!(
                    "variable {j} has lower {} above upper {}",
                    self.var_lower[j], self.var_upper[j]
                ));
            }
        }
        Ok(())
    }

    /// `‖A x - b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.eq_matrix
            .iter()
            .zip(&self.eq_rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// Sign of each artificial column.
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    place: Vec<Place>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let total = n + m;
        let mut lower = Vec::with_capacity(total);
        let mut upper = Vec::with_capacity(total);
        let mut x = vec![0.0; total];
        let mut place = Vec::with_capacity(total);
        for j in 0..n {
            let (l, u) = (lp.var_lower[j], lp.var_upper[j]);
            lower.push(l);
            upper.push(u);
            if l.is_finite() {
                x[j] = l;
                place.push(Place::AtLower);
            } else if u.is_finite() {
                x[j] = u;
                place.push(Place::AtUpper);
            } else {
                place.push(Place::Zero);
            }
        }
        let mut art_sign = vec![1.0; m];
        for i in 0..m {
            let row = &lp.eq_matrix[i];
            let activity: f64 = (0..n).map(|j| row[j] * x[j]).sum();
            let r = lp.eq_rhs[i] - activity;
            art_sign[i] = if r >= 0.0 { 1.0 } else { -1.0 };
            x[n + i] = r.abs();
            lower.push(0.0);
            upper.push(f64::INFINITY);
            place.push(Place::Basic);
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = art_sign[i];
        }
        Simplex {
            lp,
            m,
            n,
            art_sign,
            lower,
            upper,
            x,
            place,
            basis: (n..n + m).collect(),
            binv,
            pivots: 0,
            since_refactor: 0,
        }
    }

    #[inline]
    fn column_entry(&self, j: usize, i: usize) -> f64 {
        if j < self.n {
            self.lp.eq_matrix[i][j]
        } else if j - self.n == i {
            self.art_sign[i]
        } else {
            0.0
        }
    }

    /// `B⁻¹ A_j`.
    fn ftran(&self, j: usize, out: &mut [f64]) {
        let m = self.m;
        if j >= self.n {
            let k = j - self.n;
            let s = self.art_sign[k];
            for i in 0..m {
                out[i] = self.binv[i * m + k] * s;
            }
            return;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let a = self.lp.eq_matrix[k][j];
            if a != 0.0 {
                for i in 0..m {
                    out[i] += self.binv[i * m + k] * a;
                }
            }
        }
    }

    /// `c_B' B⁻¹`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost[bj];
            if cb != 0.0 {
                for k in 0..m {
                    y[k] += cb * self.binv[i * m + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        if j < self.n {
            let mut d = cost[j];
            for (i, yi) in y.iter().enumerate() {
                let a = self.lp.eq_matrix[i][j];
                if a != 0.0 {
                    d -= yi * a;
                }
            }
            d
        } else {
            let i = j - self.n;
            cost[j] - y[i] * self.art_sign[i]
        }
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination and recomputes basic values.
    fn refactor(&mut self) {
        let m = self.m;
        if m == 0 {
            return;
        }
        let mut a = vec![0.0; m * m];
        for (c, &bj) in self.basis.iter().enumerate() {
            for i in 0..m {
                a[i * m + c] = self.column_entry(bj, i);
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-14 {
                // Singular basis from accumulated error; keep the product-form inverse.
                return;
            }
            if piv != col {
                for k in 0..m {
                    a.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        // `a` was B with rows permuted into identity; inv = B⁻¹ with basis order by column.
        self.binv = inv;
        self.recompute_basics();
        self.since_refactor = 0;
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = self.lp.eq_rhs.clone();
        for j in 0..self.n + m {
            if self.place[j] != Place::Basic && self.x[j] != 0.0 {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= self.column_entry(j, i) * self.x[j];
                }
            }
        }
        for i in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[i * m + k] * r[k];
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn run(&mut self, cost: &[f64]) -> Outcome {
        let m = self.m;
        let total = self.n + m;
        let mut alpha = vec![0.0; m];
        loop {
            if self.pivots >= MAX_PIVOTS {
                // Bland's rule cannot cycle; this only guards against numerical trouble.
                return Outcome::Optimal;
            }
            let y = self.duals(cost);
            // Bland: lowest-index improving column.
            let mut entering = None;
            for j in 0..total {
                let dir = match self.place[j] {
                    Place::Basic => continue,
                    _ if self.upper[j] - self.lower[j] <= 0.0 => continue,
                    p => {
                        let d = self.reduced_cost(j, cost, &y);
                        match p {
                            Place::AtLower if d < -PIVOT_TOL => 1.0,
                            Place::AtUpper if d > PIVOT_TOL => -1.0,
                            Place::Zero if d < -PIVOT_TOL => 1.0,
                            Place::Zero if d > PIVOT_TOL => -1.0,
                            _ => continue,
                        }
                    }
                };
                entering = Some((j, dir));
                break;
            }
            let Some((q, dir)) = entering else {
                return Outcome::Optimal;
            };
            self.ftran(q, &mut alpha);

            // Ratio test. Basic variable i moves by -dir * alpha[i] per unit step.
            let mut step = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None; // (row, goes to upper)
            for i in 0..m {
                let delta = -dir * alpha[i];
                let bj = self.basis[i];
                let (limit, to_upper) = if delta < -PIVOT_TOL {
                    if !self.lower[bj].is_finite() {
                        continue;
                    }
                    (((self.x[bj] - self.lower[bj]) / -delta).max(0.0), false)
                } else if delta > PIVOT_TOL {
                    if !self.upper[bj].is_finite() {
                        continue;
                    }
                    (((self.upper[bj] - self.x[bj]) / delta).max(0.0), true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((r, _)) => limit < step - 1e-12 || (limit <= step + 1e-12 && bj < self.basis[r]),
                };
                if better {
                    step = limit;
                    leave = Some((i, to_upper));
                }
            }
            let flip = self.upper[q] - self.lower[q];
            if flip.is_finite() && flip <= step {
                for i in 0..m {
                    let bj = self.basis[i];
                    self.x[bj] -= dir * alpha[i] * flip;
                }
                if dir > 0.0 {
                    self.x[q] = self.upper[q];
                    self.place[q] = Place::AtUpper;
                } else {
                    self.x[q] = self.lower[q];
                    self.place[q] = Place::AtLower;
                }
                self.pivots += 1;
                continue;
            }
            let Some((r, to_upper)) = leave else {
                return Outcome::Unbounded;
            };

            for i in 0..m {
                let bj = self.basis[i];
                self.x[bj] -= dir * alpha[i] * step;
            }
            self.x[q] += dir * step;
            let out = self.basis[r];
            if to_upper {
                self.x[out] = self.upper[out];
                self.place[out] = Place::AtUpper;
            } else {
                self.x[out] = self.lower[out];
                self.place[out] = Place::AtLower;
            }
            self.place[q] = Place::Basic;
            self.basis[r] = q;

            let p = alpha[r];
            for k in 0..m {
                self.binv[r * m + k] /= p;
            }
            for i in 0..m {
                if i != r && alpha[i] != 0.0 {
                    let f = alpha[i];
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[r * m + k];
                    }
                }
            }
            self.pivots += 1;
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
        }
    }
}

/// Solves `lp`. Non-optimal outcomes are reported through `status`.
///
/// Panics if the program violates its shape invariants; call
/// [`LinearProgram::validate`] first on untrusted input.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    if let Err(e) = lp.validate() {
        panic!("malformed linear program: {e}");
    }
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut sx = Simplex::new(lp);

    // Phase one: drive artificials to zero.
    let mut cost1 = vec![0.0; n + m];
    for c in cost1.iter_mut().skip(n) {
        *c = 1.0;
    }
    let infeasibility: f64 = (n..n + m).map(|j| sx.x[j]).sum();
    if infeasibility > 0.0 {
        sx.run(&cost1);
        sx.refactor();
    }
    let scale = 1.0 + lp.eq_rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let infeasibility: f64 = (n..n + m).map(|j| sx.x[j].abs()).sum();
    if infeasibility > FEAS_TOL * scale {
        return LpSolution {
            primal: sx.x[..n].to_vec(),
            duals: vec![0.0; m],
            objective: f64::NAN,
            status: LpStatus::Infeasible,
            pivots: sx.pivots,
        };
    }
    for j in n..n + m {
        sx.upper[j] = 0.0;
        if sx.place[j] != Place::Basic {
            sx.x[j] = 0.0;
            sx.place[j] = Place::AtLower;
        }
    }

    // Phase two.
    let mut cost2 = lp.objective.clone();
    cost2.resize(n + m, 0.0);
    let outcome = sx.run(&cost2);
    if let Outcome::Unbounded = outcome {
        return LpSolution {
            primal: sx.x[..n].to_vec(),
            duals: vec![0.0; m],
            objective: f64::NEG_INFINITY,
            status: LpStatus::Unbounded,
            pivots: sx.pivots,
        };
    }
    sx.refactor();
    let mut primal = sx.x[..n].to_vec();
    for j in 0..n {
        primal[j] = primal[j].clamp(lp.var_lower[j], lp.var_upper[j]);
    }
    let duals = sx.duals(&cost2);
    let objective = lp.evaluate(&primal);
    LpSolution {
        primal,
        duals,
        objective,
        status: LpStatus::Optimal,
        pivots: sx.pivots,
    }
}

/// Dual objective `b'y + Σ_j d_j x_j` at the bound-held variables; equals
/// the primal objective at an optimal basis.
pub fn dual_objective(lp: &LinearProgram, sol: &LpSolution) -> f64 {
    let by: f64 = lp.eq_rhs.iter().zip(&sol.duals).map(|(b, y)| b * y).sum();
    let mut bound_part = 0.0;
    for j in 0..lp.num_vars() {
        let mut d = lp.objective[j];
        for (i, y) in sol.duals.iter().enumerate() {
            d -= y * lp.eq_matrix[i][j];
        }
        if d.abs() > PIVOT_TOL {
            bound_part += d * sol.primal[j];
        }
    }
    by + bound_part
}
