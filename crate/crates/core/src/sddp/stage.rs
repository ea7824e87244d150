use crate::error::{Error, Result};
use crate::lp::{solve, LpStatus};
use crate::model::template::{instantiate_stage, theta_column, Epigraph, StageTemplate};
use crate::sddp::cuts::Cut;

/// Optimal solution of one instantiated stage LP.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    /// Stage decision without the epigraph column.
    pub decision: Vec<f64>,
    pub theta: f64,
    /// `f(x) + discount·θ`.
    pub objective: f64,
    pub stage_cost: f64,
    /// Duals of the template's equality rows.
    pub duals: Vec<f64>,
    pub state: Vec<f64>,
}

const VIOLATION_TOL: f64 = 1e-9;

/// Solves a stage LP with cut constraints added on demand.
///
/// The LP is first solved with the cuts listed in `active`; the most
/// violated remaining cut at the resulting point is added and the LP is
/// solved again until no cut is violated. The final point is optimal for
/// the LP with every cut, and the omitted cut rows carry zero duals.
/// On return `active` holds the cuts binding at the optimum.
pub fn solve_stage(
    tmpl: &StageTemplate,
    incoming: &[f64],
    data: &[f64],
    cuts: &[Cut],
    epigraph: Epigraph,
    discount: f64,
    active: &mut Vec<usize>,
    stage: usize,
) -> Result<StageSolution> {
    active.retain(|&k| k < cuts.len());
    active.sort_unstable();
    active.dedup();
    let theta_col = theta_column(tmpl);
    let n = tmpl.num_decisions();
    let rows = tmpl.base_lp.num_rows();
    loop {
        let subset: Vec<Cut> = active.iter().map(|&k| cuts[k].clone()).collect();
        let lp = instantiate_stage(tmpl, incoming, data, &subset, epigraph, discount)?;
        let sol = solve(&lp);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible { stage }),
            LpStatus::Unbounded => return Err(Error::Unbounded { stage }),
        }
        let theta = sol.primal[theta_col];
        let state = tmpl.outgoing_state(&sol.primal);
        if epigraph != Epigraph::Terminal {
            let tol = VIOLATION_TOL * (1.0 + theta.abs());
            let mut worst: Option<(usize, f64)> = None;
            for (k, c) in cuts.iter().enumerate() {
                let v = c.eval(&state) - theta;
                if v > tol && worst.map_or(true, |(_, w)| v > w) && !active.contains(&k) {
                    worst = Some((k, v));
                }
            }
            if let Some((k, _)) = worst {
                active.push(k);
                active.sort_unstable();
                continue;
            }
        }
        // Keep only binding cuts as the hint for the next solve.
        let binding: Vec<usize> = active
            .iter()
            .enumerate()
            .filter(|(i, _)| sol.primal[n + 1 + i].abs() <= 1e-9 * (1.0 + theta.abs()))
            .map(|(_, &k)| k)
            .collect();
        *active = binding;
        let decision = sol.primal[..n].to_vec();
        let stage_cost = tmpl.stage_cost(&decision);
        return Ok(StageSolution {
            stage_cost,
            objective: sol.objective,
            theta,
            duals: sol.duals[..rows].to_vec(),
            state,
            decision,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinearProgram;
    use crate::model::template::RandomRhs;

    fn tmpl() -> StageTemplate {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![0.0, 2.0];
        lp.var_upper[0] = 10.0;
        lp.add_row(&[(0, 1.0), (1, -1.0)], 0.0);
        StageTemplate {
            base_lp: lp,
            linking_matrix: vec![vec![-1.0]],
            rhs_random_map: vec![RandomRhs {
                row: 0,
                data_index: 0,
                scale: 1.0,
            }],
            state_extract: vec![0],
        }
    }

    #[test]
    fn lazy_matches_full() {
        let t = tmpl();
        let cuts: Vec<Cut> = (0..12)
            .map(|k| Cut::new(vec![-(k as f64) * 0.5], 3.0 + k as f64, 0))
            .collect();
        for incoming in [0.0, 1.0, 4.0, 9.0] {
            let full = instantiate_stage(&t, &[incoming], &[1.0], &cuts, Epigraph::Floor(0.0), 0.9).unwrap();
            let f = solve(&full);
            let mut act = Vec::new();
            let l = solve_stage(&t, &[incoming], &[1.0], &cuts, Epigraph::Floor(0.0), 0.9, &mut act, 1).unwrap();
            assert!((f.objective - l.objective).abs() < 1e-9);
            // Duals need not coincide at a kink; both must be subgradients.
            let g = t.state_subgradient(&l.duals)[0];
            for probe in [incoming - 0.5, incoming + 0.5, incoming + 2.0] {
                let lp = instantiate_stage(&t, &[probe], &[1.0], &cuts, Epigraph::Floor(0.0), 0.9).unwrap();
                let probe_sol = solve(&lp);
                if !probe_sol.is_optimal() {
                    continue;
                }
                let v = probe_sol.objective;
                assert!(
                    v >= l.objective + g * (probe - incoming) - 1e-9,
                    "{incoming} {probe} {:?} {:?}",
                    f.duals,
                    l.duals
                );
            }
            let mut again = act.clone();
            let l2 = solve_stage(&t, &[incoming], &[1.0], &cuts, Epigraph::Floor(0.0), 0.9, &mut again, 1).unwrap();
            assert!((l2.objective - l.objective).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_has_no_cost_to_go() {
        let t = tmpl();
        let cuts = vec![Cut::new(vec![0.0], 100.0, 0)];
        let s = solve_stage(&t, &[1.0], &[0.0], &cuts, Epigraph::Terminal, 1.0, &mut vec![], 1).unwrap();
        assert_eq!(s.theta, 0.0);
        assert_eq!(s.objective, s.stage_cost);
    }
}
