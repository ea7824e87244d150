//! Solves a small production LP and prints the primal, the duals and a
//! check that the dual objective matches.
//!
//! ```text
//! cargo run --example solve_lp
//! ```

use rollhorizon::lp::{dual_objective, solve, LinearProgram};

fn main() {
    // two products sharing 40 hours and 30 units of material; slacks make
    // the rows equalities
    let mut lp = LinearProgram::new(0);
    let a = lp.add_var(-3.0, 0.0, f64::INFINITY);
    let b = lp.add_var(-5.0, 0.0, 8.0);
    let hours = lp.add_var(0.0, 0.0, f64::INFINITY);
    let material = lp.add_var(0.0, 0.0, f64::INFINITY);
    lp.add_row(&[(a, 1.0), (b, 2.0), (hours, 1.0)], 40.0);
    lp.add_row(&[(a, 1.0), (b, 1.0), (material, 1.0)], 30.0);

    let sol = solve(&lp);
    println!("status={:?} pivots={}", sol.status, sol.pivots);
    println!(
        "a={:.3} b={:.3} objective={:.3}",
        sol.primal[a], sol.primal[b], sol.objective
    );
    println!("duals: hours={:.3} material={:.3}", sol.duals[0], sol.duals[1]);
    println!("dual objective={:.3}", dual_objective(&lp, &sol));
}
