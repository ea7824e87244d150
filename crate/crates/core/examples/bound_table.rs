//! Prints epsilon-sufficient horizons for a supplied kappa, and for the
//! kappa computed from the single-plant benchmark.
//!
//! ```text
//! cargo run --example bound_table -- [kappa] [epsilon]
//! ```

use std::env;

use rollhorizon::cli::TABLE_GAMMAS;
use rollhorizon::horizon::{compute_kappa, epsilon_sufficient_horizon, suboptimality_bound, BoundInput, Regime};
use rollhorizon::model::{build_hpop, Preset};

fn main() -> rollhorizon::Result<()> {
    let arg = |i: usize, d: f64| env::args().nth(i).and_then(|v| v.parse().ok()).unwrap_or(d);
    let (kappa, epsilon) = (arg(1, 53000.0), arg(2, 1e-5));
    let computed = compute_kappa(&build_hpop(Preset::new(1, 1000.0, 5))?)?;
    for k in [kappa, computed] {
        println!("kappa={k} epsilon={epsilon:e}");
        for gamma in TABLE_GAMMAS {
            let tau = epsilon_sufficient_horizon(&BoundInput {
                kappa: k,
                gamma,
                epsilon,
                regime: Regime::General,
            })?;
            let at_ceil = suboptimality_bound(tau.ceil(), gamma, k, Regime::General);
            println!("  gamma={gamma:<5} tau*={tau:>9.2}  bound at ceil={at_ceil:.2e}");
        }
    }
    Ok(())
}
