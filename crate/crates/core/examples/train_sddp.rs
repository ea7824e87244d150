//! Trains a finite-horizon policy on the single-plant benchmark and prints
//! the lower-bound trace and the first-stage decision.
//!
//! ```text
//! cargo run --release --example train_sddp -- [horizon] [iterations]
//! ```

use std::env;

use rollhorizon::model::{build_hpop, Preset};
use rollhorizon::sddp::{first_stage, train, TrainConfig};

fn main() -> rollhorizon::Result<()> {
    let arg = |i: usize, d: usize| env::args().nth(i).and_then(|v| v.parse().ok()).unwrap_or(d);
    let (horizon, iterations) = (arg(1, 24), arg(2, 1000));
    let inst = build_hpop(Preset::new(1, 1000.0, 5))?;
    let model = inst.model();
    let cfg = TrainConfig {
        max_iterations: iterations,
        stall_window: 50,
        ..TrainConfig::default()
    };
    let (pool, report) = train(&model, horizon, &cfg)?;
    for (k, lb) in report.lower_bounds.iter().enumerate().step_by(25) {
        println!("iteration {:>4}: lower bound {lb:.2}", k + 1);
    }
    println!(
        "{:?} after {} iterations, {} cuts, final bound {:.2}, forward mean {:.2}",
        report.termination,
        report.iterations,
        pool.len(),
        report.final_lower_bound().unwrap_or(f64::NAN),
        report.upper_bound_mean
    );
    let lay = inst.layout();
    let sol = first_stage(&model, &pool, horizon)?;
    println!(
        "first stage: storage={:.1} turbine={:.1} unmet={:.1} cost={:.2}",
        sol.decision[lay.storage[0]], sol.decision[lay.turbine[0]], sol.decision[lay.unmet], sol.stage_cost
    );
    Ok(())
}
