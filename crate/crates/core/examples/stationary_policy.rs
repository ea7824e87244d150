//! Trains discounted stationary policies for a few discount factors and
//! evaluates each on the same undiscounted path.
//!
//! ```text
//! cargo run --release --example stationary_policy -- [T]
//! ```

use std::env;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rollhorizon::model::{build_hpop, Preset};
use rollhorizon::sddp::TrainConfig;
use rollhorizon::stationary::{evaluate_stationary, stationary_lower_bound, train_stationary, StationaryModel};

fn main() -> rollhorizon::Result<()> {
    let rolls: usize = env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(200);
    let inst = build_hpop(Preset::new(1, 1000.0, 5))?;
    let path = inst.inflow.sample_path(rolls, &mut ChaCha8Rng::seed_from_u64(1));
    let cfg = TrainConfig {
        max_iterations: 2000,
        stall_window: 100,
        rng_seed: 1,
        ..TrainConfig::default()
    };
    for gamma in [0.5, 0.9, 0.95] {
        let sm = StationaryModel::new(inst.model(), gamma)?;
        let (pool, report) = train_stationary(&sm, &cfg)?;
        let eval = evaluate_stationary(&sm, &pool, &path)?;
        println!(
            "gamma={gamma:<4} iterations={:>4} cuts={:>4} bound={:>12.2} zbar={:>10.2} train={:.2}s",
            report.iterations,
            pool.len(),
            stationary_lower_bound(&sm, &pool)?,
            eval.zbar,
            report.wall_seconds
        );
    }
    Ok(())
}
