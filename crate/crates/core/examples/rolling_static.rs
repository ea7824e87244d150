//! Static rolling-horizon policies for several forecast horizons on one
//! evaluation path.
//!
//! ```text
//! cargo run --release --example rolling_static -- [T] [c0]
//! ```

use std::env;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rollhorizon::model::{build_hpop, Preset};
use rollhorizon::rolling::{simulate_hpop, PolicySpec, ProblemCache, SimulationOptions};

fn main() -> rollhorizon::Result<()> {
    let args: Vec<String> = env::args().collect();
    let rolls: usize = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(200);
    let c0: f64 = args.get(2).and_then(|v| v.parse().ok()).unwrap_or(1.0);
    let inst = build_hpop(Preset::new(1, 1000.0, 5).with_c0(c0))?;
    let path = inst.inflow.sample_path(rolls, &mut ChaCha8Rng::seed_from_u64(1));
    let opts = SimulationOptions::default();

    let mut rows = Vec::new();
    for tau in [1, 2, 4, 8, 16] {
        let r = simulate_hpop(
            &inst,
            &PolicySpec::Static { tau },
            &path,
            &opts,
            &mut ProblemCache::new(),
        )?;
        let iters: usize = r.training_iterations.iter().sum();
        println!(
            "tau={tau:>2}  zbar={:>12.2}  time={:>7.2}s  iterations={iters}",
            r.zbar, r.wall_seconds
        );
        rows.push((tau, r.zbar));
    }
    let best = rows.last().unwrap().1;
    for (tau, z) in rows {
        println!("gap vs tau=16 at tau={tau:>2}: {:>7.2}%", 100.0 * (z - best) / best);
    }
    Ok(())
}
