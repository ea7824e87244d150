//! Learns a state-dependent forecast horizon offline and compares the
//! resulting dynamic policy with static ones on a common path.
//!
//! ```text
//! cargo run --release --example dynamic_horizon -- [N] [tau_max] [w] [c0]
//! ```

use std::env;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rollhorizon::horizon::map::fit_horizon_map;
use rollhorizon::horizon::scan::{run_scan, scan_points, ScanConfig};
use rollhorizon::model::{build_hpop, Preset};
use rollhorizon::rolling::{simulate_hpop, PolicySpec, ProblemCache, SimulationOptions};

fn main() -> rollhorizon::Result<()> {
    let arg = |i: usize, d: f64| env::args().nth(i).and_then(|v| v.parse().ok()).unwrap_or(d);
    let (samples, tau_max, w, c0) = (
        arg(1, 20.0) as usize,
        arg(2, 16.0) as usize,
        arg(3, 5.0) as usize,
        arg(4, 1.0),
    );
    let inst = build_hpop(Preset::new(1, 1000.0, 5).with_c0(c0))?;

    let cfg = ScanConfig {
        samples,
        tau_max,
        w,
        ..ScanConfig::default()
    };
    let t0 = std::time::Instant::now();
    let scan = run_scan(&inst, &cfg)?;
    for s in &scan {
        println!("sample {:>2}: phi1={:>9.1}  tau*={}", s.n, s.phi1, s.tau_star);
    }
    let map = fit_horizon_map(&scan_points(&scan), 3)?;
    println!("scan+fit {:.1}s, R2_avg={:.3}", t0.elapsed().as_secs_f64(), map.r2_avg);
    for p in &map.pieces {
        println!(
            "  [{:.0}, {:?}) theta0={:.3} theta1={:.3e}",
            p.lo, p.hi, p.theta0, p.theta1
        );
    }

    let path = inst.inflow.sample_path(200, &mut ChaCha8Rng::seed_from_u64(1));
    let opts = SimulationOptions::default();
    let dynamic = PolicySpec::Dynamic { map, tau_max };
    let r = simulate_hpop(&inst, &dynamic, &path, &opts, &mut ProblemCache::new())?;
    let mean_tau = r.horizons.iter().sum::<usize>() as f64 / r.rolls() as f64;
    println!(
        "dynamic: zbar={:.2} time={:.2}s mean tau={mean_tau:.2}",
        r.zbar, r.wall_seconds
    );
    for tau in [4, tau_max] {
        let s = simulate_hpop(
            &inst,
            &PolicySpec::Static { tau },
            &path,
            &opts,
            &mut ProblemCache::new(),
        )?;
        println!("static tau={tau}: zbar={:.2} time={:.2}s", s.zbar, s.wall_seconds);
    }
    Ok(())
}
