//! Fits horizon maps for w = 5, 10 and 15 on the single-plant benchmark and
//! compares the dynamic policies against w = 15.
//!
//! ```text
//! cargo run --release --example sensitivity_sweep -- [N] [tau_max] [T]
//! ```

use std::env;

use rollhorizon::cli::{cmd_gen, cmd_sweep, FitArgs, GenArgs, SweepArgs, TrainArgs};

fn main() -> rollhorizon::Result<()> {
    let arg = |i: usize, d: usize| env::args().nth(i).and_then(|v| v.parse().ok()).unwrap_or(d);
    let (samples, tau_max, rolls) = (arg(1, 10), arg(2, 20), arg(3, 100));
    let dir = env::temp_dir().join("rollhorizon_sweep");
    let instance = cmd_gen(&GenArgs {
        plants: 1,
        demand: 1000.0,
        realizations: 5,
        c0: 1.0,
        strict_presets: true,
        out: Some(dir.join("instance.json")),
    })?;
    let fit = FitArgs {
        instance,
        samples,
        tau_max,
        w: vec![5, 10, 15],
        epsilon: 1e-5,
        stall: 50,
        max_pieces: 3,
        independent: false,
        train: TrainArgs {
            max_iterations: 100_000,
            time_limit: 3600.0,
            stall_tol: 1e-4,
            seed: 1,
        },
        out_dir: Some(dir.clone()),
    };
    let out = cmd_sweep(&SweepArgs {
        fit,
        rolls,
        path_seed: 1,
        reference_w: 15,
    })?;
    println!(
        "{:>3} {:>12} {:>8} {:>9} {:>10}",
        "w", "zbar", "gap%", "time_s", "time_gap%"
    );
    for r in &out.rows {
        println!(
            "{:>3} {:>12.2} {:>8.2} {:>9.2} {:>10.2}",
            r.w,
            r.zbar,
            100.0 * r.zbar_gap,
            r.time,
            100.0 * r.time_gap
        );
    }
    println!("table in {}", out.out.display());
    Ok(())
}
