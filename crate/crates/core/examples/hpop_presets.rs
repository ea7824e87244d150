//! Builds each benchmark network, prints its size and the cost of one
//! stage with full and empty reservoirs.
//!
//! ```text
//! cargo run --example hpop_presets
//! ```

use rollhorizon::horizon::compute_kappa;
use rollhorizon::lp::solve;
use rollhorizon::model::template::{instantiate_stage, Epigraph};
use rollhorizon::model::{build_hpop, Preset};

fn main() -> rollhorizon::Result<()> {
    for (plants, demand) in [(1, 1000.0), (3, 1750.0), (6, 2000.0)] {
        let inst = build_hpop(Preset::new(plants, demand, 5))?;
        let tmpl = inst.template();
        let b = &inst.inflow.realizations[0].data;
        let full: Vec<f64> = inst
            .reservoirs()
            .iter()
            .map(|&h| inst.hydro[h].reservoir.as_ref().unwrap().upper)
            .collect();
        let empty = vec![0.0; full.len()];
        let cost = |x: &[f64]| -> rollhorizon::Result<f64> {
            Ok(solve(&instantiate_stage(&tmpl, x, b, &[], Epigraph::Terminal, 1.0)?).objective)
        };
        println!(
            "|H|={plants} d={demand}: {} columns, {} reservoirs, phi1(start)={:.1}",
            inst.layout().num_vars,
            full.len(),
            inst.system_state(&inst.initial_storage(), b).phi1
        );
        println!(
            "  stage cost full={:.1} empty={:.1} kappa={:.1}",
            cost(&full)?,
            cost(&empty)?,
            compute_kappa(&inst)?
        );
    }
    Ok(())
}
