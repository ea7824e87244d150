mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rollhorizon::horizon::bound::DEFAULT_EPSILON;
use rollhorizon::horizon::scan::relative_change;
use rollhorizon::horizon::value_iteration::{evaluate_policy, fixed_point, lookahead_policy, sup_dist};
use rollhorizon::horizon::{
    compute_kappa, epsilon_sufficient_horizon, fit_horizon_map, stability_scan, suboptimality_bound,
    value_iteration_oracle, BoundInput, FiniteMdp, HorizonMap, Regime, ScanConfig, Transition,
};
use rollhorizon::model::template::{instantiate_stage, Epigraph};
use rollhorizon::model::{build_hpop, DiscreteProcess, HpopInstance, Preset, ThermalPlant};
use rollhorizon::rolling::ProblemCache;
use rollhorizon::sddp::TrainConfig;

/// The |H|=1, d=1000, |Ξ|=5 row of the published regression table.
fn published_map() -> HorizonMap {
    HorizonMap::from_pieces(vec![
        (0.0, Some(3100.0), -6.69, 1.00e-2),
        (3100.0, Some(14900.0), -1.59, 1.23e-3),
        (14900.0, None, 5.00, 0.0),
    ])
}

#[test]
fn recovers_published_pieces() {
    let truth = published_map();
    let points: Vec<(f64, f64)> = (0..80)
        .map(|i| 250.0 * i as f64 + 17.0)
        .map(|phi| (phi, truth.predict_phi(phi)))
        .collect();
    let fit = fit_horizon_map(&points, 3).unwrap();
    assert_eq!(fit.pieces.len(), 3);
    for (got, want) in fit.pieces.iter().zip(&truth.pieces) {
        assert!(
            (got.theta0 - want.theta0).abs() < 1e-6,
            "{} vs {}",
            got.theta0,
            want.theta0
        );
        assert!((got.theta1 - want.theta1).abs() < 1e-6);
        assert!((got.r2 - 1.0).abs() < 1e-9);
    }
    assert!((fit.r2_avg - 1.0).abs() < 1e-9);
    // breakpoints fall within one sampling cell of the true ones
    assert!((fit.pieces[1].lo - 3100.0).abs() <= 250.0);
    assert!((fit.pieces[2].lo - 14900.0).abs() <= 250.0);
}

#[test]
fn recovers_middle_piece_line() {
    let points: Vec<(f64, f64)> = (0..40)
        .map(|i| 3100.0 + 295.0 * i as f64)
        .map(|phi| (phi, -1.59 + 1.23e-3 * phi))
        .collect();
    let fit = fit_horizon_map(&points, 3).unwrap();
    assert_eq!(fit.pieces.len(), 1);
    assert!((fit.pieces[0].theta0 + 1.59).abs() < 1e-9);
    assert!((fit.pieces[0].theta1 - 1.23e-3).abs() < 1e-9);
}

#[test]
fn exact_line_single_piece() {
    let points: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 100.0, 2.0 + 0.1 * i as f64)).collect();
    let fit = fit_horizon_map(&points, 3).unwrap();
    assert_eq!(fit.pieces.len(), 1);
    assert!((fit.pieces[0].theta0 - 2.0).abs() < 1e-9 && (fit.pieces[0].theta1 - 0.001).abs() < 1e-12);
    assert_eq!(fit.pieces[0].r2, 1.0);
}

#[test]
fn published_predictions() {
    let map = published_map();
    assert!((map.predict_phi(15000.0) - 5.0).abs() < 1e-12);
    assert!((map.predict_phi(10000.0) - 10.71).abs() < 1e-9);
    assert_eq!(HorizonMap::linear(4.0, 1.0).predict_phi(0.0), 4.0);
    let inst = build_hpop(Preset::new(1, 1000.0, 5)).unwrap();
    let s = inst.system_state(&[13000.0], &[333.3333333333333]);
    assert!((map.predict(&s) - (-1.59 + 1.23e-3 * s.phi1)).abs() < 1e-12);
}

fn sse_of_line(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    pts.iter().map(|p| (p.1 - my - b * (p.0 - mx)).powi(2)).sum()
}

/// Minimum total SSE over every split of the sorted points into at most
/// `k` runs of two or more points, splitting only between distinct x.
fn exhaustive_sse(pts: &[(f64, f64)], k: usize) -> f64 {
    let n = pts.len();
    let mut best = if n >= 2 { sse_of_line(pts) } else { f64::INFINITY };
    if k < 2 {
        return best;
    }
    for a in 2..=n.saturating_sub(2) {
        if pts[a - 1].0 == pts[a].0 {
            continue;
        }
        best = best.min(sse_of_line(&pts[..a]) + exhaustive_sse(&pts[a..], k - 1));
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn segmentation_is_optimal(
        raw in prop::collection::vec((0u32..25, -20i32..20), 4..=40),
        k in 1usize..=3,
    ) {
        let mut pts: Vec<(f64, f64)> = raw.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assume!(pts.first().unwrap().0 < pts.last().unwrap().0);
        let map = fit_horizon_map(&pts, k).unwrap();
        let sse: f64 = pts.iter().map(|&(x, y)| (y - map.predict_phi(x)).powi(2)).sum();
        let best = exhaustive_sse(&pts, k);
        prop_assert!((sse - best).abs() <= 1e-6 * (1.0 + best), "fit {} exhaustive {}", sse, best);
        prop_assert!(map.pieces.len() <= k);
        let total: usize = map.pieces.iter().map(|p| p.points).sum();
        prop_assert_eq!(total, pts.len());
        for p in &map.pieces {
            prop_assert!(p.r2 <= 1.0 + 1e-12);
            // within a piece, prediction is monotone exactly when the slope is nonnegative
            let lo = p.lo.max(0.0);
            let hi = p.hi.unwrap_or(lo + 10.0);
            prop_assert_eq!(p.eval(hi) >= p.eval(lo), p.theta1 >= 0.0 || hi == lo);
        }
    }

    #[test]
    fn bound_inversion(gamma in 0.01f64..0.995, kappa in 1.0f64..1e6, eps in 1e-8f64..1e-2) {
        let b = BoundInput { kappa, gamma, epsilon: eps, regime: Regime::General };
        let tau = epsilon_sufficient_horizon(&b).unwrap();
        let exact = suboptimality_bound(tau, gamma, kappa, Regime::Nonpositive);
        prop_assert!((exact - eps).abs() <= 1e-9 * eps.max(1e-300) * 1e3);
        prop_assert!(suboptimality_bound(tau.ceil(), gamma, kappa, Regime::General) <= 2.0 * eps * (1.0 + 1e-9));
    }
}

#[test]
fn bound_examples() {
    let b = |kappa, gamma| BoundInput {
        kappa,
        gamma,
        epsilon: DEFAULT_EPSILON,
        regime: Regime::General,
    };
    assert!((epsilon_sufficient_horizon(&b(53000.0, 0.10)).unwrap() - 9.77).abs() < 0.01);
    assert!((epsilon_sufficient_horizon(&b(53000.0, 0.99)).unwrap() - 2686.09).abs() < 0.5);
    let unit = BoundInput {
        kappa: 0.5,
        gamma: 0.5,
        epsilon: 1.0,
        regime: Regime::General,
    };
    assert_eq!(epsilon_sufficient_horizon(&unit).unwrap(), 0.0);
    assert!(epsilon_sufficient_horizon(&b(1.0, 1.0)).is_err());
    assert_eq!(suboptimality_bound(0.0, 0.5, 1.0, Regime::General), 4.0);
    assert_eq!(suboptimality_bound(0.0, 0.5, 1.0, Regime::Nonpositive), 2.0);
}

#[test]
fn kappa_values() {
    let thermal = |cost: f64| ThermalPlant {
        name: format!("c{cost}"),
        capacity: 20.0,
        min_output: 0.0,
        cost,
    };
    let merit = HpopInstance {
        hydro: vec![],
        thermal: vec![thermal(5.0), thermal(1.0), thermal(3.0)],
        demand: 35.0,
        penalty: 500.0,
        inflow: DiscreteProcess::deterministic(vec![]),
        c0: 1.0,
    };
    assert!((compute_kappa(&merit).unwrap() - (20.0 * 1.0 + 15.0 * 3.0)).abs() < 1e-9);
    assert_eq!(compute_kappa(&HpopInstance { demand: 0.0, ..merit }).unwrap(), 0.0);

    let inst = build_hpop(Preset::new(1, 1000.0, 5)).unwrap();
    let lp = instantiate_stage(&inst.template(), &[0.0], &[0.0], &[], Epigraph::Terminal, 1.0).unwrap();
    let oracle = common::vertex_enumeration(&lp).unwrap();
    let kappa = compute_kappa(&inst).unwrap();
    assert!((kappa - oracle).abs() < 1e-6);
    // the published κ for this instance is 53000; see the README for the discrepancy
    assert!((kappa - 466_000.0).abs() < 1e-6);
}

#[test]
fn value_iteration_examples() {
    let single = FiniteMdp {
        outcome_probs: vec![1.0],
        choices: vec![vec![vec![Transition { cost: 3.0, next: 0 }]]],
    };
    let trace = value_iteration_oracle(&single, 0.5, 6);
    for (k, g) in trace.iter().enumerate() {
        assert!((g[0] - 3.0 * (1.0 - 0.5f64.powi(k as i32)) / 0.5).abs() < 1e-12);
    }
    assert!((fixed_point(&single, 0.5, 1e-14)[0] - 6.0).abs() < 1e-12);

    // 0 -> 1 at cost 1, 1 -> 0 at cost 4: g0 = 1 + γ g1, g1 = 4 + γ g0
    let chain = FiniteMdp {
        outcome_probs: vec![1.0],
        choices: vec![
            vec![vec![Transition { cost: 1.0, next: 1 }]],
            vec![vec![Transition { cost: 4.0, next: 0 }]],
        ],
    };
    let g = fixed_point(&chain, 0.5, 1e-14);
    let (g0, g1) = ((1.0 + 0.5 * 4.0) / (1.0 - 0.25), (4.0 + 0.5 * 1.0) / (1.0 - 0.25));
    assert!((g[0] - g0).abs() < 1e-10 && (g[1] - g1).abs() < 1e-10);

    let mdp = common::inventory_mdp();
    mdp.validate().unwrap();
    let t = value_iteration_oracle(&mdp, 0.0, 4);
    for k in 2..=4 {
        assert_eq!(t[k], t[1]);
    }
}

#[test]
fn contraction_and_lookahead_bound() {
    let mdp = common::inventory_mdp();
    for gamma in [0.5, 0.8, 0.9] {
        let star = fixed_point(&mdp, gamma, 1e-13);
        let norm = star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, g) in value_iteration_oracle(&mdp, gamma, 100).iter().enumerate() {
            assert!(sup_dist(g, &star) <= gamma.powi(k as i32) * norm + 1e-9);
        }
        let bound_gap = |tau: usize| {
            let v = evaluate_policy(&mdp, gamma, &lookahead_policy(&mdp, gamma, tau));
            v.iter()
                .zip(&star)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        for tau in 1..=8 {
            let gap = bound_gap(tau);
            assert!(gap >= -1e-9);
            assert!(gap <= suboptimality_bound(tau as f64, gamma, mdp.kappa(), Regime::General) + 1e-9);
        }
        // the myopic policy never orders, which costs once the future matters
        if gamma >= 0.8 {
            assert!(bound_gap(1) > 1.0, "γ = {gamma}: gap {}", bound_gap(1));
        }
    }
}

fn scan_config(w: usize, tau_max: usize) -> ScanConfig {
    ScanConfig {
        samples: 1,
        epsilon: 1e-5,
        w,
        tau_max,
        train: TrainConfig {
            max_iterations: 2000,
            stall_window: 40,
            stall_rel_tol: 1e-12,
            ..TrainConfig::default()
        },
        seed: 0,
        share_cuts: true,
    }
}

#[test]
fn scan_finds_the_stable_horizon() {
    let model = common::scan_toy(2.0);
    // the deterministic equivalents pin down the first-stage storage per horizon
    let exact: Vec<Vec<f64>> = (1..=6).map(|tau| common::de_first_decision(&model, tau)).collect();
    let storage: Vec<f64> = exact.iter().map(|x| x[0]).collect();
    for (i, s) in storage.iter().enumerate() {
        assert!((s - (i as f64).min(2.0)).abs() < 1e-9, "τ = {}: storage {s}", i + 1);
    }
    let oracle_star = (3..=6)
        .find(|&tau| relative_change(&exact[tau - 1], &exact[tau - 3]) < 1e-5)
        .unwrap()
        - 2;
    assert_eq!(oracle_star, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let star = stability_scan(&model, &scan_config(2, 8), &mut ProblemCache::new(), &mut rng).unwrap();
    assert_eq!(star, 3);
}

#[test]
fn scan_caps_at_tau_max() {
    let mut model = common::scan_toy(100.0);
    model.first_data = vec![20.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(
        stability_scan(&model, &scan_config(2, 5), &mut ProblemCache::new(), &mut rng).unwrap(),
        5
    );
}

#[test]
fn scan_zero_demand_is_one() {
    let inst = build_hpop(Preset::new(1, 0.0, 5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cfg = ScanConfig {
        train: TrainConfig {
            max_iterations: 50,
            stall_window: 5,
            ..TrainConfig::default()
        },
        ..scan_config(2, 6)
    };
    assert_eq!(
        stability_scan(&inst.model(), &cfg, &mut ProblemCache::new(), &mut rng).unwrap(),
        1
    );
}

#[test]
fn scan_config_validation() {
    assert!(scan_config(0, 5).validate().is_err());
    assert!(scan_config(5, 5).validate().is_err());
    assert!(ScanConfig {
        epsilon: 0.0,
        ..scan_config(2, 5)
    }
    .validate()
    .is_err());
}

#[test]
fn map_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    let map = published_map();
    map.save(&path).unwrap();
    assert_eq!(HorizonMap::load(&path).unwrap(), map);
}
