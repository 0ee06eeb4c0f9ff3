mod common;

use common::{nature_score, Nature};
use proptest::prelude::*;

use cpt_games::catalog::{self, PreferenceSpec};
use cpt_games::equilibrium::{mediated_distance, region_membership};
use cpt_games::game::Game;
use cpt_games::harness::{self, RunConfig, SimulationResult};
use cpt_games::learning::{
    best_reaction_strategy, cpt_regret_matrix, eut_regret_direct, make_calibrated_forecaster,
    martingale_diagnostic, regret_tail_probe, run_engine, wilson_interval, FixedStrategy,
    MartingaleConfig, ProbeConfig, ProbeStrategy, RunTrace, ScheduledForecaster, ScriptedStrategy,
    Strategy,
};
use cpt_games::Execution;

const EPS: f64 = 0.1;

#[test]
fn forecaster_against_iid_nature() {
    for seed in 0..3 {
        let s = nature_score(Nature::Iid, seed, 100_000, EPS);
        assert!(s <= 2.0 * EPS + 0.02, "seed {seed}: {s}");
    }
}

#[test]
fn forecaster_against_constant_nature() {
    for seed in 0..3 {
        let s = nature_score(Nature::Constant, seed, 100_000, EPS);
        assert!(s <= EPS + 0.01, "seed {seed}: {s}");
    }
}

#[test]
fn forecaster_against_flipping_nature() {
    for seed in 0..3 {
        let s = nature_score(Nature::Flip, seed, 100_000, EPS);
        assert!(s <= 2.0 * EPS + 0.05, "seed {seed}: {s}");
    }
}

fn fixed_assessment(g: &Game, q: Vec<f64>, horizon: u64) -> Vec<usize> {
    let p1 = best_reaction_strategy(g, 0, ScheduledForecaster::new(vec![q]).unwrap()).unwrap();
    let mut strategies: Vec<Box<dyn Strategy>> =
        vec![Box::new(p1), Box::new(FixedStrategy { mix: vec![0.25; 4] })];
    run_engine(g, &mut strategies, horizon, 5)
        .unwrap()
        .steps
        .iter()
        .map(|s| s.a[0])
        .collect()
}

#[test]
fn best_reaction_follows_the_assessment() {
    let g = catalog::gamma_star(0.5).unwrap();
    assert!(fixed_assessment(&g, catalog::mu_odd().weights, 50)
        .iter()
        .all(|&a| a == 0));
    assert!(fixed_assessment(&g, catalog::mu_unif().weights, 50)
        .iter()
        .all(|&a| a == 1));
}

#[test]
fn eut_best_reaction_to_a_point_mass_is_the_myopic_reply() {
    let g = catalog::random_game(&[3, 3], 17, PreferenceSpec::ExpectedUtility).unwrap();
    for col in 0..3 {
        let mut q = vec![0.0; 3];
        q[col] = 1.0;
        let p1 = best_reaction_strategy(&g, 0, ScheduledForecaster::new(vec![q]).unwrap()).unwrap();
        let mut strategies: Vec<Box<dyn Strategy>> =
            vec![Box::new(p1), Box::new(FixedStrategy::pure(3, col))];
        let trace = run_engine(&g, &mut strategies, 3, 0).unwrap();
        let best = (0..3)
            .max_by(|&a, &b| {
                g.payoff(0, a * 3 + col)
                    .total_cmp(&g.payoff(0, b * 3 + col))
                    .then(b.cmp(&a))
            })
            .unwrap();
        assert!(trace.steps.iter().all(|s| s.a[0] == best));
    }
}

#[test]
fn cyclic_trace_regret_on_gamma_star() {
    let g = catalog::gamma_star(0.5).unwrap();
    let mut strategies: Vec<Box<dyn Strategy>> = vec![
        Box::new(FixedStrategy::pure(2, 0)),
        Box::new(ScriptedStrategy::new(vec![0, 1, 2, 3], vec![], true).unwrap()),
    ];
    let trace = run_engine(&g, &mut strategies, 4000, 0).unwrap();
    let k = cpt_regret_matrix(&g, 0, &trace, 4000);
    assert!((k[0][1] - 0.005).abs() <= 1e-3, "{}", k[0][1]);
    assert_eq!(k[1], vec![0.0, 0.0]);
}

#[test]
fn scripted_pair_reaches_mu_star() {
    let g = catalog::gamma_star(0.5).unwrap();
    let p1 = best_reaction_strategy(
        &g,
        0,
        ScheduledForecaster::new(vec![catalog::mu_odd().weights, catalog::mu_even().weights])
            .unwrap(),
    )
    .unwrap();
    let p2 = ScriptedStrategy::new(vec![0, 1, 2, 3], vec![], true).unwrap();
    let mut strategies: Vec<Box<dyn Strategy>> = vec![Box::new(p1), Box::new(p2)];
    let trace = run_engine(&g, &mut strategies, 4000, 0).unwrap();
    assert!(
        trace
            .empirical(4000)
            .unwrap()
            .sup_distance(&catalog::mu_star())
            <= 1e-3
    );
}

fn random_trace(dims: &[usize], seed: u64, horizon: u64, spec: PreferenceSpec) -> (Game, RunTrace) {
    let g = catalog::random_game(dims, seed, spec).unwrap();
    let mut strategies: Vec<Box<dyn Strategy>> = (0..g.players())
        .map(|i| -> Box<dyn Strategy> {
            if i % 2 == 0 {
                let f = make_calibrated_forecaster(g.space().opponent_size(i), 0.2).unwrap();
                Box::new(best_reaction_strategy(&g, i, f).unwrap())
            } else {
                let n = g.num_actions(i);
                Box::new(FixedStrategy {
                    mix: vec![1.0 / n as f64; n],
                })
            }
        })
        .collect();
    let trace = run_engine(&g, &mut strategies, horizon, seed).unwrap();
    (g, trace)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eut_regret_is_the_direct_sum(dims in prop::collection::vec(2usize..=3, 2..=3), seed in any::<u64>()) {
        let (g, trace) = random_trace(&dims, seed, 500, PreferenceSpec::ExpectedUtility);
        let log = trace.profile_log();
        for i in 0..g.players() {
            for t in [1usize, 17, 500] {
                let k = cpt_regret_matrix(&g, i, &trace, t);
                let direct = eut_regret_direct(&g, i, &log, t);
                for (row, drow) in k.iter().zip(&direct) {
                    for (x, y) in row.iter().zip(drow) {
                        prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn regret_is_the_scaled_correlated_margin(dims in prop::collection::vec(2usize..=3, 2..=3), seed in any::<u64>()) {
        let spec = PreferenceSpec::Full { gamma_min: 0.3, gamma_max: 1.0 };
        let (g, trace) = random_trace(&dims, seed, 300, spec);
        for cp in &trace.checkpoints {
            let xi = trace.empirical(cp.t as usize).unwrap();
            for i in 0..g.players() {
                let marginal = xi.marginal(i);
                for (a, &pa) in marginal.iter().enumerate() {
                    for d in 0..g.num_actions(i) {
                        let k = cp.regret[i][a][d];
                        if pa == 0.0 || a == d {
                            prop_assert_eq!(k, 0.0);
                            continue;
                        }
                        let pi = xi.conditional(i, a).unwrap();
                        let margin = region_membership(&g, i, a, d, &pi, 0.0).margin;
                        prop_assert!((k + pa * margin).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}

fn scripted_path(scenario: &str) -> Vec<(u64, f64)> {
    let c = RunConfig::from_json(&format!(
        r#"{{"scenario": "{scenario}", "horizon": 10000}}"#
    ))
    .unwrap();
    match harness::simulate(&c, Execution::Parallel)
        .unwrap()
        .summary
        .result
    {
        SimulationResult::Scripted { mediated_path, .. } => mediated_path,
        other => panic!("{other:?}"),
    }
}

#[test]
fn scripted_runs_approach_the_mediated_hull() {
    for scenario in ["example1-2p", "example1-3p"] {
        let path = scripted_path(scenario);
        let after: Vec<f64> = path.iter().filter(|(t, _)| *t >= 16).map(|p| p.1).collect();
        for w in after.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{scenario}: {path:?}");
        }
        assert!(path.last().unwrap().1 <= 0.02);
    }
}

#[test]
fn one_calibrated_player_approaches_its_own_hull() {
    let g = catalog::gamma_star(0.5).unwrap();
    for seed in 0..3 {
        let p1 =
            best_reaction_strategy(&g, 0, make_calibrated_forecaster(4, EPS).unwrap()).unwrap();
        let mut strategies: Vec<Box<dyn Strategy>> =
            vec![Box::new(p1), Box::new(FixedStrategy { mix: vec![0.25; 4] })];
        let trace = run_engine(&g, &mut strategies, 20_000, seed).unwrap();
        let score = trace.calibration_scores()[0].clone().unwrap();
        assert!(score.iter().all(|&s| s <= 2.0 * EPS), "{score:?}");
        let xi = trace.empirical(20_000).unwrap();
        let d = mediated_distance(&g, &xi, &[0], 24, 1e-3).unwrap();
        assert!(d <= 0.01, "seed {seed}: {d}");
    }
}

// frequencies of the tail event from an independent simulation with
// 20000 runs each
const ORACLE_ALWAYS_ZERO: f64 = 0.47735;
const ORACLE_ALWAYS_ONE: f64 = 0.5413;

#[test]
fn probe_matches_the_oracle() {
    let config = ProbeConfig {
        runs: 2000,
        seed: 3,
        ..ProbeConfig::default()
    };
    for (strategy, oracle) in [
        (ProbeStrategy::AlwaysZero, ORACLE_ALWAYS_ZERO),
        (ProbeStrategy::AlwaysOne, ORACLE_ALWAYS_ONE),
    ] {
        let r = regret_tail_probe(strategy, &config, Execution::Parallel).unwrap();
        let (lo, hi) = wilson_interval(r.hits, r.config.runs, 3.29);
        assert!(
            lo <= oracle && oracle <= hi,
            "{strategy:?}: {} vs {oracle}",
            r.frequency
        );
        assert_eq!(r.horizon, 250);
    }
    let r = regret_tail_probe(
        ProbeStrategy::CalibratedBestReaction { eps: EPS },
        &ProbeConfig::default(),
        Execution::Parallel,
    )
    .unwrap();
    assert!(r.frequency > 0.0);
}

#[test]
fn probe_is_order_independent() {
    let config = ProbeConfig {
        runs: 64,
        ..ProbeConfig::default()
    };
    let s = ProbeStrategy::CalibratedBestReaction { eps: EPS };
    assert_eq!(
        regret_tail_probe(s, &config, Execution::Parallel).unwrap(),
        regret_tail_probe(s, &config, Execution::Sequential).unwrap()
    );
}

#[test]
fn odd_block_martingale_regime() {
    let config = MartingaleConfig {
        t_block: 5,
        horizon: 15_625,
        runs: 100,
        delta: 0.05,
        l_delta: 10_000,
        seed: 0,
    };
    for s in ProbeStrategy::families() {
        let freq = martingale_diagnostic(s, &config, Execution::Parallel).unwrap();
        assert!(freq >= 1.0 - config.delta, "{s:?}: {freq}");
    }
    let short = MartingaleConfig {
        horizon: 3125,
        ..config
    };
    assert!(
        martingale_diagnostic(ProbeStrategy::AlwaysZero, &short, Execution::Sequential).is_err()
    );
}
