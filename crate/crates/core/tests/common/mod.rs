//! Randomized invariant suites shared by the property tests and the
//! acceptance run. Each suite takes a case count.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use cpt_games::catalog::{self, PreferenceSpec};
use cpt_games::cpt::{
    cpt_value, decision_weights, CptPreferences, Lottery, ValueFunction, WeightingFunction,
};
use cpt_games::equilibrium::{
    check_correlated_eq, check_mediated_eq_with, hull_membership, region_membership, Verdict,
    Witness,
};
use cpt_games::game::{Game, JointDistribution, OpponentDistribution};
use cpt_games::learning::{
    best_reaction_strategy, make_calibrated_forecaster, run_engine, FixedStrategy,
    Strategy as Player,
};
use cpt_games::Execution;

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: [Suite; 8] = [
    ("permutation", permutation),
    ("merge", merge),
    ("zero-probability", zero_probability),
    ("monotonicity", monotonicity),
    ("eut-reduction", eut_reduction),
    ("C subset of D", c_subset_d),
    ("certificate validity", certificate_validity),
    ("engine determinism", engine_determinism),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    // fixed stream so acceptance runs are reproducible
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn lottery() -> impl Strategy<Value = Lottery> {
    prop::collection::vec((0.001f64..1.0, -10.0f64..10.0), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|e| e.0).sum();
        Lottery::new(raw.into_iter().map(|(p, z)| (p / total, z)).collect()).unwrap()
    })
}

pub fn preferences() -> impl Strategy<Value = CptPreferences> {
    (
        0.2f64..1.0,
        0.2f64..1.0,
        -1.0f64..1.0,
        0.3f64..1.0,
        0.3f64..1.0,
        1.0f64..3.0,
    )
        .prop_map(|(gp, gm, r, a, b, l)| CptPreferences {
            value: ValueFunction::piecewise_power(r, a, b, l).unwrap(),
            weight_gain: WeightingFunction::prelec(gp).unwrap(),
            weight_loss: WeightingFunction::prelec(gm).unwrap(),
        })
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    if (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{a} vs {b} (tol {tol})")))
    }
}

pub fn permutation(cases: u32) -> Result<(), String> {
    let s = (lottery(), preferences()).prop_flat_map(|(l, p)| {
        let n = l.len();
        (
            Just(l),
            Just(p),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
    });
    report(runner(cases).run(&s, |(l, p, order)| {
        let shuffled = Lottery::new(order.iter().map(|&k| l.entries()[k]).collect()).unwrap();
        close(cpt_value(&l, &p), cpt_value(&shuffled, &p), 1e-12)
    }))
}

pub fn merge(cases: u32) -> Result<(), String> {
    let s = (
        lottery(),
        preferences(),
        any::<prop::sample::Index>(),
        0.01f64..0.99,
    );
    report(runner(cases).run(&s, |(l, p, at, split)| {
        let k = at.index(l.len());
        let mut entries = l.entries().to_vec();
        let (pk, z) = entries[k];
        entries[k] = (pk * split, z);
        entries.push((pk * (1.0 - split), z));
        close(
            cpt_value(&l, &p),
            cpt_value(&Lottery::new(entries).unwrap(), &p),
            1e-9,
        )
    }))
}

pub fn zero_probability(cases: u32) -> Result<(), String> {
    let s = (lottery(), preferences(), -10.0f64..10.0);
    report(runner(cases).run(&s, |(l, p, z)| {
        let mut entries = l.entries().to_vec();
        entries.push((0.0, z));
        close(
            cpt_value(&l, &p),
            cpt_value(&Lottery::new(entries).unwrap(), &p),
            1e-12,
        )
    }))
}

pub fn monotonicity(cases: u32) -> Result<(), String> {
    let s = (
        lottery(),
        preferences(),
        any::<prop::sample::Index>(),
        0.0f64..5.0,
    );
    report(runner(cases).run(&s, |(l, p, at, bump)| {
        let k = at.index(l.len());
        let mut entries = l.entries().to_vec();
        entries[k].1 += bump;
        let before = cpt_value(&l, &p);
        let after = cpt_value(&Lottery::new(entries).unwrap(), &p);
        prop_assert!(
            after >= before - 1e-12 * (1.0 + before.abs()),
            "{before} -> {after}"
        );
        Ok(())
    }))
}

pub fn eut_reduction(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&lottery(), |l| {
        let eu = CptPreferences::expected_utility();
        close(cpt_value(&l, &eu), l.expectation(), 1e-12)?;
        let w = decision_weights(&l, &eu);
        for (&k, &pi) in w.order.iter().zip(&w.weights) {
            prop_assert_eq!(pi, l.entries()[k].0);
        }
        Ok(())
    }))
}

/// Games where the listed profiles pay every player the maximal payoff,
/// so any distribution supported on them is a correlated equilibrium, or
/// fully random games and distributions.
pub fn game_and_distribution() -> impl Strategy<Value = (Game, JointDistribution)> {
    (
        prop::collection::vec(2usize..=3, 2..=3),
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(dims, seed, planted)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spec = PreferenceSpec::Full {
                gamma_min: 0.3,
                gamma_max: 1.0,
            };
            let g = catalog::random_game(&dims, seed, spec).unwrap();
            let mu = catalog::random_distribution(&dims, &mut rng, true);
            if !planted {
                return (g, mu);
            }
            let size = g.space().size();
            let payoffs = (0..size)
                .map(|a| {
                    (0..dims.len())
                        .map(|_| {
                            if mu.weights()[a] > 0.0 {
                                1.0
                            } else {
                                rng.random_range(-1.0..0.99)
                            }
                        })
                        .collect()
                })
                .collect();
            let prefs = (0..dims.len()).map(|i| g.preferences(i).clone()).collect();
            let actions = (0..dims.len()).map(|i| g.actions(i).to_vec()).collect();
            (Game::new(actions, payoffs, prefs).unwrap(), mu)
        })
}

pub fn c_subset_d(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&game_and_distribution(), |(g, mu)| {
        let tol = 1e-6;
        let c = check_correlated_eq(&g, &mu, tol).unwrap();
        if c.is_member() {
            let d = check_mediated_eq_with(&g, &mu, 12, tol, Execution::Sequential).unwrap();
            prop_assert!(d.is_member(), "C member rejected by D: {:?}", d.margin);
        }
        Ok(())
    }))
}

pub fn simplex_point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, dim).prop_map(|mut w| {
        w[0] += 1e-3;
        let t: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= t);
        w
    })
}

pub fn certificate_validity(cases: u32) -> Result<(), String> {
    let hulls = (2usize..=5).prop_flat_map(|d| {
        (
            simplex_point(d),
            prop::collection::vec(simplex_point(d), 0..8),
        )
    });
    let mut r = runner(cases);
    report(r.run(&hulls, |(target, points)| {
        let tol = 1e-6;
        let t = OpponentDistribution {
            player: 0,
            weights: target,
        };
        let ps: Vec<OpponentDistribution> = points
            .into_iter()
            .map(|w| OpponentDistribution {
                player: 0,
                weights: w,
            })
            .collect();
        let cert = hull_membership(&t, &ps, tol);
        prop_assert_eq!(cert.verdict, Verdict::from_margin(cert.margin, 0.0));
        if let Witness::Hull { theta, points } = &cert.witness {
            prop_assert!(theta.iter().all(|&x| x >= 0.0));
            prop_assert!((theta.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let mix: Vec<f64> = (0..t.weights.len())
                .map(|c| theta.iter().zip(points).map(|(th, p)| th * p[c]).sum())
                .collect();
            let d = t.sup_distance(&mix);
            prop_assert!(
                (d - (tol - cert.margin)).abs() <= 1e-9,
                "{} vs {}",
                d,
                tol - cert.margin
            );
        } else {
            prop_assert!(ps.is_empty());
            prop_assert!(!cert.is_member());
        }
        Ok(())
    }))?;
    report(r.run(&game_and_distribution(), |(g, mu)| {
        let cert = check_correlated_eq(&g, &mu, 1e-9).unwrap();
        match cert.witness {
            Witness::Tuple { tuple: [i, a, d] } => {
                let pi = mu.conditional(i, a).unwrap();
                let check = region_membership(&g, i, a, d, &pi, 1e-9);
                prop_assert_eq!(check.margin, cert.margin);
                prop_assert_eq!(check.member, cert.is_member());
            }
            Witness::None => prop_assert!(cert.is_member()),
            other => return Err(TestCaseError::fail(format!("unexpected witness {other:?}"))),
        }
        Ok(())
    }))
}

pub fn engine_determinism(cases: u32) -> Result<(), String> {
    let s = (
        prop::collection::vec(2usize..=3, 2..=3),
        any::<u64>(),
        1u64..60,
    );
    report(runner(cases).run(&s, |(dims, seed, horizon)| {
        let g = catalog::random_game(
            &dims,
            seed,
            PreferenceSpec::Prelec {
                gamma_min: 0.4,
                gamma_max: 1.0,
            },
        )
        .unwrap();
        let build = || -> Vec<Box<dyn Player>> {
            (0..g.players())
                .map(|i| -> Box<dyn Player> {
                    if i == 0 {
                        let n = g.num_actions(0);
                        Box::new(FixedStrategy {
                            mix: vec![1.0 / n as f64; n],
                        })
                    } else {
                        let f =
                            make_calibrated_forecaster(g.space().opponent_size(i), 0.25).unwrap();
                        Box::new(best_reaction_strategy(&g, i, f).unwrap())
                    }
                })
                .collect()
        };
        let a = run_engine(&g, &mut build(), horizon, seed).unwrap();
        let b = run_engine(&g, &mut build(), horizon, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.checkpoint_deviation() <= 1e-12);
        Ok(())
    }))
}

/// Outcome sequences played against a forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nature {
    /// Draws from `NATURE_LAW`.
    Iid,
    /// Always outcome 2.
    Constant,
    /// The outcome the previous forecast rated least likely.
    Flip,
}

pub const NATURE_LAW: [f64; 4] = [0.3, 0.1, 0.2, 0.4];

/// Largest per-outcome calibration score of a grid forecaster with pitch
/// `eps` over four outcomes after `steps` rounds.
pub fn nature_score(nature: Nature, seed: u64, steps: u64, eps: f64) -> f64 {
    use cpt_games::learning::{calibration_score, ForecastRecord, Forecaster};
    use cpt_games::rng::{sample_index, stream};

    let mut f = make_calibrated_forecaster(4, eps).unwrap();
    let mut rec = ForecastRecord::new(4);
    let mut last: Option<Vec<f64>> = None;
    for t in 1..=steps {
        let q = f.forecast(t, &mut stream(seed, 0, t));
        let y = match nature {
            Nature::Iid => sample_index(&NATURE_LAW, &mut stream(seed, 1, t)),
            Nature::Constant => 2,
            Nature::Flip => last.as_ref().map_or(0, |l| {
                (0..4).min_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap()
            }),
        };
        f.observe(y);
        rec.push(&q, y);
        last = Some(q);
    }
    calibration_score(&rec, steps as usize)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max)
}
