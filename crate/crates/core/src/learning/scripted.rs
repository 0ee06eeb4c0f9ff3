use serde::{Deserialize, Serialize};

use super::{
    best_reaction_strategy, run_engine, RunTrace, ScheduledForecaster, ScriptedStrategy, Strategy,
};
use crate::catalog;
use crate::equilibrium::{
    check_correlated_eq, check_mediated_eq, mediated_distance, EquilibriumCertificate, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    TwoPlayer,
    ThreePlayer,
}

/// Settings of a scripted run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedConfig {
    pub variant: Variant,
    pub horizon: u64,
    pub seed: u64,
    /// Prelec exponent of player 1.
    pub gamma1: f64,
    /// Grid resolution for the mediated check.
    pub resolution: usize,
    /// Tolerance for the mediated check.
    pub mediated_tol: f64,
}

impl ScriptedConfig {
    pub fn new(variant: Variant, horizon: u64) -> Self {
        ScriptedConfig {
            variant,
            horizon,
            seed: 0,
            gamma1: 0.5,
            resolution: 24,
            mediated_tol: 1e-3,
        }
    }
}

/// Summary of a scripted run at its horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedReport {
    pub horizon: u64,
    /// Per player calibration score vector.
    pub scores: Vec<Vec<f64>>,
    pub max_score: f64,
    pub correlated: EquilibriumCertificate,
    /// Size of the most violated best-reaction inequality in CPT value
    /// units; zero when `xi^T` satisfies them all.
    pub correlated_violation: f64,
    pub mediated: EquilibriumCertificate,
    /// `max mu_i(a_i) d(conditional, sampled hull)` over all players.
    pub mediated_distance: f64,
    /// Sup distance of `xi^T` to the limit distribution of the script.
    pub limit_distance: f64,
}

pub struct ScriptedRun {
    pub game: Game,
    pub trace: RunTrace,
    pub report: ScriptedReport,
}

fn point(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Scripted calibrated play on `Gamma*`: the column player(s) cycle through
/// I..IV while player 1 best-reacts to assessments alternating between the
/// odd and even column mixtures. In the 3-player variant players 2 and 3
/// best-react to point assessments that keep them in step.
pub fn scripted_example1(config: &ScriptedConfig) -> Result<ScriptedRun> {
    if config.horizon < 4 {
        return Err(Error::InvalidParameter(
            "scripted runs need at least 4 steps".into(),
        ));
    }
    let (game, limit, mut strategies): (Game, JointDistribution, Vec<Box<dyn Strategy>>) =
        match config.variant {
            Variant::TwoPlayer => {
                let g = catalog::gamma_star(config.gamma1)?;
                let p1 = best_reaction_strategy(
                    &g,
                    0,
                    ScheduledForecaster::new(vec![
                        catalog::mu_odd().weights,
                        catalog::mu_even().weights,
                    ])?,
                )?;
                let p2 = ScriptedStrategy::new(vec![0, 1, 2, 3], vec![point(2, 0)], true)?;
                (g, catalog::mu_star(), vec![Box::new(p1), Box::new(p2)])
            }
            Variant::ThreePlayer => {
                let g = catalog::gamma_star_3p(config.gamma1)?;
                let p1 = best_reaction_strategy(
                    &g,
                    0,
                    ScheduledForecaster::new(vec![
                        catalog::diagonal_assessment(&[0, 2]).weights,
                        catalog::diagonal_assessment(&[1, 3]).weights,
                    ])?,
                )?;
                // opponents of players 2 and 3: (player 1, other column player),
                // index row * 4 + column
                let cycle: Vec<Vec<f64>> = (0..4).map(|c| point(8, c)).collect();
                let p2 = best_reaction_strategy(&g, 1, ScheduledForecaster::new(cycle.clone())?)?;
                let p3 = best_reaction_strategy(&g, 2, ScheduledForecaster::new(cycle)?)?;
                (
                    g,
                    catalog::mu_star_3p(),
                    vec![Box::new(p1), Box::new(p2), Box::new(p3)],
                )
            }
        };
    let trace = run_engine(&game, &mut strategies, config.horizon, config.seed)?;
    let xi = trace.empirical(trace.steps.len()).expect("nonempty run");
    let scores: Vec<Vec<f64>> = trace
        .calibration_scores()
        .into_iter()
        .map(|s| s.expect("every scripted player announces assessments"))
        .collect();
    let correlated = check_correlated_eq(&game, &xi, DEFAULT_TOL)?;
    let mediated = check_mediated_eq(&game, &xi, config.resolution, config.mediated_tol)?;
    let players: Vec<usize> = (0..game.players()).collect();
    let report = ScriptedReport {
        horizon: config.horizon,
        max_score: scores.iter().flatten().fold(0.0, |m, &v| m.max(v)),
        scores,
        correlated_violation: (-correlated.margin).max(0.0),
        correlated,
        mediated_distance: mediated_distance(
            &game,
            &xi,
            &players,
            config.resolution,
            config.mediated_tol,
        )?,
        mediated,
        limit_distance: xi.sup_distance(&limit),
    };
    Ok(ScriptedRun {
        game,
        trace,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cycle_reaches_the_limit() {
        let run = scripted_example1(&ScriptedConfig::new(Variant::TwoPlayer, 4)).unwrap();
        assert_eq!(run.trace.empirical(4).unwrap(), catalog::mu_star());
        assert_eq!(run.report.limit_distance, 0.0);
        assert_eq!(run.report.max_score, 0.0);
    }

    #[test]
    fn two_player_verdicts() {
        let run = scripted_example1(&ScriptedConfig::new(Variant::TwoPlayer, 4000)).unwrap();
        let r = &run.report;
        assert!(!r.correlated.is_member());
        assert!(r.correlated.margin <= -0.004);
        assert!(r.mediated.is_member());
    }

    #[test]
    fn three_player_limit() {
        let run = scripted_example1(&ScriptedConfig::new(Variant::ThreePlayer, 400)).unwrap();
        assert!(run.report.limit_distance < 1e-12);
        assert_eq!(run.report.max_score, 0.0);
    }
}
