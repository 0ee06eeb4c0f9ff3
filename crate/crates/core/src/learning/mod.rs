//! Repeated play: calibration scoring, forecasters, strategies, the engine,
//! CPT regret, scripted counterexamples, regret probes and calibrated
//! replay of mediated equilibria.

mod calibration;
mod engine;
mod forecaster;
mod probe;
mod regret;
mod replay;
mod scripted;
mod strategy;

pub use calibration::{calibration_score, ForecastDictionary, ForecastId, ForecastRecord};
pub use engine::{checkpoint_steps, run_engine, Checkpoint, RunTrace, StepRecord};
pub use forecaster::{make_calibrated_forecaster, Forecaster, GridForecaster, ScheduledForecaster};
pub use probe::{
    block_regret, martingale_diagnostic, odd_block_deviation, probe_horizon, probe_trace,
    regret_tail_probe, wilson_interval, MartingaleConfig, ProbeConfig, ProbeReport, ProbeStrategy,
    MAX_PROBE_HORIZON, PROBE_LIMITATION,
};
pub use regret::{eut_regret_direct, max_regret, regret_from_log, regret_matrix};
pub use replay::{
    construct_calibrated_replay, quota_schedule, Collision, ReplayOutcome, ReplayReport,
};
pub use scripted::{scripted_example1, ScriptedConfig, ScriptedReport, ScriptedRun, Variant};
pub use strategy::{
    best_reaction_strategy, example2_adversary, BestReactionStrategy, BlockSchedule, Decision,
    Example2Adversary, FixedStrategy, Phase, ScriptedStrategy, Strategy, SIGMA_EVEN, SIGMA_ODD,
};

/// `K_i^t` from the first `t` steps of a trace.
pub fn cpt_regret_matrix(
    g: &crate::game::Game,
    i: usize,
    trace: &RunTrace,
    t: usize,
) -> Vec<Vec<f64>> {
    regret_from_log(g, i, &trace.profile_log(), t)
}
