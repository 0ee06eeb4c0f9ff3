use serde::{Deserialize, Serialize};

use super::{
    best_reaction_strategy, example2_adversary, make_calibrated_forecaster, regret_from_log,
    run_engine, BlockSchedule, FixedStrategy, Phase, RunTrace, Strategy,
};
use crate::catalog;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rng::split_seed;

/// Longest horizon `2 T^{k+1}` a probe will simulate.
pub const MAX_PROBE_HORIZON: u64 = 10_000_000;

/// Player-1 strategy families the probe can pit against the block adversary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeStrategy {
    AlwaysZero,
    AlwaysOne,
    /// Best reaction to a calibrated grid forecaster with pitch `eps`.
    CalibratedBestReaction {
        eps: f64,
    },
}

impl ProbeStrategy {
    pub fn families() -> [ProbeStrategy; 3] {
        [
            ProbeStrategy::AlwaysZero,
            ProbeStrategy::AlwaysOne,
            ProbeStrategy::CalibratedBestReaction { eps: 0.1 },
        ]
    }

    fn build(&self, g: &crate::game::Game) -> Result<Box<dyn Strategy>> {
        Ok(match *self {
            ProbeStrategy::AlwaysZero => Box::new(FixedStrategy::pure(2, 0)),
            ProbeStrategy::AlwaysOne => Box::new(FixedStrategy::pure(2, 1)),
            ProbeStrategy::CalibratedBestReaction { eps } => Box::new(best_reaction_strategy(
                g,
                0,
                make_calibrated_forecaster(4, eps)?,
            )?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Block base `T`.
    pub t_block: u64,
    pub k: u32,
    pub runs: usize,
    /// Threshold on the summed positive regrets.
    pub eps_tilde: f64,
    pub seed: u64,
    pub gamma1: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            t_block: 5,
            k: 2,
            runs: 200,
            eps_tilde: 0.004,
            seed: 0,
            gamma1: 0.5,
        }
    }
}

pub const PROBE_LIMITATION: &str =
    "Only the named player-1 strategy family is sampled. A positive \
frequency shows that this family keeps a non-vanishing CPT regret against the block adversary; it \
says nothing about strategies outside the family.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub strategy: ProbeStrategy,
    pub config: ProbeConfig,
    pub horizon: u64,
    pub hits: usize,
    pub frequency: f64,
    /// 95% Wilson score interval.
    pub wilson: (f64, f64),
    /// Summed positive regret of every run, in run order.
    pub values: Vec<f64>,
    pub limitation: String,
}

/// Wilson score interval for `hits` successes out of `n` at normal
/// quantile `z`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `(T^{k+1}, 2 T^{k+1})` for a probe configuration.
pub fn probe_horizon(config: &ProbeConfig) -> Result<(u64, u64)> {
    let mid = BlockSchedule::new(config.t_block)?.power(config.k + 1)?;
    let horizon = mid
        .checked_mul(2)
        .filter(|&h| h <= MAX_PROBE_HORIZON)
        .ok_or_else(|| {
            Error::HorizonOverflow(format!(
                "2 * {}^{} exceeds {MAX_PROBE_HORIZON}",
                config.t_block,
                config.k + 1
            ))
        })?;
    Ok((mid, horizon))
}

/// One seeded run of `strategy` against the block adversary up to
/// `2 T^{k+1}`.
pub fn probe_trace(strategy: ProbeStrategy, config: &ProbeConfig, seed: u64) -> Result<RunTrace> {
    let (_, horizon) = probe_horizon(config)?;
    let g = catalog::gamma_star(config.gamma1)?;
    let mut strategies = vec![
        strategy.build(&g)?,
        Box::new(example2_adversary(config.t_block)?) as Box<dyn Strategy>,
    ];
    run_engine(&g, &mut strategies, horizon, seed)
}

/// `[K(1,0)]^+` at `T^{k+1}` plus `[K(0,1)]^+ + [K(1,0)]^+` at `2T^{k+1}`,
/// for player 1 of one seeded run.
pub fn block_regret(strategy: ProbeStrategy, config: &ProbeConfig, seed: u64) -> Result<f64> {
    let (mid, horizon) = probe_horizon(config)?;
    let g = catalog::gamma_star(config.gamma1)?;
    let log = probe_trace(strategy, config, seed)?.profile_log();
    let at_mid = regret_from_log(&g, 0, &log, mid as usize);
    let at_end = regret_from_log(&g, 0, &log, horizon as usize);
    Ok(at_mid[1][0].max(0.0) + at_end[0][1].max(0.0) + at_end[1][0].max(0.0))
}

/// Monte-Carlo frequency of `{block regret > eps_tilde}` over independent
/// seeds split from `config.seed`.
pub fn regret_tail_probe(
    strategy: ProbeStrategy,
    config: &ProbeConfig,
    exec: Execution,
) -> Result<ProbeReport> {
    let (_, horizon) = probe_horizon(config)?;
    if config.runs == 0 {
        return Err(Error::InvalidParameter(
            "at least one run is required".into(),
        ));
    }
    let values = exec::map_range(exec, config.runs, |r| {
        block_regret(strategy, config, split_seed(config.seed, r as u64))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let hits = values.iter().filter(|&&v| v > config.eps_tilde).count();
    Ok(ProbeReport {
        strategy,
        config: *config,
        horizon,
        hits,
        frequency: hits as f64 / config.runs as f64,
        wilson: wilson_interval(hits, config.runs, 1.96),
        values,
        limitation: PROBE_LIMITATION.to_string(),
    })
}

/// `|nu^l(0, I) - nu^l(0, III)|` after the `l`-th odd-block step, for each
/// `l` in `at`, where `nu^l` is the empirical law of play over the first
/// `l` odd-block steps.
pub fn odd_block_deviation(
    strategy: ProbeStrategy,
    t_block: u64,
    horizon: u64,
    seed: u64,
    at: &[u64],
) -> Result<Vec<Option<f64>>> {
    let schedule = BlockSchedule::new(t_block)?;
    let g = catalog::gamma_star(0.5)?;
    let mut strategies = vec![
        strategy.build(&g)?,
        Box::new(example2_adversary(t_block)?) as Box<dyn Strategy>,
    ];
    let trace = run_engine(&g, &mut strategies, horizon, seed)?;
    let (mut l, mut first, mut third) = (0u64, 0i64, 0i64);
    let mut out = vec![None; at.len()];
    for s in &trace.steps {
        if schedule.phase(s.t) != Phase::Odd {
            continue;
        }
        l += 1;
        if s.a[0] == 0 && s.a[1] == 0 {
            first += 1;
        }
        if s.a[0] == 0 && s.a[1] == 2 {
            third += 1;
        }
        for (k, &mark) in at.iter().enumerate() {
            if mark == l {
                out[k] = Some((first - third).unsigned_abs() as f64 / l as f64);
            }
        }
    }
    Ok(out)
}

/// Fraction of runs whose odd-block deviation at `l_delta` is at most
/// `delta`.
/// Parameters of [`martingale_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleConfig {
    pub t_block: u64,
    pub horizon: u64,
    pub runs: usize,
    pub delta: f64,
    pub l_delta: u64,
    pub seed: u64,
}

pub fn martingale_diagnostic(
    strategy: ProbeStrategy,
    config: &MartingaleConfig,
    exec: Execution,
) -> Result<f64> {
    let MartingaleConfig {
        t_block,
        horizon,
        runs,
        delta,
        l_delta,
        seed,
    } = *config;
    let devs = exec::map_range(exec, runs, |r| {
        odd_block_deviation(
            strategy,
            t_block,
            horizon,
            split_seed(seed, r as u64),
            &[l_delta],
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut ok = 0usize;
    for d in devs {
        match d[0] {
            Some(v) if v <= delta => ok += 1,
            Some(_) => {}
            None => {
                return Err(Error::InvalidParameter(format!(
                    "horizon {horizon} has fewer than {l_delta} odd-block steps"
                )))
            }
        }
    }
    Ok(ok as f64 / runs as f64)
}
