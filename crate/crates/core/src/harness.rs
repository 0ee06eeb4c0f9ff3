//! Scenario catalog, run configuration and the drivers behind `simulate`
//! and `replay`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::{self, PreferenceSpec};
use crate::equilibrium::{
    check_correlated_eq, check_mediated_eq_with, construct_mediator, mediated_distance,
    EquilibriumCertificate, MediatedGameFile, RepairPoints, Witness, HULL_TOL,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{Game, JointDistribution};
use crate::learning::{
    best_reaction_strategy, construct_calibrated_replay, make_calibrated_forecaster, probe_trace,
    regret_tail_probe, run_engine, scripted_example1, ProbeConfig, ProbeReport, ProbeStrategy,
    ReplayReport, RunTrace, ScriptedConfig, ScriptedReport, Strategy, Variant,
};
use crate::rng::split_seed;
use crate::SCHEMA_VERSION;

/// A named run recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
}

pub const SCENARIOS: [Scenario; 5] = [
    Scenario {
        name: "example1-2p",
        description: "scripted calibrated play on the two-player game Gamma*",
    },
    Scenario {
        name: "example1-3p",
        description: "scripted calibrated play on the three-player extension of Gamma*",
    },
    Scenario {
        name: "example2",
        description: "CPT regret tail probe against the block adversary",
    },
    Scenario {
        name: "random-2x2",
        description: "correlated and mediated verdicts on random 2x2 CPT games",
    },
    Scenario {
        name: "random",
        description: "calibrated best-reaction play on a random CPT game",
    },
];

pub fn scenario(name: &str) -> Result<Scenario> {
    SCENARIOS
        .iter()
        .copied()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// Every knob of a simulation. Fields irrelevant to the chosen scenario are
/// carried along unchanged so the file round-trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: String,
    /// Number of steps `T`.
    pub horizon: u64,
    pub seed: u64,
    /// Grid pitch of calibrated forecasters.
    pub eps: f64,
    /// Grid resolution `m` of mediated checks.
    pub resolution: usize,
    /// Tolerance of correlated checks.
    pub tol: f64,
    /// Tolerance of mediated checks.
    pub mediated_tol: f64,
    /// Prelec exponent of player 1 in `Gamma*`.
    pub gamma1: f64,
    pub t_block: u64,
    pub k: u32,
    pub runs: usize,
    pub eps_tilde: f64,
    pub strategies: Vec<ProbeStrategy>,
    pub dims: Vec<usize>,
    pub games: usize,
    pub samples: usize,
    pub preferences: PreferenceSpec,
    /// Output file names, relative to the output directory.
    pub trace: String,
    pub summary: String,
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> Result<Self> {
        scenario(name)?;
        let mut c = RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario: name.to_string(),
            horizon: 4000,
            seed: 0,
            eps: 0.1,
            resolution: 24,
            tol: 1e-6,
            mediated_tol: 1e-3,
            gamma1: 0.5,
            t_block: 5,
            k: 2,
            runs: 200,
            eps_tilde: 0.004,
            strategies: ProbeStrategy::families().to_vec(),
            dims: vec![2, 2],
            games: 50,
            samples: 200,
            preferences: PreferenceSpec::Full {
                gamma_min: 0.3,
                gamma_max: 1.0,
            },
            trace: "trace.jsonl".into(),
            summary: "summary.json".into(),
        };
        if name == "random" {
            c.dims = vec![3, 3];
            c.horizon = 2000;
            c.mediated_tol = 1e-2;
        }
        Ok(c)
    }

    /// Reads a config document: `scenario` picks the defaults, every other
    /// present key overrides them.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let Value::Object(fields) = doc else {
            return Err(Error::Parse("config must be a JSON object".into()));
        };
        let name = match fields.get("scenario") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::Parse("`scenario` must be a string".into())),
            None => return Err(Error::Parse("missing field `scenario`".into())),
        };
        let Value::Object(mut merged) =
            serde_json::to_value(Self::for_scenario(&name)?).expect("serializable")
        else {
            unreachable!("configs serialize to objects")
        };
        merged.extend(fields);
        let c: RunConfig = serde_json::from_value(Value::Object(merged))
            .map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        scenario(&self.scenario)?;
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad("eps must lie in (0, 1]");
        }
        if self.resolution == 0 {
            return bad("resolution must be at least 1");
        }
        if !(self.tol >= 0.0 && self.mediated_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must list at least one positive action count");
        }
        Ok(())
    }

    fn probe(&self) -> ProbeConfig {
        ProbeConfig {
            t_block: self.t_block,
            k: self.k,
            runs: self.runs,
            eps_tilde: self.eps_tilde,
            seed: self.seed,
            gamma1: self.gamma1,
        }
    }

    fn scripted(&self, variant: Variant) -> ScriptedConfig {
        ScriptedConfig {
            variant,
            horizon: self.horizon,
            seed: self.seed,
            gamma1: self.gamma1,
            resolution: self.resolution,
            mediated_tol: self.mediated_tol,
        }
    }
}

/// Correlated and mediated verdicts that disagree on one sampled
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub game: usize,
    pub sample: usize,
    pub correlated_margin: f64,
    pub mediated_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulationResult {
    Scripted {
        report: ScriptedReport,
        /// `(t, max_i mu_i(a_i) d(conditional, sampled hull))` at the
        /// checkpoint steps.
        mediated_path: Vec<(u64, f64)>,
    },
    Probe {
        reports: Vec<ProbeReport>,
    },
    Collapse {
        checked: usize,
        agreements: usize,
        agreement_rate: f64,
        correlated_members: usize,
        mediated_members: usize,
        disagreements: Vec<Disagreement>,
    },
    Random {
        scores: Vec<Vec<f64>>,
        max_score: f64,
        correlated: EquilibriumCertificate,
        mediated_distance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: RunConfig,
    pub result: SimulationResult,
}

/// A finished simulation: the summary plus the JSON Lines trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub summary: Summary,
    pub trace: Vec<u8>,
}

impl Simulation {
    /// Writes the trace and the summary into `dir`; returns their paths.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        fs::create_dir_all(dir).map_err(io)?;
        let trace = dir.join(&self.summary.config.trace);
        let summary = dir.join(&self.summary.config.summary);
        fs::write(&trace, &self.trace).map_err(io)?;
        let mut text = serde_json::to_string_pretty(&self.summary).expect("serializable");
        text.push('\n');
        fs::write(&summary, text).map_err(io)?;
        Ok((trace, summary))
    }
}

fn jsonl(trace: &RunTrace) -> Vec<u8> {
    let mut out = Vec::new();
    trace.write_jsonl(&mut out).expect("writing to memory");
    out
}

/// Runs the scenario named in `config`.
pub fn simulate(config: &RunConfig, exec: Execution) -> Result<Simulation> {
    config.validate()?;
    let (result, trace) = match config.scenario.as_str() {
        "example1-2p" => scripted(config, Variant::TwoPlayer, exec)?,
        "example1-3p" => scripted(config, Variant::ThreePlayer, exec)?,
        "example2" => probe(config, exec)?,
        "random-2x2" => collapse(config, exec)?,
        "random" => random_play(config)?,
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(Simulation {
        summary: Summary {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            result,
        },
        trace,
    })
}

fn scripted(
    config: &RunConfig,
    variant: Variant,
    exec: Execution,
) -> Result<(SimulationResult, Vec<u8>)> {
    let run = scripted_example1(&config.scripted(variant))?;
    let players: Vec<usize> = (0..run.game.players()).collect();
    let steps: Vec<u64> = run.trace.checkpoints.iter().map(|c| c.t).collect();
    let mediated_path = exec::map(exec, steps, |t| {
        let xi = run
            .trace
            .empirical(t as usize)
            .expect("checkpoint within the run");
        mediated_distance(
            &run.game,
            &xi,
            &players,
            config.resolution,
            config.mediated_tol,
        )
        .map(|d| (t, d))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((
        SimulationResult::Scripted {
            report: run.report,
            mediated_path,
        },
        jsonl(&run.trace),
    ))
}

fn probe(config: &RunConfig, exec: Execution) -> Result<(SimulationResult, Vec<u8>)> {
    let pc = config.probe();
    let reports = config
        .strategies
        .iter()
        .map(|&s| regret_tail_probe(s, &pc, exec))
        .collect::<Result<Vec<_>>>()?;
    // the first run of every family, one after another
    let mut trace = Vec::new();
    for &s in &config.strategies {
        trace.extend(jsonl(&probe_trace(s, &pc, split_seed(pc.seed, 0))?));
    }
    Ok((SimulationResult::Probe { reports }, trace))
}

fn collapse(config: &RunConfig, exec: Execution) -> Result<(SimulationResult, Vec<u8>)> {
    use rand::SeedableRng;

    let per_game = exec::map_range(exec, config.games, |gi| -> Result<Vec<(f64, f64)>> {
        let seed = split_seed(config.seed, gi as u64);
        let g = catalog::random_game(&config.dims, seed, config.preferences)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(split_seed(seed, 1));
        (0..config.samples)
            .map(|s| {
                let mu = catalog::random_distribution(&config.dims, &mut rng, s % 2 == 1);
                let c = check_correlated_eq(&g, &mu, config.tol)?;
                let d = check_mediated_eq_with(
                    &g,
                    &mu,
                    config.resolution,
                    config.tol,
                    Execution::Sequential,
                )?;
                Ok((c.margin, d.margin))
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut trace = Vec::new();
    let mut disagreements = Vec::new();
    let (mut checked, mut agreements, mut cm, mut dm) = (0, 0, 0, 0);
    for (gi, rows) in per_game.iter().enumerate() {
        for (si, &(c, d)) in rows.iter().enumerate() {
            let (cin, din) = (c >= -config.tol, d >= 0.0);
            checked += 1;
            cm += cin as usize;
            dm += din as usize;
            if cin == din {
                agreements += 1;
            } else {
                disagreements.push(Disagreement {
                    game: gi,
                    sample: si,
                    correlated_margin: c,
                    mediated_margin: d,
                });
            }
            serde_json::to_writer(
                &mut trace,
                &serde_json::json!({"game": gi, "sample": si, "correlated_margin": c, "mediated_margin": d}),
            )
            .expect("writing to memory");
            trace.push(b'\n');
        }
    }
    Ok((
        SimulationResult::Collapse {
            checked,
            agreements,
            agreement_rate: if checked == 0 {
                1.0
            } else {
                agreements as f64 / checked as f64
            },
            correlated_members: cm,
            mediated_members: dm,
            disagreements,
        },
        trace,
    ))
}

fn random_play(config: &RunConfig) -> Result<(SimulationResult, Vec<u8>)> {
    let g = catalog::random_game(&config.dims, config.seed, config.preferences)?;
    let mut strategies = (0..g.players())
        .map(|i| -> Result<Box<dyn Strategy>> {
            let f = make_calibrated_forecaster(g.space().opponent_size(i), config.eps)?;
            Ok(Box::new(best_reaction_strategy(&g, i, f)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = run_engine(&g, &mut strategies, config.horizon, config.seed)?;
    let xi = trace.empirical(trace.steps.len()).expect("nonempty run");
    let scores: Vec<Vec<f64>> = trace
        .calibration_scores()
        .into_iter()
        .map(|s| s.unwrap_or_default())
        .collect();
    let players: Vec<usize> = (0..g.players()).collect();
    Ok((
        SimulationResult::Random {
            max_score: scores.iter().flatten().fold(0.0, |m, &v| m.max(v)),
            scores,
            correlated: check_correlated_eq(&g, &xi, config.tol)?,
            mediated_distance: mediated_distance(
                &g,
                &xi,
                &players,
                config.resolution,
                config.mediated_tol,
            )?,
        },
        jsonl(&trace),
    ))
}

/// Effective settings of a replay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    pub horizon: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub schema_version: u32,
    pub config: ReplayConfig,
    pub report: ReplayReport,
}

/// Replays a mediated-game document as calibrated play.
pub fn replay(file: MediatedGameFile, config: ReplayConfig) -> Result<ReplaySummary> {
    let (mg, sigma, repair) = file.into_parts()?;
    let out = construct_calibrated_replay(&mg, &sigma, config.horizon, &repair, config.tol)?;
    Ok(ReplaySummary {
        schema_version: SCHEMA_VERSION,
        config,
        report: out.report,
    })
}

/// Mediator for `mu*` on `Gamma*` built from its hull witnesses at grid
/// resolution `m`, with repair points for the column player, whose four
/// signals all leave it certain of row 0.
pub fn mu_star_mediator(gamma1: f64, m: usize) -> Result<MediatedGameFile> {
    let g = catalog::gamma_star(gamma1)?;
    let mu = catalog::mu_star();
    mediator_file(&g, &mu, m, |mg, sigma| {
        let maps = sigma.pure_actions().expect("constructed profiles are pure");
        let marginal = mg.psi().marginal(1);
        let used: Vec<usize> = (0..marginal.len()).filter(|&b| marginal[b] > 0.0).collect();
        used.iter()
            .skip(1)
            .enumerate()
            .filter(|&(_, &b)| maps[1][b] != maps[1][used[0]])
            .map(|(j, &b)| RepairPoints {
                player: 1,
                signal: b,
                points: (1..=4)
                    .map(|l: i32| {
                        let d = (j + 1) as f64 * 10f64.powi(-l - 2);
                        vec![1.0 - d, d]
                    })
                    .collect(),
            })
            .collect()
    })
}

fn mediator_file(
    g: &Game,
    mu: &JointDistribution,
    m: usize,
    repair: impl FnOnce(
        &crate::equilibrium::MediatedGame,
        &crate::equilibrium::RandomizedStrategyProfile,
    ) -> Vec<RepairPoints>,
) -> Result<MediatedGameFile> {
    let cert = check_mediated_eq_with(g, mu, m, HULL_TOL, Execution::default())?;
    if !cert.is_member() {
        return Err(Error::InvalidParameter(format!(
            "distribution is not a mediated equilibrium at resolution {m} (margin {:.3e})",
            cert.margin
        )));
    }
    let Witness::Hulls { entries } = cert.witness else {
        unreachable!("mediated checks return hull witnesses")
    };
    let (mg, sigma) = construct_mediator(g, mu, &entries, HULL_TOL)?;
    let points = repair(&mg, &sigma);
    Ok(MediatedGameFile::from_parts(&mg, &sigma, points))
}
