use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    calibration_score, regret_matrix, ForecastDictionary, ForecastId, ForecastRecord, Strategy,
};
use crate::error::{Error, Result};
use crate::game::{EmpiricalCounts, Game, JointDistribution};
use crate::rng::{sample_index, stream};
use crate::SCHEMA_VERSION;

/// One step of play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    /// Action of every player.
    pub a: Vec<usize>,
    /// Forecast id per player (`None` for players without assessments).
    pub assessments: Vec<Option<ForecastId>>,
    pub mixes: Vec<Vec<f64>>,
}

/// Empirical distribution and regret matrices after step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub xi: Vec<f64>,
    /// `regret[i][a][a~]`
    pub regret: Vec<Vec<Vec<f64>>>,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    pub shape: Vec<usize>,
    pub steps: Vec<StepRecord>,
    /// Forecast dictionary per player.
    pub dictionaries: Vec<ForecastDictionary>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Checkpoint steps: powers of two up to `horizon`, plus `horizon`.
pub fn checkpoint_steps(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1u64), |&t| t.checked_mul(2))
        .take_while(|&t| t <= horizon)
        .collect();
    if out.last() != Some(&horizon) && horizon > 0 {
        out.push(horizon);
    }
    out
}

fn checkpoint(g: &Game, counts: &EmpiricalCounts) -> Checkpoint {
    let xi = counts.distribution().expect("at least one step");
    Checkpoint {
        t: counts.total(),
        regret: (0..g.players()).map(|i| regret_matrix(g, i, &xi)).collect(),
        xi: xi.weights().to_vec(),
    }
}

/// Plays `g` for `horizon` steps. Player `i` draws at step `t` from the
/// stream `(seed, i, t)`, so runs are reproducible and players independent.
pub fn run_engine(
    g: &Game,
    strategies: &mut [Box<dyn Strategy + '_>],
    horizon: u64,
    seed: u64,
) -> Result<RunTrace> {
    let n = g.players();
    if strategies.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} strategies for {n} players",
            strategies.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let marks = checkpoint_steps(horizon);
    let mut next_mark = 0;
    let mut dictionaries = vec![ForecastDictionary::default(); n];
    let mut counts = EmpiricalCounts::new(g.dims().to_vec());
    let mut steps = Vec::with_capacity(horizon as usize);
    let mut checkpoints = Vec::with_capacity(marks.len());

    for t in 1..=horizon {
        let mut a = Vec::with_capacity(n);
        let mut assessments = Vec::with_capacity(n);
        let mut mixes = Vec::with_capacity(n);
        for (i, s) in strategies.iter_mut().enumerate() {
            let mut rng = stream(seed, i, t);
            let d = s.decide(g, i, t, &mut rng);
            if d.mix.len() != g.num_actions(i) {
                return Err(Error::ShapeMismatch(format!(
                    "player {i} produced a mix over {} actions",
                    d.mix.len()
                )));
            }
            a.push(sample_index(&d.mix, &mut rng));
            assessments.push(d.assessment.map(|q| dictionaries[i].intern(&q)));
            mixes.push(d.mix);
        }
        let profile = g.space().index(&a);
        for (i, s) in strategies.iter_mut().enumerate() {
            s.observe(g, i, profile);
        }
        counts.record(profile);
        steps.push(StepRecord {
            t,
            a,
            assessments,
            mixes,
        });
        if marks.get(next_mark) == Some(&t) {
            checkpoints.push(checkpoint(g, &counts));
            next_mark += 1;
        }
    }
    Ok(RunTrace {
        seed,
        shape: g.dims().to_vec(),
        steps,
        dictionaries,
        checkpoints,
    })
}

impl RunTrace {
    pub fn horizon(&self) -> u64 {
        self.steps.len() as u64
    }

    /// Profile indices in play order.
    pub fn profile_log(&self) -> Vec<usize> {
        let space = crate::game::ProfileSpace::new(&self.shape);
        self.steps.iter().map(|s| space.index(&s.a)).collect()
    }

    /// `xi^t` recomputed from the log.
    pub fn empirical(&self, t: usize) -> Option<JointDistribution> {
        EmpiricalCounts::from_log(self.shape.clone(), &self.profile_log()[..t]).distribution()
    }

    /// Forecasts of player `i` against the realized opponent profiles;
    /// `None` unless the player announced an assessment at every step.
    pub fn forecast_record(&self, i: usize) -> Option<ForecastRecord> {
        let space = crate::game::ProfileSpace::new(&self.shape);
        let mut rec = ForecastRecord {
            outcomes: space.opponent_size(i),
            dictionary: self.dictionaries[i].clone(),
            steps: Vec::with_capacity(self.steps.len()),
        };
        for s in &self.steps {
            let id = s.assessments[i]?;
            let (_, o) = space.split(i, space.index(&s.a));
            rec.steps.push((id, o));
        }
        Some(rec)
    }

    /// Calibration score of every player with assessments, at the horizon.
    pub fn calibration_scores(&self) -> Vec<Option<Vec<f64>>> {
        (0..self.shape.len())
            .map(|i| {
                self.forecast_record(i)
                    .map(|r| calibration_score(&r, r.len()).expect("full record"))
            })
            .collect()
    }

    /// Largest deviation between stored checkpoints and recomputation.
    pub fn checkpoint_deviation(&self) -> f64 {
        let log = self.profile_log();
        let mut counts = EmpiricalCounts::new(self.shape.clone());
        let mut worst = 0.0f64;
        let mut cps = self.checkpoints.iter().peekable();
        for (k, &p) in log.iter().enumerate() {
            counts.record(p);
            while let Some(cp) = cps.peek() {
                if cp.t != (k + 1) as u64 {
                    break;
                }
                let xi = counts.distribution().expect("nonempty");
                for (a, b) in xi.weights().iter().zip(&cp.xi) {
                    worst = worst.max((a - b).abs());
                }
                cps.next();
            }
        }
        worst
    }

    /// JSON Lines: a header, one record per step, checkpoint records at
    /// their steps, and one dictionary record per player.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        let line = |out: &mut dyn Write, v: serde_json::Value| -> std::io::Result<()> {
            serde_json::to_writer(&mut *out, &v)?;
            out.write_all(b"\n")
        };
        line(
            &mut out,
            serde_json::json!({
                "kind": "header",
                "schema_version": SCHEMA_VERSION,
                "seed": self.seed,
                "shape": self.shape,
                "horizon": self.horizon(),
            }),
        )?;
        let mut cps = self.checkpoints.iter().peekable();
        for s in &self.steps {
            line(
                &mut out,
                serde_json::json!({
                    "kind": "step",
                    "t": s.t,
                    "a": s.a,
                    "assessments": s.assessments,
                    "mixes": s.mixes,
                }),
            )?;
            while let Some(cp) = cps.next_if(|cp| cp.t == s.t) {
                line(
                    &mut out,
                    serde_json::json!({"kind": "checkpoint", "t": cp.t, "xi": cp.xi, "regret": cp.regret}),
                )?;
            }
        }
        for (i, d) in self.dictionaries.iter().enumerate() {
            line(
                &mut out,
                serde_json::json!({"kind": "dictionary", "player": i, "forecasts": d}),
            )?;
        }
        Ok(())
    }
}
