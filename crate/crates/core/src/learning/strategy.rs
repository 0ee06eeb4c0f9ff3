use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Forecaster;
use crate::equilibrium::best_reaction;
use crate::error::{Error, Result};
use crate::game::{Game, OpponentDistribution};

/// What a player does at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub mix: Vec<f64>,
    /// Forecast over `A_{-i}` the decision was based on, if any.
    pub assessment: Option<Vec<f64>>,
}

/// A behavioral rule: given the step it returns a mixed action; the engine
/// reports every realized profile through [`observe`](Strategy::observe).
/// Any randomness must come from the supplied per-step stream.
pub trait Strategy: Send {
    fn decide(&mut self, g: &Game, i: usize, t: u64, rng: &mut ChaCha8Rng) -> Decision;
    fn observe(&mut self, _g: &Game, _i: usize, _profile: usize) {}
}

fn point_mass(n: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[a] = 1.0;
    e
}

/// Plays the same mix at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedStrategy {
    pub mix: Vec<f64>,
}

impl FixedStrategy {
    pub fn pure(actions: usize, a: usize) -> Self {
        FixedStrategy {
            mix: point_mass(actions, a),
        }
    }
}

impl Strategy for FixedStrategy {
    fn decide(&mut self, _g: &Game, _i: usize, _t: u64, _rng: &mut ChaCha8Rng) -> Decision {
        Decision {
            mix: self.mix.clone(),
            assessment: None,
        }
    }
}

/// Plays a script of pure actions, optionally announcing a scripted
/// assessment with each. Cyclic scripts wrap; others repeat their last
/// entry past the end.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedStrategy {
    pub actions: Vec<usize>,
    pub assessments: Vec<Vec<f64>>,
    pub cyclic: bool,
}

impl ScriptedStrategy {
    pub fn new(actions: Vec<usize>, assessments: Vec<Vec<f64>>, cyclic: bool) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidParameter("empty action script".into()));
        }
        Ok(ScriptedStrategy {
            actions,
            assessments,
            cyclic,
        })
    }

    fn slot(&self, t: u64, len: usize) -> usize {
        let k = (t - 1) as usize;
        if self.cyclic {
            k % len
        } else {
            k.min(len - 1)
        }
    }
}

impl Strategy for ScriptedStrategy {
    fn decide(&mut self, g: &Game, i: usize, t: u64, _rng: &mut ChaCha8Rng) -> Decision {
        let a = self.actions[self.slot(t, self.actions.len())];
        let assessment = (!self.assessments.is_empty())
            .then(|| self.assessments[self.slot(t, self.assessments.len())].clone());
        Decision {
            mix: point_mass(g.num_actions(i), a),
            assessment,
        }
    }
}

/// Plays the best reaction (lowest-index ties) to each forecast of the
/// opponents' joint action.
pub struct BestReactionStrategy<F> {
    pub forecaster: F,
}

/// Best reaction of player `i` to the forecasts of `forecaster`, which must
/// forecast over `A_{-i}`.
pub fn best_reaction_strategy<F: Forecaster>(
    g: &Game,
    i: usize,
    forecaster: F,
) -> Result<BestReactionStrategy<F>> {
    let need = g.space().opponent_size(i);
    if forecaster.outcomes() != need {
        return Err(Error::ShapeMismatch(format!(
            "forecaster over {} outcomes for {need} opponent profiles",
            forecaster.outcomes()
        )));
    }
    Ok(BestReactionStrategy { forecaster })
}

impl<F: Forecaster> Strategy for BestReactionStrategy<F> {
    fn decide(&mut self, g: &Game, i: usize, t: u64, rng: &mut ChaCha8Rng) -> Decision {
        let q = self.forecaster.forecast(t, rng);
        let pi = OpponentDistribution {
            player: i,
            weights: q,
        };
        let a = best_reaction(g, i, &pi);
        Decision {
            mix: point_mass(g.num_actions(i), a),
            assessment: Some(pi.weights),
        }
    }

    fn observe(&mut self, g: &Game, i: usize, profile: usize) {
        let (_, opponents) = g.space().split(i, profile);
        self.forecaster.observe(opponents);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Odd,
    Even,
}

/// Alternating blocks with base `T > 2`: step 1 odd, step 2 even, and for
/// `k >= 0` odd on `2T^k < t <= T^{k+1}`, even on `T^{k+1} < t <= 2T^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub base: u64,
}

impl BlockSchedule {
    pub fn new(base: u64) -> Result<Self> {
        if base <= 2 {
            return Err(Error::InvalidParameter(format!(
                "block base must exceed 2, got {base}"
            )));
        }
        Ok(BlockSchedule { base })
    }

    pub fn phase(&self, t: u64) -> Phase {
        match t {
            0 | 1 => Phase::Odd,
            2 => Phase::Even,
            _ => {
                let (t, base) = (u128::from(t), u128::from(self.base));
                let mut power = 1u128; // T^k
                loop {
                    let next = power * base;
                    if 2 * power < t && t <= next {
                        return Phase::Odd;
                    }
                    if next < t && t <= 2 * next {
                        return Phase::Even;
                    }
                    power = next;
                }
            }
        }
    }

    /// `T^{k}` with overflow checking.
    pub fn power(&self, k: u32) -> Result<u64> {
        self.base
            .checked_pow(k)
            .ok_or_else(|| Error::HorizonOverflow(format!("{}^{k} overflows", self.base)))
    }

    /// Number of even steps in `1..=t`.
    pub fn even_steps(&self, t: u64) -> u64 {
        (1..=t).filter(|&s| self.phase(s) == Phase::Even).count() as u64
    }
}

/// Column player of `Gamma*` mixing uniformly over I/III on odd blocks
/// and over II/IV on even blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2Adversary {
    pub schedule: BlockSchedule,
}

/// Adversary following [`BlockSchedule`] with base `t_block`.
pub fn example2_adversary(t_block: u64) -> Result<Example2Adversary> {
    Ok(Example2Adversary {
        schedule: BlockSchedule::new(t_block)?,
    })
}

pub const SIGMA_ODD: [f64; 4] = [0.5, 0.0, 0.5, 0.0];
pub const SIGMA_EVEN: [f64; 4] = [0.0, 0.5, 0.0, 0.5];

impl Strategy for Example2Adversary {
    fn decide(&mut self, _g: &Game, _i: usize, t: u64, _rng: &mut ChaCha8Rng) -> Decision {
        let mix = match self.schedule.phase(t) {
            Phase::Odd => SIGMA_ODD,
            Phase::Even => SIGMA_EVEN,
        };
        Decision {
            mix: mix.to_vec(),
            assessment: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_boundaries() {
        let s = BlockSchedule::new(3).unwrap();
        assert_eq!(s.phase(1), Phase::Odd);
        assert_eq!(s.phase(2), Phase::Even);
        assert_eq!(s.phase(3), Phase::Odd);
        assert_eq!(s.phase(4), Phase::Even);
        assert_eq!(s.phase(6), Phase::Even);
        assert_eq!(s.phase(7), Phase::Odd);
        assert_eq!(s.phase(9), Phase::Odd);
        assert_eq!(s.phase(10), Phase::Even);
        assert_eq!(s.phase(18), Phase::Even);
        assert_eq!(s.phase(19), Phase::Odd);
        assert!(BlockSchedule::new(2).is_err());
    }

    #[test]
    fn even_fraction_bound() {
        for base in [3u64, 4, 5, 7] {
            let s = BlockSchedule::new(base).unwrap();
            for k in 0..4u32 {
                let h = 2 * s.power(k + 1).unwrap();
                let f = s.even_steps(h) as f64 / h as f64;
                assert!(
                    f >= 0.5 && f <= 0.5 + 1.0 / base as f64,
                    "T={base} k={k} f={f}"
                );
            }
        }
    }
}
