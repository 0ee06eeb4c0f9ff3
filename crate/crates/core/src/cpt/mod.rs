//! Cumulative prospect theory evaluation of finite lotteries.
//!
//! A decision maker is described by [`CptPreferences`]: a reference-dependent
//! value function and separate weighting functions for gains and losses.
//! [`cpt_value`] ranks outcomes from best to worst, turns cumulative
//! probabilities into decision weights, and sums weighted values. Outcomes
//! equal to the reference point count as gains.

mod lottery;
mod value;
mod weighting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use lottery::normalize_probabilities;
pub use lottery::{Lottery, RegretTriples, PROBABILITY_SUM_TOL};
pub use value::{ValueFunction, ValueShape};
pub use weighting::WeightingFunction;

/// One decision maker's CPT preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PreferencesDoc", into = "PreferencesDoc")]
pub struct CptPreferences {
    pub value: ValueFunction,
    pub weight_gain: WeightingFunction,
    pub weight_loss: WeightingFunction,
}

/// On-disk layout: `{reference, value: {kind, ..}, weight_gain, weight_loss}`.
#[derive(Serialize, Deserialize)]
struct PreferencesDoc {
    reference: f64,
    value: ValueShape,
    weight_gain: WeightingFunction,
    weight_loss: WeightingFunction,
}

impl TryFrom<PreferencesDoc> for CptPreferences {
    type Error = Error;
    fn try_from(doc: PreferencesDoc) -> Result<Self> {
        let prefs = CptPreferences {
            value: ValueFunction {
                reference: doc.reference,
                shape: doc.value,
            },
            weight_gain: doc.weight_gain,
            weight_loss: doc.weight_loss,
        };
        prefs.value.validate()?;
        Ok(prefs)
    }
}

impl From<CptPreferences> for PreferencesDoc {
    fn from(p: CptPreferences) -> Self {
        PreferencesDoc {
            reference: p.value.reference,
            value: p.value.shape,
            weight_gain: p.weight_gain,
            weight_loss: p.weight_loss,
        }
    }
}

impl Default for CptPreferences {
    fn default() -> Self {
        Self::expected_utility()
    }
}

impl CptPreferences {
    /// Identity value at reference 0 with identity weights: plain expectation.
    pub fn expected_utility() -> Self {
        CptPreferences {
            value: ValueFunction::identity(0.0),
            weight_gain: WeightingFunction::Identity,
            weight_loss: WeightingFunction::Identity,
        }
    }

    /// Identity value at `reference` with the same Prelec weighting on both
    /// gains and losses.
    pub fn prelec(reference: f64, gamma: f64) -> Result<Self> {
        let w = WeightingFunction::prelec(gamma)?;
        Ok(CptPreferences {
            value: ValueFunction::identity(reference),
            weight_gain: w.clone(),
            weight_loss: w,
        })
    }

    pub fn is_expected_utility(&self) -> bool {
        matches!(self.value.shape, ValueShape::Identity)
            && self.weight_gain.is_identity()
            && self.weight_loss.is_identity()
    }
}

/// `w(p)` for `p` in `[0, 1]`.
pub fn evaluate_weight(w: &WeightingFunction, p: f64) -> Result<f64> {
    w.evaluate(p)
}

/// Entry indices ordered by non-increasing outcome; ties keep input order.
pub fn rank_outcomes(lottery: &Lottery) -> Vec<usize> {
    rank(lottery.entries())
}

fn rank(entries: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].1.total_cmp(&entries[a].1));
    order
}

/// Decision weights along a ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionWeights {
    /// Entry indices, best outcome first.
    pub order: Vec<usize>,
    /// `weights[j]` belongs to entry `order[j]`.
    pub weights: Vec<f64>,
    /// Number of leading positions that are gains (`z >= reference`).
    pub split: usize,
}

pub fn decision_weights(lottery: &Lottery, prefs: &CptPreferences) -> DecisionWeights {
    weights_for(lottery.entries(), prefs)
}

fn weights_for(entries: &[(f64, f64)], prefs: &CptPreferences) -> DecisionWeights {
    let order = rank(entries);
    let r = prefs.value.reference;
    let split = order.iter().take_while(|&&k| entries[k].1 >= r).count();
    let mut weights = vec![0.0; order.len()];

    // ranked probabilities with prefix and suffix sums; a cumulative above
    // one half is taken as one minus its complement so that whole tails
    // are exactly 1 where the weighting functions are steepest
    let ps: Vec<f64> = order.iter().map(|&k| entries[k].0).collect();
    let n = ps.len();
    let mut head = vec![0.0; n + 1];
    let mut tail = vec![0.0; n + 1];
    for j in 0..n {
        head[j + 1] = head[j] + ps[j];
        tail[n - 1 - j] = tail[n - j] + ps[n - 1 - j];
    }
    // probability of the best `j` entries, and of the worst `n - j`
    let best = |j: usize| {
        if head[j] <= 0.5 {
            head[j]
        } else {
            1.0 - tail[j]
        }
    };
    let worst = |j: usize| {
        if tail[j] <= 0.5 {
            tail[j]
        } else {
            1.0 - head[j]
        }
    };

    let gain_identity = matches!(prefs.weight_gain, WeightingFunction::Identity);
    let mut w_prev = 0.0;
    for j in 0..split {
        if gain_identity {
            weights[j] = ps[j];
        } else {
            let w = prefs.weight_gain.eval(best(j + 1));
            weights[j] = (w - w_prev).max(0.0);
            w_prev = w;
        }
    }

    let loss_identity = matches!(prefs.weight_loss, WeightingFunction::Identity);
    w_prev = 0.0;
    for j in (split..n).rev() {
        if loss_identity {
            weights[j] = ps[j];
        } else {
            let w = prefs.weight_loss.eval(worst(j));
            weights[j] = (w - w_prev).max(0.0);
            w_prev = w;
        }
    }

    DecisionWeights {
        order,
        weights,
        split,
    }
}

/// CPT value `V(L)`.
pub fn cpt_value(lottery: &Lottery, prefs: &CptPreferences) -> f64 {
    value_of(lottery.entries(), prefs)
}

pub(crate) fn value_of(entries: &[(f64, f64)], prefs: &CptPreferences) -> f64 {
    let dw = weights_for(entries, prefs);
    dw.order
        .iter()
        .zip(&dw.weights)
        .map(|(&k, &pi)| pi * prefs.value.eval(entries[k].1))
        .sum()
}

/// `V(counterfactual lottery) - V(realized lottery)`.
pub fn cpt_regret(triples: &RegretTriples, prefs: &CptPreferences) -> f64 {
    cpt_value(&triples.counterfactual(), prefs) - cpt_value(&triples.realized(), prefs)
}
