use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total probability of a lottery or distribution.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Finite lottery `{(p_j, z_j)}`. Zero probabilities and repeated outcomes
/// are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LotteryDoc", into = "LotteryDoc")]
pub struct Lottery {
    entries: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct LotteryDoc {
    entries: Vec<(f64, f64)>,
}

impl TryFrom<LotteryDoc> for Lottery {
    type Error = Error;
    fn try_from(doc: LotteryDoc) -> Result<Self> {
        Lottery::new(doc.entries)
    }
}

impl From<Lottery> for LotteryDoc {
    fn from(l: Lottery) -> Self {
        LotteryDoc { entries: l.entries }
    }
}

/// Validates a probability vector and renormalizes it when the total is
/// within tolerance of one.
pub(crate) fn normalize_probabilities(probs: &mut [f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(
            "empty probability vector".into(),
        ));
    }
    for &p in probs.iter() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is negative or not finite"
            )));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    if total != 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(())
}

impl Lottery {
    /// Builds a lottery from `(probability, outcome)` pairs.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(_, z)) = entries.iter().find(|(_, z)| !z.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "outcome {z} is not finite"
            )));
        }
        let mut probs: Vec<f64> = entries.iter().map(|e| e.0).collect();
        normalize_probabilities(&mut probs)?;
        Ok(Lottery {
            entries: probs
                .into_iter()
                .zip(entries)
                .map(|(p, (_, z))| (p, z))
                .collect(),
        })
    }

    /// Caller guarantees the probabilities form a distribution.
    pub(crate) fn from_parts(probs: &[f64], outcomes: impl Iterator<Item = f64>) -> Self {
        Lottery {
            entries: probs.iter().copied().zip(outcomes).collect(),
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn expectation(&self) -> f64 {
        self.entries.iter().map(|(p, z)| p * z).sum()
    }
}

/// Triples `(nu_l, counterfactual outcome, realized outcome)` whose CPT
/// regret compares the two induced lotteries.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTriples {
    entries: Vec<(f64, f64, f64)>,
}

impl RegretTriples {
    pub fn new(entries: Vec<(f64, f64, f64)>) -> Result<Self> {
        if entries
            .iter()
            .any(|&(_, a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidDistribution("outcomes must be finite".into()));
        }
        let mut probs: Vec<f64> = entries.iter().map(|e| e.0).collect();
        normalize_probabilities(&mut probs)?;
        Ok(RegretTriples {
            entries: probs
                .into_iter()
                .zip(entries)
                .map(|(p, (_, a, b))| (p, a, b))
                .collect(),
        })
    }

    pub fn entries(&self) -> &[(f64, f64, f64)] {
        &self.entries
    }

    pub fn counterfactual(&self) -> Lottery {
        Lottery {
            entries: self.entries.iter().map(|&(p, a, _)| (p, a)).collect(),
        }
    }

    pub fn realized(&self) -> Lottery {
        Lottery {
            entries: self.entries.iter().map(|&(p, _, b)| (p, b)).collect(),
        }
    }
}
