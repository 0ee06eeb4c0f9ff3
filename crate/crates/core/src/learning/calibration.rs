use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dictionary index of a forecast.
pub type ForecastId = u32;

/// Interns forecasts by bit pattern so equal forecasts share one id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ForecastDictionary {
    points: Vec<Vec<f64>>,
    lookup: HashMap<Vec<u64>, ForecastId>,
}

fn key(q: &[f64]) -> Vec<u64> {
    q.iter().map(|v| v.to_bits()).collect()
}

impl From<Vec<Vec<f64>>> for ForecastDictionary {
    fn from(points: Vec<Vec<f64>>) -> Self {
        let mut d = ForecastDictionary::default();
        for p in points {
            d.intern(&p);
        }
        d
    }
}

impl From<ForecastDictionary> for Vec<Vec<f64>> {
    fn from(d: ForecastDictionary) -> Self {
        d.points
    }
}

impl ForecastDictionary {
    pub fn intern(&mut self, q: &[f64]) -> ForecastId {
        if let Some(&id) = self.lookup.get(&key(q)) {
            return id;
        }
        let id = self.points.len() as ForecastId;
        self.points.push(q.to_vec());
        self.lookup.insert(key(q), id);
        id
    }

    pub fn get(&self, id: ForecastId) -> &[f64] {
        &self.points[id as usize]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// Forecasts `q^t` and realized outcomes `y^t` over an outcome set of size
/// `outcomes`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub outcomes: usize,
    pub dictionary: ForecastDictionary,
    /// `(forecast id, outcome)` per step.
    pub steps: Vec<(ForecastId, usize)>,
}

impl ForecastRecord {
    pub fn new(outcomes: usize) -> Self {
        ForecastRecord {
            outcomes,
            ..Default::default()
        }
    }

    pub fn push(&mut self, forecast: &[f64], outcome: usize) {
        let id = self.dictionary.intern(forecast);
        self.steps.push((id, outcome));
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Per-outcome calibration score after the first `t` steps:
/// `sum_q |rho(q, y, t) - q(y)| N(q, t) / t`.
pub fn calibration_score(rec: &ForecastRecord, t: usize) -> Result<Vec<f64>> {
    if t > rec.len() {
        return Err(Error::InvalidParameter(format!(
            "t = {t} exceeds the record length {}",
            rec.len()
        )));
    }
    let s = rec.outcomes;
    if t == 0 {
        return Ok(vec![0.0; s]);
    }
    // hits[id][y] and N(q, t)
    let mut hits = vec![vec![0u64; s]; rec.dictionary.len()];
    let mut count = vec![0u64; rec.dictionary.len()];
    for &(id, y) in &rec.steps[..t] {
        hits[id as usize][y] += 1;
        count[id as usize] += 1;
    }
    let mut score = vec![0.0; s];
    for (id, n) in count.iter().enumerate() {
        if *n == 0 {
            continue;
        }
        let q = rec.dictionary.get(id as ForecastId);
        for y in 0..s {
            // |rho - q(y)| N / t = |hits - q(y) N| / t
            score[y] += (hits[id][y] as f64 - q[y] * *n as f64).abs();
        }
    }
    let tf = t as f64;
    Ok(score.into_iter().map(|v| v / tf).collect())
}
