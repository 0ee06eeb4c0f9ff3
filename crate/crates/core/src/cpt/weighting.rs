use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability weighting function `w: [0, 1] -> [0, 1]`.
///
/// All kinds satisfy `w(0) = 0`, `w(1) = 1` exactly and are strictly
/// increasing. Tabulated functions are validated when built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightingSpec", into = "WeightingSpec")]
pub enum WeightingFunction {
    Identity,
    /// `w(p) = exp(-(-ln p)^gamma)`.
    Prelec {
        gamma: f64,
    },
    /// Piecewise-linear interpolation through a strictly increasing grid
    /// that always starts at `(0, 0)` and ends at `(1, 1)`.
    Tabulated {
        points: Vec<(f64, f64)>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WeightingSpec {
    Identity,
    Prelec { gamma: f64 },
    Tabulated { points: Vec<(f64, f64)> },
}

impl TryFrom<WeightingSpec> for WeightingFunction {
    type Error = Error;

    fn try_from(spec: WeightingSpec) -> Result<Self> {
        match spec {
            WeightingSpec::Identity => Ok(WeightingFunction::Identity),
            WeightingSpec::Prelec { gamma } => WeightingFunction::prelec(gamma),
            WeightingSpec::Tabulated { points } => WeightingFunction::tabulated(points),
        }
    }
}

impl From<WeightingFunction> for WeightingSpec {
    fn from(w: WeightingFunction) -> Self {
        match w {
            WeightingFunction::Identity => WeightingSpec::Identity,
            WeightingFunction::Prelec { gamma } => WeightingSpec::Prelec { gamma },
            WeightingFunction::Tabulated { points } => WeightingSpec::Tabulated { points },
        }
    }
}

impl WeightingFunction {
    pub fn prelec(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidWeighting(format!(
                "prelec exponent must be positive and finite, got {gamma}"
            )));
        }
        Ok(WeightingFunction::Prelec { gamma })
    }

    /// Builds a tabulated weighting function. Missing endpoints are added;
    /// endpoints that are present must already map `0 -> 0` and `1 -> 1`.
    pub fn tabulated(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points
            .iter()
            .any(|&(p, w)| !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&w))
        {
            return Err(Error::InvalidWeighting(
                "tabulated points must lie in [0, 1] x [0, 1]".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        match points.first() {
            Some(&(p, w)) if p == 0.0 && w != 0.0 => {
                return Err(Error::InvalidWeighting("w(0) must be 0".into()))
            }
            Some(&(0.0, _)) => {}
            _ => points.insert(0, (0.0, 0.0)),
        }
        match points.last() {
            Some(&(p, w)) if p == 1.0 && w != 1.0 => {
                return Err(Error::InvalidWeighting("w(1) must be 1".into()))
            }
            Some(&(1.0, _)) => {}
            _ => points.push((1.0, 1.0)),
        }
        for pair in points.windows(2) {
            if !(pair[1].0 > pair[0].0 && pair[1].1 > pair[0].1) {
                return Err(Error::InvalidWeighting(format!(
                    "grid is not strictly increasing at p = {}",
                    pair[1].0
                )));
            }
        }
        Ok(WeightingFunction::Tabulated { points })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, WeightingFunction::Identity)
            || matches!(self, WeightingFunction::Prelec { gamma } if *gamma == 1.0)
    }

    /// `w(p)`, rejecting probabilities outside `[0, 1]`.
    pub fn evaluate(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityDomain(p));
        }
        Ok(self.eval(p))
    }

    /// `w(p)` with `p` clamped into `[0, 1]`; cumulative sums may overshoot
    /// by an ulp.
    pub(crate) fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p == 0.0 {
            return 0.0;
        }
        if p == 1.0 {
            return 1.0;
        }
        match self {
            WeightingFunction::Identity => p,
            WeightingFunction::Prelec { gamma } => (-(-p.ln()).powf(*gamma)).exp(),
            WeightingFunction::Tabulated { points } => {
                let k = points.partition_point(|&(x, _)| x <= p);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (p - x0) / (x1 - x0)
            }
        }
    }
}
