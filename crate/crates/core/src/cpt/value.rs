use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the value function around the reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueShape {
    /// `v(x) = x - r`.
    Identity,
    /// `(x - r)^alpha` on gains, `-lambda (r - x)^beta` on losses.
    PiecewisePower { alpha: f64, beta: f64, lambda: f64 },
}

/// Reference-dependent value function `v^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub reference: f64,
    pub shape: ValueShape,
}

impl ValueFunction {
    pub fn identity(reference: f64) -> Self {
        ValueFunction {
            reference,
            shape: ValueShape::Identity,
        }
    }

    pub fn piecewise_power(reference: f64, alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let v = ValueFunction {
            reference,
            shape: ValueShape::PiecewisePower {
                alpha,
                beta,
                lambda,
            },
        };
        v.validate()?;
        Ok(v)
    }

    /// Checks parameter ranges, `v(r) = 0`, and monotonicity on a sampled
    /// grid around the reference point. Curvature is not checked.
    pub fn validate(&self) -> Result<()> {
        if !self.reference.is_finite() {
            return Err(Error::InvalidValue("reference must be finite".into()));
        }
        if let ValueShape::PiecewisePower {
            alpha,
            beta,
            lambda,
        } = self.shape
        {
            if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::InvalidValue(format!(
                    "exponents must lie in (0, 1], got alpha = {alpha}, beta = {beta}"
                )));
            }
            if !(lambda >= 1.0 && lambda.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "loss aversion must be at least 1, got {lambda}"
                )));
            }
        }
        if self.eval(self.reference) != 0.0 {
            return Err(Error::InvalidValue("v(r) must be 0".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for k in -200..=200 {
            let x = self.reference + f64::from(k) * 0.05;
            let y = self.eval(x);
            if y <= prev {
                return Err(Error::InvalidValue(format!(
                    "not strictly increasing near x = {x}"
                )));
            }
            prev = y;
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.reference;
        match self.shape {
            ValueShape::Identity => d,
            ValueShape::PiecewisePower {
                alpha,
                beta,
                lambda,
            } => {
                if d >= 0.0 {
                    d.powf(alpha)
                } else {
                    -lambda * (-d).powf(beta)
                }
            }
        }
    }
}
