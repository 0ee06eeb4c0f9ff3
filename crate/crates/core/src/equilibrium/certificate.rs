use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
}

impl Verdict {
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin >= -tol {
            Verdict::Member
        } else {
            Verdict::NonMember
        }
    }

    pub fn is_member(self) -> bool {
        self == Verdict::Member
    }
}

/// Convex combination `sum_k theta_k points_k` representing a conditional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalHull {
    pub player: usize,
    pub action: usize,
    pub theta: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Sup-norm distance from the combination to the conditional.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// `(player, recommended action, deviation)`, players and actions 0-based.
    Tuple {
        tuple: [usize; 3],
    },
    /// Deviation after a mediator signal.
    Signal {
        player: usize,
        signal: usize,
        action: usize,
        deviation: usize,
    },
    Hull {
        theta: Vec<f64>,
        points: Vec<Vec<f64>>,
    },
    /// One hull per `(player, supported action)`; on failure only the worst.
    Hulls {
        entries: Vec<ConditionalHull>,
    },
}

/// Outcome of a membership check. `margin` is the slack of the binding
/// inequality: CPT value units for the inequality checks, `tol - distance`
/// for hull checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub verdict: Verdict,
    pub margin: f64,
    pub witness: Witness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl EquilibriumCertificate {
    pub fn new(verdict: Verdict, margin: f64, witness: Witness) -> Self {
        EquilibriumCertificate {
            schema_version: SCHEMA_VERSION,
            verdict,
            margin,
            witness,
            resolution: None,
        }
    }

    pub fn is_member(&self) -> bool {
        self.verdict.is_member()
    }
}
