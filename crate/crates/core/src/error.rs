use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityDomain(f64),

    #[error("invalid weighting function: {0}")]
    InvalidWeighting(String),

    #[error("invalid value function: {0}")]
    InvalidValue(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("action {action} of player {player} has zero probability")]
    UnsupportedAction { player: usize, action: usize },

    #[error("signal {signal} of player {player} has zero probability")]
    UnsupportedSignal { player: usize, signal: usize },

    #[error("distribution is not of product form (deviation {0:.3e})")]
    NotProduct(f64),

    #[error("grid with resolution {resolution} over {dimension} outcomes has {points} points, above the limit {limit}")]
    GridTooLarge {
        resolution: usize,
        dimension: usize,
        points: u128,
        limit: u128,
    },

    #[error("invalid hull witness for player {player}, action {action}: {reason}")]
    InvalidWitness {
        player: usize,
        action: usize,
        reason: String,
    },

    #[error("strategy profile is not pure: player {player}, signal {signal}")]
    NotPure { player: usize, signal: usize },

    #[error("assessment collision for player {player}: signals {signal} and {other} share an assessment but prescribe different actions")]
    AssessmentCollision {
        player: usize,
        signal: usize,
        other: usize,
    },

    #[error("invalid repair points: {0}")]
    InvalidRepair(String),

    #[error("horizon {0} exceeds the supported limit")]
    HorizonOverflow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}
