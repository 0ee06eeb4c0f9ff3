use serde::{Deserialize, Serialize};

use super::{OpponentDistribution, ProfileSpace};
use crate::cpt::{value_of, CptPreferences, Lottery};
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

/// Finite normal-form game with per-player CPT preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDoc", into = "GameDoc")]
pub struct Game {
    actions: Vec<Vec<String>>,
    /// `payoffs[profile][player]`
    payoffs: Vec<Vec<f64>>,
    prefs: Vec<CptPreferences>,
    space: ProfileSpace,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    #[serde(default = "schema_version")]
    schema_version: u32,
    players: usize,
    actions: Vec<Vec<String>>,
    payoffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preferences: Option<Vec<CptPreferences>>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl TryFrom<GameDoc> for Game {
    type Error = Error;
    fn try_from(d: GameDoc) -> Result<Self> {
        if d.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidGame(format!(
                "unsupported schema_version {}",
                d.schema_version
            )));
        }
        if d.actions.len() != d.players {
            return Err(Error::InvalidGame(format!(
                "players = {} but {} action lists",
                d.players,
                d.actions.len()
            )));
        }
        let prefs = d
            .preferences
            .unwrap_or_else(|| vec![CptPreferences::expected_utility(); d.players]);
        Game::new(d.actions, d.payoffs, prefs)
    }
}

impl From<Game> for GameDoc {
    fn from(g: Game) -> Self {
        GameDoc {
            schema_version: SCHEMA_VERSION,
            players: g.players(),
            actions: g.actions,
            payoffs: g.payoffs,
            preferences: Some(g.prefs),
        }
    }
}

impl Game {
    pub fn new(
        actions: Vec<Vec<String>>,
        payoffs: Vec<Vec<f64>>,
        prefs: Vec<CptPreferences>,
    ) -> Result<Self> {
        let n = actions.len();
        if n < 2 {
            return Err(Error::InvalidGame(format!(
                "need at least 2 players, got {n}"
            )));
        }
        if let Some(i) = actions.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGame(format!("player {i} has no actions")));
        }
        if prefs.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} preference entries for {n} players",
                prefs.len()
            )));
        }
        let dims: Vec<usize> = actions.iter().map(Vec::len).collect();
        let space = ProfileSpace::new(&dims);
        if payoffs.len() != space.size() {
            return Err(Error::InvalidGame(format!(
                "expected {} payoff profiles, got {}",
                space.size(),
                payoffs.len()
            )));
        }
        for (k, row) in payoffs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGame(format!(
                    "profile {k} has {} payoffs, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGame(format!(
                    "profile {k} has a non-finite payoff"
                )));
            }
        }
        Ok(Game {
            actions,
            payoffs,
            prefs,
            space,
        })
    }

    /// Builds a game with numbered action labels from a payoff function.
    pub fn from_fn(
        dims: &[usize],
        prefs: Vec<CptPreferences>,
        payoff: impl Fn(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let space = ProfileSpace::new(dims);
        let actions = dims
            .iter()
            .map(|&d| (0..d).map(|a| a.to_string()).collect())
            .collect();
        let payoffs = (0..space.size())
            .map(|k| payoff(&space.profile(k)))
            .collect();
        Game::new(actions, payoffs, prefs)
    }

    /// Same game with every player's preferences replaced.
    pub fn with_preferences(&self, prefs: Vec<CptPreferences>) -> Result<Self> {
        Game::new(self.actions.clone(), self.payoffs.clone(), prefs)
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self, i: usize) -> &[String] {
        &self.actions[i]
    }

    pub fn num_actions(&self, i: usize) -> usize {
        self.actions[i].len()
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn preferences(&self, i: usize) -> &CptPreferences {
        &self.prefs[i]
    }

    pub fn is_expected_utility(&self) -> bool {
        self.prefs.iter().all(CptPreferences::is_expected_utility)
    }

    /// `x_i(a)` for a profile index.
    pub fn payoff(&self, i: usize, profile: usize) -> f64 {
        self.payoffs[profile][i]
    }

    /// `x_i(a_i, a_{-i})`.
    pub fn payoff_against(&self, i: usize, action: usize, opponent: usize) -> f64 {
        self.payoffs[self.space.join(i, action, opponent)][i]
    }

    fn check_opponents(&self, i: usize, pi: &[f64]) -> Result<()> {
        if pi.len() != self.space.opponent_size(i) {
            return Err(Error::ShapeMismatch(format!(
                "player {i} faces {} opponent profiles, distribution has {}",
                self.space.opponent_size(i),
                pi.len()
            )));
        }
        Ok(())
    }

    /// `L_i(pi, a_i)`: one entry per opponent profile.
    pub fn induced_lottery(
        &self,
        i: usize,
        pi: &OpponentDistribution,
        action: usize,
    ) -> Result<Lottery> {
        self.check_opponents(i, &pi.weights)?;
        Ok(Lottery::from_parts(
            &pi.weights,
            (0..pi.weights.len()).map(|o| self.payoff_against(i, action, o)),
        ))
    }

    /// `V_i(L_i(pi, a_i))` without building a [`Lottery`]; `pi` must have
    /// length `|A_{-i}|`.
    pub fn action_value(&self, i: usize, pi: &[f64], action: usize) -> f64 {
        let entries: Vec<(f64, f64)> = pi
            .iter()
            .enumerate()
            .map(|(o, &p)| (p, self.payoff_against(i, action, o)))
            .collect();
        value_of(&entries, &self.prefs[i])
    }

    /// `V_i` of every action against `pi`.
    pub fn action_values(&self, i: usize, pi: &[f64]) -> Vec<f64> {
        (0..self.num_actions(i))
            .map(|a| self.action_value(i, pi, a))
            .collect()
    }
}

/// `L_i(pi, a_i)` for `g`.
pub fn induced_lottery(
    g: &Game,
    i: usize,
    pi: &OpponentDistribution,
    action: usize,
) -> Result<Lottery> {
    g.induced_lottery(i, pi, action)
}
