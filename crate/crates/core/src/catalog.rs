//! Named games and distributions: the 2x4 game `Gamma*`, its 3-player
//! extension, and seeded random games.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cpt::{CptPreferences, ValueFunction, WeightingFunction};
use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, OpponentDistribution};

/// Row-1 payoff of player 1 in `Gamma*`.
pub const SAFE_PAYOFF: f64 = 1.99;

const COLUMNS: [&str; 4] = ["I", "II", "III", "IV"];

/// `beta = 1 / w(0.5)` for a Prelec weighting with exponent `gamma1`.
pub fn beta(gamma1: f64) -> Result<f64> {
    Ok(1.0 / WeightingFunction::prelec(gamma1)?.evaluate(0.5)?)
}

/// Player-1 payoffs of `Gamma*` by `(row, column)`.
fn row_payoff(beta: f64, row: usize, col: usize) -> f64 {
    if row == 1 {
        return SAFE_PAYOFF;
    }
    match col {
        0 => 2.0 * beta,
        1 => beta + 1.0,
        2 => 0.0,
        _ => 1.0,
    }
}

fn labels(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Player 1 uses Prelec weights with exponent `gamma1`, the column players
/// are expected-utility maximizers; all reference points are 0.
pub fn gamma_star(gamma1: f64) -> Result<Game> {
    let b = beta(gamma1)?;
    let mut payoffs = Vec::with_capacity(8);
    for row in 0..2 {
        for col in 0..4 {
            payoffs.push(vec![
                row_payoff(b, row, col),
                if row == 0 { 1.0 } else { 0.0 },
            ]);
        }
    }
    Game::new(
        vec![labels(&["0", "1"]), labels(&COLUMNS)],
        payoffs,
        vec![
            CptPreferences::prelec(0.0, gamma1)?,
            CptPreferences::prelec(0.0, 1.0)?,
        ],
    )
}

/// Players 2 and 3 both choose a column; everyone gets -1 when they
/// disagree, otherwise the `Gamma*` payoffs with player 3 paid like player 2.
pub fn gamma_star_3p(gamma1: f64) -> Result<Game> {
    let b = beta(gamma1)?;
    let eu = CptPreferences::prelec(0.0, 1.0)?;
    let mut payoffs = Vec::with_capacity(32);
    for row in 0..2 {
        for c2 in 0..4 {
            for c3 in 0..4 {
                payoffs.push(if c2 != c3 {
                    vec![-1.0; 3]
                } else {
                    let col = if row == 0 { 1.0 } else { 0.0 };
                    vec![row_payoff(b, row, c2), col, col]
                });
            }
        }
    }
    Game::new(
        vec![labels(&["0", "1"]), labels(&COLUMNS), labels(&COLUMNS)],
        payoffs,
        vec![CptPreferences::prelec(0.0, gamma1)?, eu.clone(), eu],
    )
}

/// Mass 1/2 on columns I and III.
pub fn mu_odd() -> OpponentDistribution {
    OpponentDistribution {
        player: 0,
        weights: vec![0.5, 0.0, 0.5, 0.0],
    }
}

/// Mass 1/2 on columns II and IV.
pub fn mu_even() -> OpponentDistribution {
    OpponentDistribution {
        player: 0,
        weights: vec![0.0, 0.5, 0.0, 0.5],
    }
}

pub fn mu_unif() -> OpponentDistribution {
    OpponentDistribution {
        player: 0,
        weights: vec![0.25; 4],
    }
}

fn row_zero(cols: [f64; 4]) -> JointDistribution {
    let mut w = cols.to_vec();
    w.extend([0.0; 4]);
    JointDistribution::from_raw(vec![2, 4], w)
}

/// Row 0 carries `mu_odd`.
pub fn mu_o() -> JointDistribution {
    row_zero([0.5, 0.0, 0.5, 0.0])
}

/// Row 0 carries `mu_even`.
pub fn mu_e() -> JointDistribution {
    row_zero([0.0, 0.5, 0.0, 0.5])
}

/// Row 0 carries the uniform distribution.
pub fn mu_star() -> JointDistribution {
    row_zero([0.25; 4])
}

/// 3-player limit: 1/4 on each of `(0, c, c)`.
pub fn mu_star_3p() -> JointDistribution {
    let mut w = vec![0.0; 32];
    for c in 0..4 {
        w[c * 4 + c] = 0.25;
    }
    JointDistribution::from_raw(vec![2, 4, 4], w)
}

/// Player-1 assessment over `(column_2, column_3)` concentrated on the
/// diagonal pairs of the given columns.
pub fn diagonal_assessment(columns: &[usize]) -> OpponentDistribution {
    let mut w = vec![0.0; 16];
    for &c in columns {
        w[c * 4 + c] = 1.0 / columns.len() as f64;
    }
    OpponentDistribution {
        player: 0,
        weights: w,
    }
}

/// How random games draw preferences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreferenceSpec {
    /// Identity value and weights, reference 0.
    #[default]
    ExpectedUtility,
    /// Prelec weights with exponent uniform in `[gamma_min, gamma_max]`,
    /// identity value, reference 0.
    Prelec { gamma_min: f64, gamma_max: f64 },
    /// Prelec weights as above plus a piecewise-power value function with a
    /// reference uniform in `[-0.5, 0.5]`.
    Full { gamma_min: f64, gamma_max: f64 },
}

impl PreferenceSpec {
    pub fn sample(&self, rng: &mut impl Rng) -> Result<CptPreferences> {
        match *self {
            PreferenceSpec::ExpectedUtility => Ok(CptPreferences::expected_utility()),
            PreferenceSpec::Prelec {
                gamma_min,
                gamma_max,
            } => CptPreferences::prelec(0.0, gamma(rng, gamma_min, gamma_max)?),
            PreferenceSpec::Full {
                gamma_min,
                gamma_max,
            } => {
                let g = gamma(rng, gamma_min, gamma_max)?;
                let w = WeightingFunction::prelec(g)?;
                let r = rng.random_range(-0.5..=0.5);
                let value = ValueFunction::piecewise_power(
                    r,
                    rng.random_range(0.5..=1.0),
                    rng.random_range(0.5..=1.0),
                    rng.random_range(1.0..=2.5),
                )?;
                Ok(CptPreferences {
                    value,
                    weight_gain: w.clone(),
                    weight_loss: w,
                })
            }
        }
    }
}

fn gamma(rng: &mut impl Rng, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma range [{lo}, {hi}]")));
    }
    Ok(if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    })
}

/// Game with payoffs i.i.d. uniform on `[-1, 1]`.
pub fn random_game(dims: &[usize], seed: u64, prefs: PreferenceSpec) -> Result<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.len();
    let prefs = (0..n)
        .map(|_| prefs.sample(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let size: usize = dims.iter().product();
    let payoffs: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let actions = dims
        .iter()
        .map(|&d| (0..d).map(|a| a.to_string()).collect())
        .collect();
    Game::new(actions, payoffs, prefs)
}

/// Dirichlet(1) sample over the profiles of `shape`, optionally sparsified so some
/// profiles carry no mass.
pub fn random_distribution(shape: &[usize], rng: &mut impl Rng, sparse: bool) -> JointDistribution {
    let size: usize = shape.iter().product();
    let mut w: Vec<f64> = (0..size)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        })
        .collect();
    if sparse {
        let keep = rng.random_range(1..=size);
        let mut idx: Vec<usize> = (0..size).collect();
        for k in 0..size {
            let j = rng.random_range(k..size);
            idx.swap(k, j);
        }
        for &k in &idx[keep..] {
            w[k] = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    JointDistribution::from_raw(shape.to_vec(), w)
}
