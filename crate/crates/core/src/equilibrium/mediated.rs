use serde::{Deserialize, Serialize};

use super::{
    best_of, check_shape, region_slack, ConditionalHull, EquilibriumCertificate, Verdict, Witness,
};
use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, OpponentDistribution, ProfileSpace};
use crate::SCHEMA_VERSION;

/// A game together with finite signal sets `B_i` and a mediator
/// distribution `psi` over signal profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct MediatedGame {
    base: Game,
    psi: JointDistribution,
}

impl MediatedGame {
    /// Signal set sizes are read from the shape of `psi`.
    pub fn new(base: Game, psi: JointDistribution) -> Result<Self> {
        if psi.shape().len() != base.players() {
            return Err(Error::ShapeMismatch(format!(
                "mediator over {} signal sets for {} players",
                psi.shape().len(),
                base.players()
            )));
        }
        Ok(MediatedGame { base, psi })
    }

    /// Signals are the players' own actions.
    pub fn identity(base: Game, psi: JointDistribution) -> Result<Self> {
        check_shape(&base, psi.shape())?;
        MediatedGame::new(base, psi)
    }

    pub fn base(&self) -> &Game {
        &self.base
    }

    pub fn psi(&self) -> &JointDistribution {
        &self.psi
    }

    pub fn signals(&self) -> &[usize] {
        self.psi.shape()
    }

    pub fn signal_space(&self) -> ProfileSpace {
        self.psi.space()
    }
}

/// `sigma[i][b_i]` is a distribution over `A_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedStrategyProfile {
    pub sigma: Vec<Vec<Vec<f64>>>,
}

impl RandomizedStrategyProfile {
    pub fn new(mut sigma: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for player in sigma.iter_mut() {
            for mix in player.iter_mut() {
                crate::cpt::normalize_probabilities(mix)?;
            }
        }
        Ok(RandomizedStrategyProfile { sigma })
    }

    /// Each player follows `actions[i][b_i]`.
    pub fn pure(actions: &[Vec<usize>], dims: &[usize]) -> Self {
        let sigma = actions
            .iter()
            .zip(dims)
            .map(|(map, &n)| {
                map.iter()
                    .map(|&a| {
                        let mut e = vec![0.0; n];
                        e[a] = 1.0;
                        e
                    })
                    .collect()
            })
            .collect();
        RandomizedStrategyProfile { sigma }
    }

    /// Signals are actions and every player plays the recommended one.
    pub fn obedient(dims: &[usize]) -> Self {
        let maps: Vec<Vec<usize>> = dims.iter().map(|&n| (0..n).collect()).collect();
        Self::pure(&maps, dims)
    }

    /// Every player ignores the signal and plays a fixed mix.
    pub fn constant(mixes: &[Vec<f64>], signals: &[usize]) -> Self {
        RandomizedStrategyProfile {
            sigma: mixes
                .iter()
                .zip(signals)
                .map(|(m, &s)| vec![m.clone(); s])
                .collect(),
        }
    }

    /// Action map per player when every mix is a point mass.
    pub fn pure_actions(&self) -> Option<Vec<Vec<usize>>> {
        self.sigma
            .iter()
            .map(|player| {
                player
                    .iter()
                    .map(|mix| {
                        let support: Vec<usize> =
                            (0..mix.len()).filter(|&a| mix[a] > 0.0).collect();
                        (support.len() == 1).then(|| support[0])
                    })
                    .collect()
            })
            .collect()
    }

    fn check(&self, mg: &MediatedGame) -> Result<()> {
        let g = mg.base();
        if self.sigma.len() != g.players() {
            return Err(Error::ShapeMismatch(format!(
                "strategies for {} players, game has {}",
                self.sigma.len(),
                g.players()
            )));
        }
        for (i, player) in self.sigma.iter().enumerate() {
            if player.len() != mg.signals()[i] {
                return Err(Error::ShapeMismatch(format!(
                    "player {i} has {} signals but {} strategy entries",
                    mg.signals()[i],
                    player.len()
                )));
            }
            if player.iter().any(|mix| mix.len() != g.num_actions(i)) {
                return Err(Error::ShapeMismatch(format!(
                    "player {i} strategy entries must have {} actions",
                    g.num_actions(i)
                )));
            }
        }
        Ok(())
    }
}

/// Adds `weight * prod_k factors[k](a_k)` into `out`, indexed by `space`.
fn spread(out: &mut [f64], space: &ProfileSpace, factors: &[&[f64]], weight: f64) {
    let mut cells = vec![(0usize, weight)];
    for (k, f) in factors.iter().enumerate() {
        let s = space.stride(k);
        cells = cells
            .into_iter()
            .flat_map(|(idx, w)| {
                f.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(move |(a, &p)| (idx + a * s, w * p))
            })
            .collect();
    }
    for (idx, w) in cells {
        out[idx] += w;
    }
}

/// Distribution of play `eta(psi, sigma)` on `A`.
pub fn eta(mg: &MediatedGame, sigma: &RandomizedStrategyProfile) -> Result<JointDistribution> {
    sigma.check(mg)?;
    let g = mg.base();
    let signals = mg.signal_space();
    let mut out = vec![0.0; g.space().size()];
    for (idx, &w) in mg.psi().weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let b = signals.profile(idx);
        let factors: Vec<&[f64]> = b
            .iter()
            .enumerate()
            .map(|(i, &bi)| sigma.sigma[i][bi].as_slice())
            .collect();
        spread(&mut out, g.space(), &factors, w);
    }
    Ok(JointDistribution::from_raw(g.dims().to_vec(), out))
}

/// Law of the opponents' actions given that player `i` received `signal`.
pub fn tilde_mu(
    mg: &MediatedGame,
    sigma: &RandomizedStrategyProfile,
    i: usize,
    signal: usize,
) -> Result<OpponentDistribution> {
    sigma.check(mg)?;
    if signal >= mg.signals()[i] {
        return Err(Error::UnsupportedSignal { player: i, signal });
    }
    let g = mg.base();
    let signals = mg.signal_space();
    let opp_signals = signals.opponents(i);
    let opp_actions = g.space().opponents(i);
    let mut out = vec![0.0; opp_actions.size()];
    let mut mass = 0.0;
    for o in 0..opp_signals.size() {
        let w = mg.psi().weights()[signals.join(i, signal, o)];
        if w <= 0.0 {
            continue;
        }
        mass += w;
        let others: Vec<usize> = (0..g.players()).filter(|&j| j != i).collect();
        let b = opp_signals.profile(o);
        let factors: Vec<&[f64]> = others
            .iter()
            .zip(&b)
            .map(|(&j, &bj)| sigma.sigma[j][bj].as_slice())
            .collect();
        spread(&mut out, &opp_actions, &factors, w);
    }
    if mass <= 0.0 {
        return Err(Error::UnsupportedSignal { player: i, signal });
    }
    out.iter_mut().for_each(|w| *w /= mass);
    Ok(OpponentDistribution {
        player: i,
        weights: out,
    })
}

/// Checks that every action a strategy may play after a positive-probability
/// signal is a best response to the induced opponent law.
pub fn verify_mediated_nash(
    mg: &MediatedGame,
    sigma: &RandomizedStrategyProfile,
    tol: f64,
) -> Result<EquilibriumCertificate> {
    sigma.check(mg)?;
    let g = mg.base();
    let mut worst: Option<(f64, Witness)> = None;
    for i in 0..g.players() {
        let marginal = mg.psi().marginal(i);
        for (b, &p) in marginal.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let pi = tilde_mu(mg, sigma, i, b)?;
            let values = g.action_values(i, &pi.weights);
            let top = best_of(&values);
            for (a, &q) in sigma.sigma[i][b].iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                let m = values[a] - values[top];
                if worst.as_ref().is_none_or(|(w, _)| m < *w) {
                    worst = Some((
                        m,
                        Witness::Signal {
                            player: i,
                            signal: b,
                            action: a,
                            deviation: top,
                        },
                    ));
                }
            }
        }
    }
    let (margin, witness) = worst.unwrap_or((0.0, Witness::None));
    Ok(EquilibriumCertificate::new(
        Verdict::from_margin(margin, tol),
        margin,
        witness,
    ))
}

const WITNESS_TOL: f64 = 1e-6;

fn invalid(player: usize, action: usize, reason: impl Into<String>) -> Error {
    Error::InvalidWitness {
        player,
        action,
        reason: reason.into(),
    }
}

/// Null vector of the `rows x cols` matrix `a` (row-major), if any.
fn null_vector(mut a: Vec<Vec<f64>>, cols: usize) -> Option<Vec<f64>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let p = (r..a.len()).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            continue;
        }
        a.swap(r, p);
        let pv = a[r][c];
        a[r].iter_mut().for_each(|v| *v /= pv);
        let row = a[r].clone();
        for (k, other) in a.iter_mut().enumerate() {
            if k != r && other[c] != 0.0 {
                let f = other[c];
                other.iter_mut().zip(&row).for_each(|(v, rv)| *v -= f * rv);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut x = vec![0.0; cols];
    x[free] = 1.0;
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = -a[row][free];
    }
    Some(x)
}

/// Caratheodory reduction to at most `dim` points with the same mixture.
fn reduce(mut terms: Vec<(f64, Vec<f64>)>, dim: usize) -> Vec<(f64, Vec<f64>)> {
    while terms.len() > dim {
        let a: Vec<Vec<f64>> = (0..dim)
            .map(|c| terms.iter().map(|t| t.1[c]).collect())
            .collect();
        let Some(mut lambda) = null_vector(a, terms.len()) else {
            break;
        };
        if !lambda.iter().any(|&l| l > 1e-12) {
            lambda.iter_mut().for_each(|l| *l = -*l);
        }
        let s = terms
            .iter()
            .zip(&lambda)
            .filter(|(_, &l)| l > 1e-12)
            .map(|(t, &l)| t.0 / l)
            .fold(f64::INFINITY, f64::min);
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(terms.len());
        let mut dropped = false;
        for (t, &l) in terms.into_iter().zip(&lambda) {
            let theta = t.0 - s * l;
            if (!dropped && l > 1e-12 && (t.0 / l - s).abs() <= 1e-15 * s.max(1.0))
                || theta <= 1e-15
            {
                dropped = true;
                continue;
            }
            out.push((theta, t.1));
        }
        terms = out;
    }
    let total: f64 = terms.iter().map(|t| t.0).sum();
    terms.iter_mut().for_each(|t| t.0 /= total);
    terms
}

/// Weighted hull points `(theta, zeta)` behind one recommended action.
type Terms = Vec<(f64, Vec<f64>)>;

/// Builds the signal system `B_i = A_i x M_i`, the mediator and the
/// obedient pure strategies from per-`(i, a_i)` hull witnesses of the
/// conditionals of `mu`. The signal `(a_i, m_i)` has index
/// `a_i * M_i + m_i`.
pub fn construct_mediator(
    g: &Game,
    mu: &JointDistribution,
    witnesses: &[ConditionalHull],
    tol: f64,
) -> Result<(MediatedGame, RandomizedStrategyProfile)> {
    check_shape(g, mu.shape())?;
    let n = g.players();
    let space = g.space();

    // terms[i][a] = (theta, zeta) list; mixes[i][a] = sum theta zeta
    let mut terms: Vec<Vec<Terms>> = Vec::with_capacity(n);
    let mut mixes: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    let mut reproduction = 0.0f64;
    for i in 0..n {
        let dim = space.opponent_size(i);
        let marginal = mu.marginal(i);
        let mut per_action = vec![Vec::new(); g.num_actions(i)];
        let mut per_mix = vec![vec![0.0; dim]; g.num_actions(i)];
        for (a, &p) in marginal.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let w = witnesses
                .iter()
                .find(|w| w.player == i && w.action == a)
                .ok_or_else(|| invalid(i, a, "no witness for a supported action"))?;
            if w.theta.len() != w.points.len() || w.theta.is_empty() {
                return Err(invalid(
                    i,
                    a,
                    "theta and points must be nonempty and of equal length",
                ));
            }
            if w.theta.iter().any(|&t| !t.is_finite() || t < -1e-12) {
                return Err(invalid(i, a, "negative coefficient"));
            }
            if (w.theta.iter().sum::<f64>() - 1.0).abs() > WITNESS_TOL {
                return Err(invalid(i, a, "coefficients do not sum to one"));
            }
            for z in &w.points {
                if z.len() != dim || z.iter().any(|&v| !v.is_finite() || v < 0.0) {
                    return Err(invalid(
                        i,
                        a,
                        "point is not a distribution over opponent profiles",
                    ));
                }
                if (z.iter().sum::<f64>() - 1.0).abs() > WITNESS_TOL {
                    return Err(invalid(i, a, "point does not sum to one"));
                }
            }
            let cond = mu.conditional(i, a)?;
            let kept: Vec<(f64, Vec<f64>)> = w
                .theta
                .iter()
                .zip(&w.points)
                .filter(|(&t, _)| t > 0.0)
                .map(|(&t, z)| (t, z.clone()))
                .collect();
            let kept = reduce(kept, dim);
            let mut mix = vec![0.0; dim];
            for (t, z) in &kept {
                mix.iter_mut().zip(z).for_each(|(m, v)| *m += t * v);
            }
            let err = cond.sup_distance(&mix);
            if err > WITNESS_TOL {
                return Err(invalid(
                    i,
                    a,
                    format!("combination misses the conditional by {err:.3e}"),
                ));
            }
            reproduction = reproduction.max(err);
            per_action[a] = kept;
            per_mix[a] = mix;
        }
        terms.push(per_action);
        mixes.push(per_mix);
    }

    let depth: Vec<usize> = terms
        .iter()
        .map(|t| t.iter().map(Vec::len).max().unwrap_or(0).max(1))
        .collect();
    let signals: Vec<usize> = (0..n).map(|i| g.num_actions(i) * depth[i]).collect();
    let signal_space = ProfileSpace::new(&signals);
    let mut psi = vec![0.0; signal_space.size()];

    for (idx, &w) in mu.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        // per player: list of (m_i, factor theta zeta(a_{-i}) / mix(a_{-i}))
        let mut options: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for i in 0..n {
            let (a, o) = space.split(i, idx);
            let mix = mixes[i][a][o];
            if mix <= 0.0 {
                return Err(invalid(i, a, "combination vanishes on a supported profile"));
            }
            options.push(
                terms[i][a]
                    .iter()
                    .enumerate()
                    .map(|(m, (t, z))| (a * depth[i] + m, t * z[o] / mix))
                    .filter(|&(_, f)| f > 0.0)
                    .collect(),
            );
        }
        let mut cells = vec![(0usize, w)];
        for (i, opts) in options.iter().enumerate() {
            let s = signal_space.stride(i);
            cells = cells
                .into_iter()
                .flat_map(|(b, p)| opts.iter().map(move |&(bi, f)| (b + bi * s, p * f)))
                .collect();
        }
        for (b, p) in cells {
            psi[b] += p;
        }
    }

    let maps: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..signals[i]).map(|b| b / depth[i]).collect())
        .collect();
    let sigma = RandomizedStrategyProfile::pure(&maps, g.dims());
    let mg = MediatedGame::new(g.clone(), JointDistribution::from_raw(signals, psi))?;

    let pushed = eta(&mg, &sigma)?;
    let gap = pushed.sup_distance(mu);
    if gap > 1e-9 {
        return Err(invalid(
            0,
            0,
            format!("mediator reproduces the distribution only to {gap:.3e}"),
        ));
    }
    for i in 0..n {
        let psi_i = mg.psi().marginal(i);
        let mu_i = mu.marginal(i);
        for (a, t) in terms[i].iter().enumerate() {
            for (m, (theta, zeta)) in t.iter().enumerate() {
                let b = a * depth[i] + m;
                if (psi_i[b] - mu_i[a] * theta).abs() > 1e-9 + reproduction {
                    return Err(invalid(
                        i,
                        a,
                        "signal marginal differs from mu_i(a_i) theta",
                    ));
                }
                let induced = tilde_mu(&mg, &sigma, i, b)?;
                let (slack, _) = region_slack(g, i, a, &induced.weights);
                if slack < -tol {
                    return Err(invalid(
                        i,
                        a,
                        format!("point {zeta:?} is outside the best-reaction region"),
                    ));
                }
            }
        }
    }
    Ok((mg, sigma))
}

/// Repair assessments for one colliding signal, used in order at
/// successive block boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairPoints {
    pub player: usize,
    pub signal: usize,
    pub points: Vec<Vec<f64>>,
}

/// On-disk form of a mediated game with a strategy profile:
/// `{schema_version, game, signals, psi, sigma, repair?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediatedGameFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub game: Game,
    pub signals: Vec<usize>,
    pub psi: Vec<f64>,
    pub sigma: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub repair: Vec<RepairPoints>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl MediatedGameFile {
    pub fn from_parts(
        mg: &MediatedGame,
        sigma: &RandomizedStrategyProfile,
        repair: Vec<RepairPoints>,
    ) -> Self {
        MediatedGameFile {
            schema_version: SCHEMA_VERSION,
            game: mg.base().clone(),
            signals: mg.signals().to_vec(),
            psi: mg.psi().weights().to_vec(),
            sigma: sigma.sigma.clone(),
            repair,
        }
    }

    pub fn into_parts(
        self,
    ) -> Result<(MediatedGame, RandomizedStrategyProfile, Vec<RepairPoints>)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidGame(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let psi = JointDistribution::new(self.signals, self.psi)?;
        let mg = MediatedGame::new(self.game, psi)?;
        let sigma = RandomizedStrategyProfile::new(self.sigma)?;
        sigma.check(&mg)?;
        Ok((mg, sigma, self.repair))
    }
}
