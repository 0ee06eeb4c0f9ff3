use serde::{Deserialize, Serialize};

use super::{calibration_score, ForecastDictionary, ForecastId, ForecastRecord};
use crate::equilibrium::{
    eta, region_membership, tilde_mu, MediatedGame, RandomizedStrategyProfile, RepairPoints,
};
use crate::error::{Error, Result};
use crate::game::EmpiricalCounts;

const SAME_ASSESSMENT: f64 = 1e-12;

/// A pair of signals with equal assessments but different prescribed actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub player: usize,
    pub signal: usize,
    pub other: usize,
    /// Block boundaries `k_l` (occurrence counts of `other`) at which the
    /// repair moved to its next point.
    pub boundaries: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub horizon: u64,
    pub scores: Vec<Vec<f64>>,
    pub max_score: f64,
    /// `|xi^T - eta(psi, sigma)|_inf`
    pub distance: f64,
    /// `|empirical signal law - psi|_inf`
    pub signal_distance: f64,
    pub collisions: Vec<Collision>,
    /// Steps at which a player's action fails the best-reaction inequalities
    /// against the announced assessment, per player.
    pub violations: Vec<u64>,
}

/// Scripts produced by [`construct_calibrated_replay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    /// Signal-profile index per step.
    pub signals: Vec<usize>,
    /// Action-profile index per step.
    pub actions: Vec<usize>,
    /// `assessments[i][t - 1]`
    pub assessments: Vec<Vec<ForecastId>>,
    pub dictionaries: Vec<ForecastDictionary>,
    pub report: ReplayReport,
}

/// Deterministic signal sequence: at each step the profile with the
/// largest deficit `t psi(b) - count(b)`, lowest index on ties.
pub fn quota_schedule(psi: &[f64], horizon: u64) -> Vec<usize> {
    let mut counts = vec![0u64; psi.len()];
    let support: Vec<usize> = (0..psi.len()).filter(|&b| psi[b] > 0.0).collect();
    (1..=horizon)
        .map(|t| {
            let tf = t as f64;
            let mut best = support[0];
            let mut gap = f64::NEG_INFINITY;
            for &b in &support {
                let d = tf * psi[b] - counts[b] as f64;
                if d > gap {
                    gap = d;
                    best = b;
                }
            }
            counts[best] += 1;
            best
        })
        .collect()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Block boundaries `k_1 = 1 < k_2 < ...` over the occurrences of one
/// signal: `k_l` is the smallest integer above `l k_{l-1}` such that for
/// every later cut `k'` the opponents' average over occurrences
/// `k_{l-1} < k < k'` is within `1/l` of `target`.
fn block_boundaries(outcomes: &[usize], dim: usize, target: &[f64], levels: usize) -> Vec<u64> {
    let total = outcomes.len() as u64;
    let mut bounds = vec![1u64];
    for l in 2..=levels as u64 {
        let prev = *bounds.last().expect("k_1");
        // good[c] for cuts c = prev + 1 ..= total + 1
        let mut sums = vec![0u64; dim];
        let mut last_bad = prev + 1;
        let mut n = 0u64;
        for cut in prev + 1..=total + 1 {
            if cut > prev + 1 {
                sums[outcomes[(cut - 2) as usize]] += 1;
                n += 1;
            }
            let close = n > 0
                && (0..dim)
                    .all(|c| (sums[c] as f64 / n as f64 - target[c]).abs() <= 1.0 / l as f64);
            if !close {
                last_bad = cut + 1;
            }
        }
        let k = (l * prev + 1).max(last_bad);
        if k > total {
            break;
        }
        bounds.push(k);
    }
    bounds
}

/// Replays a mediated equilibrium with a pure strategy profile as
/// calibrated play: signals follow a quota schedule for `psi`, each player
/// announces the assessment its signal induces and plays what `sigma`
/// prescribes. Signals whose assessment coincides with that of a lower
/// signal prescribing another action announce the supplied repair points
/// instead, advancing at block boundaries.
pub fn construct_calibrated_replay(
    mg: &MediatedGame,
    sigma: &RandomizedStrategyProfile,
    horizon: u64,
    repair: &[RepairPoints],
    tol: f64,
) -> Result<ReplayOutcome> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let g = mg.base();
    let n = g.players();
    let maps = match sigma.pure_actions() {
        Some(m) => m,
        None => {
            for (i, player) in sigma.sigma.iter().enumerate() {
                for (b, mix) in player.iter().enumerate() {
                    if mix.iter().filter(|&&p| p > 0.0).count() != 1 {
                        return Err(Error::NotPure {
                            player: i,
                            signal: b,
                        });
                    }
                }
            }
            unreachable!("a non-pure profile has a non-pure entry")
        }
    };
    if maps.len() != n || maps.iter().zip(mg.signals()).any(|(m, &s)| m.len() != s) {
        return Err(Error::ShapeMismatch(
            "strategy profile does not match the signal sets".into(),
        ));
    }

    // canonical assessment per supported signal; repair plan for collisions
    let mut assessment: Vec<Vec<Option<Vec<f64>>>> = Vec::with_capacity(n);
    let mut repaired: Vec<Vec<Option<(usize, &RepairPoints)>>> = Vec::with_capacity(n);
    for (i, map) in maps.iter().enumerate() {
        let marginal = mg.psi().marginal(i);
        let mut own: Vec<Option<Vec<f64>>> = vec![None; marginal.len()];
        let mut fix: Vec<Option<(usize, &RepairPoints)>> = vec![None; marginal.len()];
        for b in 0..marginal.len() {
            if marginal[b] <= 0.0 {
                continue;
            }
            let q = tilde_mu(mg, sigma, i, b)?.weights;
            let leader = (0..b).find(|&c| {
                fix[c].is_none()
                    && own[c]
                        .as_ref()
                        .is_some_and(|p| sup(p, &q) <= SAME_ASSESSMENT)
            });
            match leader {
                Some(c) => {
                    own[b] = own[c].clone();
                    if map[c] != map[b] {
                        let r = repair
                            .iter()
                            .find(|r| r.player == i && r.signal == b && !r.points.is_empty())
                            .ok_or(Error::AssessmentCollision {
                                player: i,
                                signal: c,
                                other: b,
                            })?;
                        fix[b] = Some((c, r));
                    }
                }
                None => own[b] = Some(q),
            }
        }
        assessment.push(own);
        repaired.push(fix);
    }

    // repair points must be distributions near the collided assessment and
    // distinct from every other assessment
    for i in 0..n {
        let dim = g.space().opponent_size(i);
        let mut seen: Vec<&[f64]> = assessment[i].iter().flatten().map(Vec::as_slice).collect();
        for (b, fix) in repaired[i].iter().enumerate() {
            let Some((_, r)) = fix else { continue };
            let target = assessment[i][b].as_ref().expect("supported");
            for (l, p) in r.points.iter().enumerate() {
                if p.len() != dim
                    || p.iter().any(|&v| v.is_nan() || v < 0.0)
                    || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
                {
                    return Err(Error::InvalidRepair(format!(
                        "point {l} for player {i} signal {b} is not a distribution over {dim} opponent profiles"
                    )));
                }
                if sup(p, target) >= 1.0 / (l + 1) as f64 {
                    return Err(Error::InvalidRepair(format!(
                        "point {l} for player {i} signal {b} is not within 1/{} of the collided assessment",
                        l + 1
                    )));
                }
                if seen.iter().any(|s| sup(s, p) <= SAME_ASSESSMENT) {
                    return Err(Error::InvalidRepair(format!(
                        "point {l} for player {i} signal {b} repeats another assessment"
                    )));
                }
                seen.push(p);
            }
        }
    }

    let signals = quota_schedule(mg.psi().weights(), horizon);
    let bspace = mg.signal_space();
    let aspace = g.space();
    let actions: Vec<usize> = signals
        .iter()
        .map(|&b| {
            let prof = bspace.profile(b);
            let a: Vec<usize> = (0..n).map(|i| maps[i][prof[i]]).collect();
            aspace.index(&a)
        })
        .collect();

    let mut collisions = Vec::new();
    let mut assessments = vec![Vec::with_capacity(horizon as usize); n];
    let mut dictionaries = vec![ForecastDictionary::default(); n];
    for i in 0..n {
        let dim = aspace.opponent_size(i);
        // for repaired signals: which point each occurrence announces
        let mut plan: Vec<Option<(Vec<u64>, &RepairPoints)>> = vec![None; mg.signals()[i]];
        for (b, fix) in repaired[i].iter().enumerate() {
            let Some((leader, r)) = fix else { continue };
            let outcomes: Vec<usize> = signals
                .iter()
                .zip(&actions)
                .filter(|(&s, _)| bspace.profile(s)[i] == b)
                .map(|(_, &a)| aspace.split(i, a).1)
                .collect();
            let target = assessment[i][b].as_ref().expect("supported");
            let bounds = block_boundaries(&outcomes, dim, target, r.points.len());
            collisions.push(Collision {
                player: i,
                signal: *leader,
                other: b,
                boundaries: bounds.clone(),
            });
            plan[b] = Some((bounds, r));
        }
        let mut seen = vec![0u64; mg.signals()[i]];
        for &s in &signals {
            let b = bspace.profile(s)[i];
            seen[b] += 1;
            let q: &[f64] = match &plan[b] {
                Some((bounds, r)) => {
                    let level = bounds.iter().filter(|&&k| k <= seen[b]).count();
                    &r.points[level.max(1).min(r.points.len()) - 1]
                }
                None => assessment[i][b]
                    .as_ref()
                    .expect("scheduled signals are supported"),
            };
            assessments[i].push(dictionaries[i].intern(q));
        }
    }

    let mut scores = Vec::with_capacity(n);
    let mut violations = vec![0u64; n];
    for i in 0..n {
        let mut rec = ForecastRecord {
            outcomes: aspace.opponent_size(i),
            dictionary: dictionaries[i].clone(),
            steps: Vec::with_capacity(horizon as usize),
        };
        let mut verdicts = std::collections::HashMap::new();
        for (t, &a) in actions.iter().enumerate() {
            let (ai, o) = aspace.split(i, a);
            let id = assessments[i][t];
            rec.steps.push((id, o));
            let ok = *verdicts.entry((id, ai)).or_insert_with(|| {
                let pi = crate::game::OpponentDistribution {
                    player: i,
                    weights: dictionaries[i].get(id).to_vec(),
                };
                (0..g.num_actions(i)).all(|d| region_membership(g, i, ai, d, &pi, tol).member)
            });
            if !ok {
                violations[i] += 1;
            }
        }
        scores.push(calibration_score(&rec, rec.len())?);
    }

    let xi = EmpiricalCounts::from_log(g.dims().to_vec(), &actions)
        .distribution()
        .expect("nonempty");
    let target = eta(mg, sigma)?;
    let signal_law = EmpiricalCounts::from_log(mg.signals().to_vec(), &signals)
        .distribution()
        .expect("nonempty");
    let report = ReplayReport {
        horizon,
        max_score: scores.iter().flatten().fold(0.0, |m, &v| m.max(v)),
        scores,
        distance: xi.sup_distance(&target),
        signal_distance: signal_law.sup_distance(mg.psi()),
        collisions,
        violations,
    };
    Ok(ReplayOutcome {
        signals,
        actions,
        assessments,
        dictionaries,
        report,
    })
}
