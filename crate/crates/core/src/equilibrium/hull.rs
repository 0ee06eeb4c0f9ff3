use super::{check_shape, region_slack, ConditionalHull, EquilibriumCertificate, Verdict, Witness};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{Game, JointDistribution, OpponentDistribution};
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Largest simplex grid [`sample_region`] will enumerate.
pub const GRID_POINT_LIMIT: u128 = 2_000_000;

/// Number of compositions of `m` into `parts` nonnegative parts.
pub fn grid_size(m: usize, parts: usize) -> u128 {
    if parts == 0 {
        return 0;
    }
    let (n, k) = ((m + parts - 1) as u128, (parts - 1) as u128);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = match acc.checked_mul(n - j) {
            Some(v) => v / (j + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Grid points of the simplex over the coordinates flagged in `support`,
/// denominator `m`; earlier coordinates vary slowest.
fn grid(m: usize, support: &[bool]) -> Vec<Vec<f64>> {
    let coords: Vec<usize> = (0..support.len()).filter(|&c| support[c]).collect();
    let mut out = Vec::new();
    if coords.is_empty() {
        return out;
    }
    let mut counts = vec![0usize; coords.len()];
    fn rec(
        k: usize,
        left: usize,
        counts: &mut Vec<usize>,
        coords: &[usize],
        m: usize,
        len: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if k + 1 == coords.len() {
            counts[k] = left;
            let mut p = vec![0.0; len];
            for (c, &n) in coords.iter().zip(counts.iter()) {
                p[*c] = n as f64 / m as f64;
            }
            out.push(p);
            return;
        }
        for n in 0..=left {
            counts[k] = n;
            rec(k + 1, left - n, counts, coords, m, len, out);
        }
    }
    rec(0, m, &mut counts, &coords, m, support.len(), &mut out);
    out
}

/// Grid points of `Delta(A_{-i})` with denominator `m` at which `action` is
/// a best reaction within [`DEFAULT_TOL`](super::DEFAULT_TOL).
pub fn sample_region(
    g: &Game,
    i: usize,
    action: usize,
    m: usize,
) -> Result<Vec<OpponentDistribution>> {
    sample_region_with(
        g,
        i,
        action,
        m,
        super::DEFAULT_TOL,
        None,
        Execution::default(),
    )
}

/// [`sample_region`] with an explicit tolerance, an optional coordinate
/// support (points vanish off it) and an execution mode.
pub fn sample_region_with(
    g: &Game,
    i: usize,
    action: usize,
    m: usize,
    tol: f64,
    support: Option<&[bool]>,
    exec: Execution,
) -> Result<Vec<OpponentDistribution>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "grid resolution must be at least 1".into(),
        ));
    }
    let k = g.space().opponent_size(i);
    let full = vec![true; k];
    let support = support.unwrap_or(&full);
    if support.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "support of length {} for {k} opponent profiles",
            support.len()
        )));
    }
    let parts = support.iter().filter(|&&s| s).count();
    let points = grid_size(m, parts);
    if points > GRID_POINT_LIMIT {
        return Err(Error::GridTooLarge {
            resolution: m,
            dimension: parts,
            points,
            limit: GRID_POINT_LIMIT,
        });
    }
    let keep = exec::map(exec, grid(m, support), |p| {
        let (slack, _) = region_slack(g, i, action, &p);
        (slack >= -tol).then_some(p)
    });
    Ok(keep
        .into_iter()
        .flatten()
        .map(|weights| OpponentDistribution { player: i, weights })
        .collect())
}

fn sup_error(target: &[f64], theta: &[f64], points: &[Vec<f64>]) -> f64 {
    (0..target.len())
        .map(|c| {
            let mix: f64 = theta.iter().zip(points).map(|(t, p)| t * p[c]).sum();
            (mix - target[c]).abs()
        })
        .fold(0.0, f64::max)
}

struct Fit {
    theta: Vec<f64>,
    points: Vec<Vec<f64>>,
    distance: f64,
}

/// `argmin_theta |Z theta - target|_inf` over the simplex.
fn nearest(target: &[f64], points: &[Vec<f64>]) -> Vec<f64> {
    let k = points.len();
    let mut lp = LinearProgram::new(k + 1);
    let mut cost = vec![0.0; k + 1];
    cost[k] = 1.0;
    lp.minimize(cost);
    for (c, &t) in target.iter().enumerate() {
        let mut row: Vec<f64> = points.iter().map(|p| p[c]).collect();
        row.push(-1.0);
        lp.constrain(row.clone(), Relation::Le, t);
        row[k] = 1.0;
        lp.constrain(row, Relation::Ge, t);
    }
    let mut ones = vec![1.0; k];
    ones.push(0.0);
    lp.constrain(ones, Relation::Eq, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { mut x, .. } => {
            x.truncate(k);
            x
        }
        _ => {
            let mut t = vec![0.0; k];
            t[0] = 1.0;
            t
        }
    }
}

/// Nearest convex combination in sup norm; among combinations within `tol`,
/// the one with the fewest total support entries.
fn fit(target: &[f64], points: &[Vec<f64>], tol: f64) -> Fit {
    let k = points.len();
    if k == 0 {
        return Fit {
            theta: Vec::new(),
            points: Vec::new(),
            distance: 1.0,
        };
    }
    let mut theta = nearest(target, points);
    let distance = sup_error(target, &theta, points);

    if distance <= tol {
        let delta = (tol * (1.0 - 1e-6)).max(distance);
        let mut lp = LinearProgram::new(k);
        lp.minimize(
            points
                .iter()
                .map(|p| p.iter().filter(|&&v| v > 0.0).count() as f64)
                .collect(),
        );
        for c in 0..target.len() {
            let row: Vec<f64> = points.iter().map(|p| p[c]).collect();
            if target[c] - delta > 0.0 {
                lp.constrain(row.clone(), Relation::Ge, target[c] - delta);
            }
            lp.constrain(row, Relation::Le, target[c] + delta);
        }
        lp.constrain(vec![1.0; k], Relation::Eq, 1.0);
        if let LpOutcome::Optimal { x, .. } = lp.solve() {
            // re-fit on the sparse support to remove the slack the box allowed
            let support: Vec<usize> = (0..k).filter(|&j| x[j] > 1e-12).collect();
            let sub: Vec<Vec<f64>> = support.iter().map(|&j| points[j].clone()).collect();
            let refit = nearest(target, &sub);
            let candidate = if sup_error(target, &refit, &sub) <= sup_error(target, &x, points) {
                let mut full = vec![0.0; k];
                support.iter().zip(&refit).for_each(|(&j, &t)| full[j] = t);
                full
            } else {
                x
            };
            if sup_error(target, &candidate, points) <= tol {
                theta = candidate;
            }
        }
    }

    let kept: Vec<usize> = (0..k).filter(|&j| theta[j] > 1e-12).collect();
    let total: f64 = kept.iter().map(|&j| theta[j]).sum();
    let theta: Vec<f64> = kept.iter().map(|&j| theta[j] / total).collect();
    let points: Vec<Vec<f64>> = kept.iter().map(|&j| points[j].clone()).collect();
    let distance = sup_error(target, &theta, &points);
    Fit {
        theta,
        points,
        distance,
    }
}

/// Whether `target` lies within `tol` (sup norm) of the convex hull of
/// `points`. An empty point list is treated as distance 1.
pub fn hull_membership(
    target: &OpponentDistribution,
    points: &[OpponentDistribution],
    tol: f64,
) -> EquilibriumCertificate {
    let raw: Vec<Vec<f64>> = points.iter().map(|p| p.weights.clone()).collect();
    let f = fit(&target.weights, &raw, tol);
    let verdict = Verdict::from_margin(-f.distance, tol);
    let witness = if f.points.is_empty() {
        Witness::None
    } else {
        Witness::Hull {
            theta: f.theta,
            points: f.points,
        }
    };
    EquilibriumCertificate::new(verdict, tol - f.distance, witness)
}

fn conditional_hull(
    g: &Game,
    mu: &JointDistribution,
    i: usize,
    action: usize,
    m: usize,
    tol: f64,
    exec: Execution,
) -> Result<ConditionalHull> {
    let cond = mu.conditional(i, action)?;
    let (slack, _) = region_slack(g, i, action, &cond.weights);
    if slack >= -tol {
        return Ok(ConditionalHull {
            player: i,
            action,
            theta: vec![1.0],
            points: vec![cond.weights],
            distance: 0.0,
        });
    }
    let support: Vec<bool> = cond.weights.iter().map(|&w| w > 0.0).collect();
    let region = sample_region_with(g, i, action, m, tol, Some(&support), exec)?;
    let raw: Vec<Vec<f64>> = region.into_iter().map(|p| p.weights).collect();
    let f = fit(&cond.weights, &raw, tol);
    Ok(ConditionalHull {
        player: i,
        action,
        theta: f.theta,
        points: f.points,
        distance: f.distance,
    })
}

fn conditional_hulls(
    g: &Game,
    mu: &JointDistribution,
    players: &[usize],
    m: usize,
    tol: f64,
    exec: Execution,
) -> Result<Vec<(f64, ConditionalHull)>> {
    let mut jobs = Vec::new();
    for &i in players {
        for (a, p) in mu.marginal(i).into_iter().enumerate() {
            if p > 0.0 {
                jobs.push((i, a, p));
            }
        }
    }
    exec::map(exec, jobs, |(i, a, p)| {
        conditional_hull(g, mu, i, a, m, tol, Execution::Sequential).map(|h| (p, h))
    })
    .into_iter()
    .collect()
}

/// Grid approximation of membership in the mediated CPT correlated
/// equilibrium set: every supported conditional must lie within `tol` of
/// the convex hull of the sampled best-reaction region of its action.
pub fn check_mediated_eq(
    g: &Game,
    mu: &JointDistribution,
    m: usize,
    tol: f64,
) -> Result<EquilibriumCertificate> {
    check_mediated_eq_with(g, mu, m, tol, Execution::default())
}

pub fn check_mediated_eq_with(
    g: &Game,
    mu: &JointDistribution,
    m: usize,
    tol: f64,
    exec: Execution,
) -> Result<EquilibriumCertificate> {
    check_shape(g, mu.shape())?;
    let players: Vec<usize> = (0..g.players()).collect();
    let hulls = conditional_hulls(g, mu, &players, m, tol, exec)?;
    let worst = hulls.iter().enumerate().fold(0, |w, (k, h)| {
        if h.1.distance > hulls[w].1.distance {
            k
        } else {
            w
        }
    });
    let distance = hulls[worst].1.distance;
    let verdict = Verdict::from_margin(-distance, tol);
    let entries = match verdict {
        Verdict::Member => hulls.into_iter().map(|h| h.1).collect(),
        Verdict::NonMember => vec![hulls[worst].1.clone()],
    };
    let mut cert = EquilibriumCertificate::new(verdict, tol - distance, Witness::Hulls { entries });
    cert.resolution = Some(m);
    Ok(cert)
}

/// `max mu_i(a_i) * d(mu_{-i}(.|a_i), sampled hull)` over the listed
/// players and their supported actions; zero means every conditional is
/// reproduced by the sampled hulls.
pub fn mediated_distance(
    g: &Game,
    mu: &JointDistribution,
    players: &[usize],
    m: usize,
    tol: f64,
) -> Result<f64> {
    check_shape(g, mu.shape())?;
    Ok(
        conditional_hulls(g, mu, players, m, tol, Execution::default())?
            .into_iter()
            .map(|(p, h)| p * h.distance)
            .fold(0.0, f64::max),
    )
}
