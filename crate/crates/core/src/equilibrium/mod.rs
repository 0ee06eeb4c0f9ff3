//! Membership checks for CPT correlated, CPT Nash and mediated CPT correlated
//! equilibria, and construction of mediators from hull witnesses.

mod certificate;
mod hull;
mod mediated;

use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, OpponentDistribution, ProductDistribution};

pub use certificate::{ConditionalHull, EquilibriumCertificate, Verdict, Witness};
pub use hull::{
    check_mediated_eq, check_mediated_eq_with, grid_size, hull_membership, mediated_distance,
    sample_region, sample_region_with, GRID_POINT_LIMIT,
};
pub use mediated::{
    construct_mediator, eta, tilde_mu, verify_mediated_nash, MediatedGame, MediatedGameFile,
    RandomizedStrategyProfile, RepairPoints,
};

/// Tolerance for exact-arithmetic-like comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance for hull feasibility.
pub const HULL_TOL: f64 = 1e-6;
/// Grid resolution for region sampling.
pub const DEFAULT_RESOLUTION: usize = 24;

/// Action with the highest CPT value against `pi`; ties go to the lowest index.
pub fn best_reaction(g: &Game, i: usize, pi: &OpponentDistribution) -> usize {
    best_of(&g.action_values(i, &pi.weights))
}

pub(crate) fn best_of(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = a;
        }
    }
    best
}

/// Result of testing one best-reaction inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCheck {
    pub member: bool,
    /// `V(L(pi, a_i)) - V(L(pi, deviation))`.
    pub margin: f64,
}

/// Whether `a_i` is at least as good as `deviation` against `pi`.
pub fn region_membership(
    g: &Game,
    i: usize,
    action: usize,
    deviation: usize,
    pi: &OpponentDistribution,
    tol: f64,
) -> RegionCheck {
    let margin = if action == deviation {
        0.0
    } else {
        g.action_value(i, &pi.weights, action) - g.action_value(i, &pi.weights, deviation)
    };
    RegionCheck {
        member: margin >= -tol,
        margin,
    }
}

/// Smallest slack of `action` over every deviation, with the deviation
/// attaining it (`action` itself when there is only one action).
pub(crate) fn region_slack(g: &Game, i: usize, action: usize, pi: &[f64]) -> (f64, usize) {
    let values = g.action_values(i, pi);
    let mut worst = (f64::INFINITY, action);
    for (d, &v) in values.iter().enumerate() {
        if d != action {
            let m = values[action] - v;
            if m < worst.0 {
                worst = (m, d);
            }
        }
    }
    if worst.0 == f64::INFINITY {
        (0.0, action)
    } else {
        worst
    }
}

pub(crate) fn check_shape(g: &Game, shape: &[usize]) -> Result<()> {
    if g.dims() != shape {
        return Err(Error::ShapeMismatch(format!(
            "game has shape {:?}, distribution has {shape:?}",
            g.dims()
        )));
    }
    Ok(())
}

/// Smallest best-reaction slack of `mu` over all players and supported
/// recommendations, with the tuple attaining it.
pub(crate) fn correlated_margin(g: &Game, mu: &JointDistribution) -> Option<(f64, [usize; 3])> {
    let mut worst: Option<(f64, [usize; 3])> = None;
    for i in 0..g.players() {
        let marginal = mu.marginal(i);
        for (a, &p) in marginal.iter().enumerate() {
            if p <= 0.0 || g.num_actions(i) < 2 {
                continue;
            }
            let cond = mu.conditional(i, a).expect("supported action");
            let (m, d) = region_slack(g, i, a, &cond.weights);
            if worst.is_none_or(|(w, _)| m < w) {
                worst = Some((m, [i, a, d]));
            }
        }
    }
    worst
}

/// Checks the CPT correlated equilibrium inequalities for every player and
/// every recommended action in the support of `mu`.
pub fn check_correlated_eq(
    g: &Game,
    mu: &JointDistribution,
    tol: f64,
) -> Result<EquilibriumCertificate> {
    check_shape(g, mu.shape())?;
    Ok(match correlated_margin(g, mu) {
        None => EquilibriumCertificate::new(Verdict::Member, 0.0, Witness::None),
        Some((margin, tuple)) => EquilibriumCertificate::new(
            Verdict::from_margin(margin, tol),
            margin,
            Witness::Tuple { tuple },
        ),
    })
}

/// Checks that every action in the support of each factor is a best
/// response to the other factors.
pub fn check_nash(g: &Game, mu: &ProductDistribution, tol: f64) -> Result<EquilibriumCertificate> {
    check_shape(g, &mu.shape())?;
    let mut worst: Option<(f64, [usize; 3])> = None;
    for i in 0..g.players() {
        let pi = mu.opponents(i);
        let values = g.action_values(i, &pi.weights);
        let top = best_of(&values);
        for (a, &p) in mu.factors[i].iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let m = values[a] - values[top];
            if worst.is_none_or(|(w, _)| m < w) {
                worst = Some((m, [i, a, top]));
            }
        }
    }
    let (margin, tuple) = worst.expect("every factor has support");
    Ok(EquilibriumCertificate::new(
        Verdict::from_margin(margin, tol),
        margin,
        Witness::Tuple { tuple },
    ))
}

/// [`check_nash`] for a joint distribution, which must factor into its
/// marginals within `1e-9`.
pub fn check_nash_joint(
    g: &Game,
    mu: &JointDistribution,
    tol: f64,
) -> Result<EquilibriumCertificate> {
    check_shape(g, mu.shape())?;
    check_nash(g, &mu.as_product(DEFAULT_TOL)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, gamma_star};
    use crate::cpt::CptPreferences;

    #[test]
    fn gamma_star_best_reactions() {
        let g = gamma_star(0.5).unwrap();
        assert_eq!(best_reaction(&g, 0, &catalog::mu_odd()), 0);
        assert_eq!(best_reaction(&g, 0, &catalog::mu_even()), 0);
        assert_eq!(best_reaction(&g, 0, &catalog::mu_unif()), 1);
    }

    #[test]
    fn eut_point_mass_best_reply() {
        let g = Game::from_fn(&[3, 2], vec![CptPreferences::expected_utility(); 2], |a| {
            vec![[0.1, 0.9, 0.4][a[0]] * (a[1] as f64 + 1.0), 0.0]
        })
        .unwrap();
        let pi = OpponentDistribution::point_mass(0, 2, 1);
        assert_eq!(best_reaction(&g, 0, &pi), 1);
    }

    #[test]
    fn region_examples() {
        let g = gamma_star(0.5).unwrap();
        let r = region_membership(&g, 0, 0, 1, &catalog::mu_odd(), DEFAULT_TOL);
        assert!(r.member && (r.margin - 0.01).abs() < 2e-3);
        let r = region_membership(&g, 0, 0, 1, &catalog::mu_unif(), DEFAULT_TOL);
        assert!(!r.member && (r.margin + 0.005).abs() < 2e-3);
        let r = region_membership(&g, 0, 1, 1, &catalog::mu_unif(), DEFAULT_TOL);
        assert!(r.member && r.margin == 0.0);
    }

    #[test]
    fn correlated_examples() {
        let g = gamma_star(0.5).unwrap();
        assert!(check_correlated_eq(&g, &catalog::mu_o(), DEFAULT_TOL)
            .unwrap()
            .is_member());
        assert!(check_correlated_eq(&g, &catalog::mu_e(), DEFAULT_TOL)
            .unwrap()
            .is_member());
        let c = check_correlated_eq(&g, &catalog::mu_star(), DEFAULT_TOL).unwrap();
        assert_eq!(c.verdict, Verdict::NonMember);
        assert_eq!(c.witness, Witness::Tuple { tuple: [0, 0, 1] });
        assert!((c.margin + 0.005).abs() < 3e-3);
    }

    #[test]
    fn pure_nash_point_mass_is_correlated() {
        // prisoner's dilemma: (defect, defect) is the unique Nash profile
        let g = Game::from_fn(
            &[2, 2],
            vec![CptPreferences::prelec(0.0, 0.6).unwrap(); 2],
            |a| {
                let pay = [[3.0, 0.0], [5.0, 1.0]];
                vec![pay[a[0]][a[1]], pay[a[1]][a[0]]]
            },
        )
        .unwrap();
        let dd = JointDistribution::point_mass(vec![2, 2], 3);
        assert!(check_correlated_eq(&g, &dd, DEFAULT_TOL)
            .unwrap()
            .is_member());
        assert!(check_nash_joint(&g, &dd, DEFAULT_TOL).unwrap().is_member());
        let cc = JointDistribution::point_mass(vec![2, 2], 0);
        assert!(!check_nash_joint(&g, &cc, DEFAULT_TOL).unwrap().is_member());
    }

    #[test]
    fn nash_examples() {
        let g = gamma_star(0.5).unwrap();
        let safe = ProductDistribution::new(vec![vec![0.0, 1.0], vec![0.25; 4]]).unwrap();
        assert!(check_nash(&g, &safe, DEFAULT_TOL).unwrap().is_member());
        let risky = ProductDistribution::new(vec![vec![1.0, 0.0], vec![0.25; 4]]).unwrap();
        let c = check_nash(&g, &risky, DEFAULT_TOL).unwrap();
        assert_eq!(c.witness, Witness::Tuple { tuple: [0, 0, 1] });
        assert!(!c.is_member());
        let diag = JointDistribution::new(vec![2, 4], vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0])
            .unwrap();
        assert!(matches!(
            check_nash_joint(&g, &diag, DEFAULT_TOL),
            Err(Error::NotProduct(_))
        ));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = gamma_star(0.5).unwrap();
        let mu = JointDistribution::uniform(vec![2, 2]);
        assert!(matches!(
            check_correlated_eq(&g, &mu, DEFAULT_TOL),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn certificate_json_layout() {
        let g = gamma_star(0.5).unwrap();
        let c = check_correlated_eq(&g, &catalog::mu_star(), DEFAULT_TOL).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["verdict"], "non_member");
        assert_eq!(v["witness"]["kind"], "tuple");
        assert_eq!(v["witness"]["tuple"], serde_json::json!([0, 0, 1]));
        assert_eq!(v["schema_version"], 1);
    }
}
