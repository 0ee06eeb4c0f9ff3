use crate::game::{EmpiricalCounts, Game, JointDistribution};

/// `K_i(a, a~) = xi_i(a) [V(xi(.|a), x_i(a~, .)) - V(xi(.|a), x_i(a, .))]`;
/// rows of actions with `xi_i(a) = 0` and the diagonal are zero.
pub fn regret_matrix(g: &Game, i: usize, xi: &JointDistribution) -> Vec<Vec<f64>> {
    let n = g.num_actions(i);
    let marginal = xi.marginal(i);
    let mut k = vec![vec![0.0; n]; n];
    for (a, row) in k.iter_mut().enumerate() {
        if marginal[a] <= 0.0 {
            continue;
        }
        let cond = xi.conditional(i, a).expect("supported action");
        let values = g.action_values(i, &cond.weights);
        for (d, slot) in row.iter_mut().enumerate() {
            if d != a {
                *slot = marginal[a] * (values[d] - values[a]);
            }
        }
    }
    k
}

/// [`regret_matrix`] at step `t` of an action-profile log.
pub fn regret_from_log(g: &Game, i: usize, log: &[usize], t: usize) -> Vec<Vec<f64>> {
    let counts = EmpiricalCounts::from_log(g.dims().to_vec(), &log[..t]);
    match counts.distribution() {
        Some(xi) => regret_matrix(g, i, &xi),
        None => vec![vec![0.0; g.num_actions(i)]; g.num_actions(i)],
    }
}

/// Expected-utility regret as a running average:
/// `(1/t) sum_{tau <= t, a_i^tau = a} [x_i(a~, a_{-i}^tau) - x_i(a^tau)]`.
pub fn eut_regret_direct(g: &Game, i: usize, log: &[usize], t: usize) -> Vec<Vec<f64>> {
    let n = g.num_actions(i);
    let mut k = vec![vec![0.0; n]; n];
    for &profile in &log[..t] {
        let (a, o) = g.space().split(i, profile);
        let realized = g.payoff(i, profile);
        for (d, slot) in k[a].iter_mut().enumerate() {
            if d != a {
                *slot += g.payoff_against(i, d, o) - realized;
            }
        }
    }
    let tf = t as f64;
    k.iter_mut().flatten().for_each(|v| *v /= tf);
    k
}

/// Largest entry of a regret matrix (0 for an empty matrix).
pub fn max_regret(k: &[Vec<f64>]) -> f64 {
    k.iter().flatten().fold(0.0, |m, &v| m.max(v))
}
