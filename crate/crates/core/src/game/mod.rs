//! Normal-form games, distributions over action profiles and induced lotteries.

mod distribution;
#[allow(clippy::module_inception)]
mod game;
mod profile;

pub use distribution::{
    empirical_update, product_join, EmpiricalCounts, JointDistribution, OpponentDistribution,
    ProductDistribution,
};
pub use game::{induced_lottery, Game};
pub use profile::ProfileSpace;

/// `mu_i(a_i)`.
pub fn marginal(mu: &JointDistribution, i: usize) -> Vec<f64> {
    mu.marginal(i)
}

/// `mu_{-i}(. | a_i)`.
pub fn conditional(
    mu: &JointDistribution,
    i: usize,
    action: usize,
) -> crate::Result<OpponentDistribution> {
    mu.conditional(i, action)
}
