use serde::{Deserialize, Serialize};

use super::ProfileSpace;
use crate::cpt::normalize_probabilities;
use crate::error::{Error, Result};

/// Probability vector over action profiles, stored row-major with its shape.
///
/// Serialized as `{"shape": [..], "weights": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc", into = "DistributionDoc")]
pub struct JointDistribution {
    shape: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    shape: Vec<usize>,
    weights: Vec<f64>,
}

impl TryFrom<DistributionDoc> for JointDistribution {
    type Error = Error;
    fn try_from(d: DistributionDoc) -> Result<Self> {
        JointDistribution::new(d.shape, d.weights)
    }
}

impl From<JointDistribution> for DistributionDoc {
    fn from(d: JointDistribution) -> Self {
        DistributionDoc {
            shape: d.shape,
            weights: d.weights,
        }
    }
}

impl JointDistribution {
    pub fn new(shape: Vec<usize>, mut weights: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!("invalid shape {shape:?}")));
        }
        let size: usize = shape.iter().product();
        if weights.len() != size {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {size} weights, got {}",
                weights.len()
            )));
        }
        normalize_probabilities(&mut weights)?;
        Ok(JointDistribution { shape, weights })
    }

    pub fn point_mass(shape: Vec<usize>, index: usize) -> Self {
        let mut weights = vec![0.0; shape.iter().product()];
        weights[index] = 1.0;
        JointDistribution { shape, weights }
    }

    pub fn uniform(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        JointDistribution {
            shape,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub(crate) fn from_raw(shape: Vec<usize>, weights: Vec<f64>) -> Self {
        JointDistribution { shape, weights }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn space(&self) -> ProfileSpace {
        ProfileSpace::new(&self.shape)
    }

    /// `mu_i(a_i) = sum over a_{-i} of mu(a_i, a_{-i})`.
    pub fn marginal(&self, i: usize) -> Vec<f64> {
        let space = self.space();
        let mut out = vec![0.0; self.shape[i]];
        for (idx, &w) in self.weights.iter().enumerate() {
            out[space.action(i, idx)] += w;
        }
        out
    }

    /// Conditional distribution of the opponents of `i` given `a_i`.
    pub fn conditional(&self, i: usize, action: usize) -> Result<OpponentDistribution> {
        let space = self.space();
        let mut out = vec![0.0; space.opponent_size(i)];
        let mut mass = 0.0;
        for (o, slot) in out.iter_mut().enumerate() {
            let w = self.weights[space.join(i, action, o)];
            *slot = w;
            mass += w;
        }
        if mass <= 0.0 {
            return Err(Error::UnsupportedAction { player: i, action });
        }
        out.iter_mut().for_each(|w| *w /= mass);
        Ok(OpponentDistribution {
            player: i,
            weights: out,
        })
    }

    /// Sup-norm distance to another distribution of the same shape.
    pub fn sup_distance(&self, other: &JointDistribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Factors into marginals when the distribution is of product form
    /// within `tol` (sup norm).
    pub fn as_product(&self, tol: f64) -> Result<ProductDistribution> {
        let factors: Vec<Vec<f64>> = (0..self.shape.len()).map(|i| self.marginal(i)).collect();
        let product = ProductDistribution {
            factors: factors.clone(),
        };
        let joined = product_join(&product);
        let dev = self.sup_distance(&joined);
        if dev > tol {
            return Err(Error::NotProduct(dev));
        }
        Ok(product)
    }
}

/// Distribution over `A_{-i}` for a designated player `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentDistribution {
    pub player: usize,
    pub weights: Vec<f64>,
}

impl OpponentDistribution {
    pub fn new(player: usize, mut weights: Vec<f64>) -> Result<Self> {
        normalize_probabilities(&mut weights)?;
        Ok(OpponentDistribution { player, weights })
    }

    pub fn point_mass(player: usize, size: usize, index: usize) -> Self {
        let mut weights = vec![0.0; size];
        weights[index] = 1.0;
        OpponentDistribution { player, weights }
    }

    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Independent mixed strategies, one per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    pub factors: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(mut factors: Vec<Vec<f64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDistribution("no factors".into()));
        }
        for f in factors.iter_mut() {
            normalize_probabilities(f)?;
        }
        Ok(ProductDistribution { factors })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    /// Law of the opponents of `i`: `prod_{j != i} mu_j(a_j)`.
    pub fn opponents(&self, i: usize) -> OpponentDistribution {
        let rest: Vec<Vec<f64>> = self
            .factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| f.clone())
            .collect();
        let weights = if rest.is_empty() {
            vec![1.0]
        } else {
            product_join(&ProductDistribution { factors: rest }).weights
        };
        OpponentDistribution { player: i, weights }
    }
}

/// Entry-wise product of the factors.
pub fn product_join(factors: &ProductDistribution) -> JointDistribution {
    let shape = factors.shape();
    let space = ProfileSpace::new(&shape);
    let weights = (0..space.size())
        .map(|idx| {
            let prof = space.profile(idx);
            prof.iter()
                .zip(&factors.factors)
                .map(|(&a, f)| f[a])
                .product()
        })
        .collect();
    JointDistribution { shape, weights }
}

/// `xi^t = ((t - 1) xi^{t-1} + e_{a^t}) / t`; `previous` is ignored at
/// `t = 1` (the zero vector by convention).
pub fn empirical_update(previous: &JointDistribution, profile: usize, t: u64) -> JointDistribution {
    assert!(t >= 1, "empirical updates start at t = 1");
    let tf = t as f64;
    let mut weights: Vec<f64> = if t == 1 {
        vec![0.0; previous.weights.len()]
    } else {
        previous
            .weights
            .iter()
            .map(|w| w * (tf - 1.0) / tf)
            .collect()
    };
    weights[profile] += 1.0 / tf;
    JointDistribution {
        shape: previous.shape.clone(),
        weights,
    }
}

/// Exact action-profile counts; `xi^t` is `counts / t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    shape: Vec<usize>,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalCounts {
    pub fn new(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        EmpiricalCounts {
            shape,
            counts: vec![0; n],
            total: 0,
        }
    }

    pub fn from_log(shape: Vec<usize>, log: &[usize]) -> Self {
        let mut c = EmpiricalCounts::new(shape);
        log.iter().for_each(|&p| c.record(p));
        c
    }

    pub fn record(&mut self, profile: usize) {
        self.counts[profile] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Empirical distribution; `None` before the first step.
    pub fn distribution(&self) -> Option<JointDistribution> {
        if self.total == 0 {
            return None;
        }
        let t = self.total as f64;
        Some(JointDistribution {
            shape: self.shape.clone(),
            weights: self.counts.iter().map(|&c| c as f64 / t).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu_star() -> JointDistribution {
        JointDistribution::new(vec![2, 4], vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0])
            .unwrap()
    }

    fn mu_o() -> JointDistribution {
        JointDistribution::new(vec![2, 4], vec![0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(mu_star().marginal(0), vec![1.0, 0.0]);
        let f = ProductDistribution::new(vec![vec![0.3, 0.7], vec![0.1, 0.5, 0.4]]).unwrap();
        let m = product_join(&f).marginal(1);
        for (a, b) in m.iter().zip(&f.factors[1]) {
            assert!((a - b).abs() < 1e-12);
        }
        let p = JointDistribution::point_mass(vec![2, 3], 5);
        assert_eq!(p.marginal(0), vec![0.0, 1.0]);
        assert_eq!(p.marginal(1), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn conditional_examples() {
        assert_eq!(
            mu_o().conditional(0, 0).unwrap().weights,
            vec![0.5, 0.0, 0.5, 0.0]
        );
        assert_eq!(mu_star().conditional(0, 0).unwrap().weights, vec![0.25; 4]);
        assert_eq!(
            mu_o().conditional(0, 1),
            Err(Error::UnsupportedAction {
                player: 0,
                action: 1
            })
        );
        assert_eq!(mu_o().conditional(1, 0).unwrap().weights, vec![1.0, 0.0]);
    }

    #[test]
    fn product_join_arithmetic() {
        let f = ProductDistribution::new(vec![vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let j = product_join(&f);
        let expected = [0.12, 0.18, 0.28, 0.42];
        for (a, b) in j.weights().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let u = product_join(&ProductDistribution::new(vec![vec![0.5; 2], vec![0.25; 4]]).unwrap());
        assert_eq!(
            u.weights(),
            JointDistribution::uniform(vec![2, 4]).weights()
        );
    }

    #[test]
    fn product_factoring() {
        assert!(mu_star().as_product(1e-9).is_ok());
        assert!(mu_o().as_product(1e-9).is_ok());
        let diagonal = JointDistribution::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            diagonal.as_product(1e-9),
            Err(Error::NotProduct(_))
        ));
    }

    #[test]
    fn empirical_update_examples() {
        let zero = JointDistribution::uniform(vec![2, 2]);
        let one = empirical_update(&zero, 3, 1);
        assert_eq!(one.weights(), &[0.0, 0.0, 0.0, 1.0]);
        let mut xi = one;
        for t in 2..=10u64 {
            xi = empirical_update(&xi, if t % 2 == 0 { 0 } else { 3 }, t);
        }
        assert!((xi.weights()[0] - 0.5).abs() < 1e-12);
        assert!((xi.weights()[3] - 0.5).abs() < 1e-12);
        // cyclic play I..IV with row 0
        let mut xi = JointDistribution::uniform(vec![2, 4]);
        for t in 1..=400u64 {
            xi = empirical_update(&xi, ((t - 1) % 4) as usize, t);
        }
        assert!(xi.sup_distance(&mu_star()) < 1e-12);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(JointDistribution::new(vec![2, 2], vec![0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(JointDistribution::new(vec![2, 2], vec![1.0, 0.0]).is_err());
        let parsed: std::result::Result<JointDistribution, _> =
            serde_json::from_str(r#"{"shape":[2,2],"weights":[0.25,0.25,0.25,0.25]}"#);
        assert!(parsed.is_ok());
    }
}
