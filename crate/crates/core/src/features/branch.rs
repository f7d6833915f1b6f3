use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::circuit::{Circuit, Condition};

/// Probability assignment for the conditional blocks of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchModel {
    /// Each constrained bit is an unbiased coin: `2^-k` for a k-bit predicate.
    Uniform,
    /// Syndrome-triggered corrections fire with probability `k·p + m + s`,
    /// one stabilizer weight `k` per conditional.
    QecNoise {
        p: f64,
        m: f64,
        s: f64,
        weights: Vec<usize>,
    },
    /// One probability per conditional, in program order.
    Explicit { probabilities: Vec<f64> },
}

/// First-order probability that a weight-`k` check flags an error.
pub fn qec_branch_probability(k: usize, p: f64, m: f64, s: f64) -> f64 {
    k as f64 * p + m + s
}

impl BranchModel {
    /// Probability of the `index`-th conditional (program order) firing.
    pub fn probability(&self, index: usize, cond: &Condition) -> Result<f64, FeatureError> {
        let p = match self {
            BranchModel::Uniform => 0.5f64.powi(cond.constrained_bits() as i32),
            BranchModel::QecNoise { p, m, s, weights } => {
                let k = *weights
                    .get(index)
                    .ok_or(FeatureError::Uncovered { index })?;
                qec_branch_probability(k, *p, *m, *s)
            }
            BranchModel::Explicit { probabilities } => *probabilities
                .get(index)
                .ok_or(FeatureError::Uncovered { index })?,
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(FeatureError::BadProbability { index, p });
        }
        Ok(p)
    }

    /// Probabilities for every conditional of `c`. Per-conditional models must
    /// list exactly one entry per conditional.
    pub fn probabilities(&self, c: &Circuit) -> Result<Vec<f64>, FeatureError> {
        let n = c.num_conditionals();
        let listed = match self {
            BranchModel::Uniform => None,
            BranchModel::QecNoise { weights, .. } => Some(weights.len()),
            BranchModel::Explicit { probabilities } => Some(probabilities.len()),
        };
        if let Some(len) = listed {
            if len != n {
                return Err(FeatureError::Coverage {
                    conditionals: n,
                    entries: len,
                });
            }
        }
        c.conditionals()
            .enumerate()
            .map(|(i, (cond, _))| self.probability(i, cond))
            .collect()
    }

    pub fn covers(&self, c: &Circuit) -> bool {
        self.probabilities(c).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parity_example;

    #[test]
    fn uniform_weights() {
        assert_eq!(
            BranchModel::Uniform
                .probability(0, &Condition::bit(3))
                .unwrap(),
            0.5
        );
        let three = Condition::equals_str(&[0, 1, 2], "101").unwrap();
        assert_eq!(BranchModel::Uniform.probability(0, &three).unwrap(), 0.125);
        let par = Condition::parity(&[0, 1, 2], true).unwrap();
        assert_eq!(BranchModel::Uniform.probability(0, &par).unwrap(), 0.5);
    }

    #[test]
    fn qec_values() {
        let ibm = qec_branch_probability(4, 1e-3, 5e-3, 1e-4);
        assert!((ibm - 0.0091).abs() < 1e-15);
        let helios = qec_branch_probability(4, 8e-4, 1e-6, 2.5e-5);
        assert!((helios - 0.003226).abs() < 1e-15);
    }

    #[test]
    fn coverage() {
        let c = parity_example();
        assert_eq!(
            BranchModel::Explicit {
                probabilities: vec![0.25]
            }
            .probabilities(&c)
            .unwrap(),
            vec![0.25]
        );
        assert!(BranchModel::Explicit {
            probabilities: vec![]
        }
        .probabilities(&c)
        .is_err());
        assert!(BranchModel::Explicit {
            probabilities: vec![1.5]
        }
        .probabilities(&c)
        .is_err());
        let q = BranchModel::QecNoise {
            p: 1e-3,
            m: 0.0,
            s: 0.0,
            weights: vec![2, 2],
        };
        assert!(!q.covers(&c));
    }
}
