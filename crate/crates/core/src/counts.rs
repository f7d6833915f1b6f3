//! Outcome histograms and normalized distributions over classical registers.
//!
//! Bit strings index clbits left to right: character `k` is clbit `k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CountsError {
    #[error("distribution is empty")]
    Empty,
    #[error("distribution sums to {0}, not 1")]
    Unnormalized(f64),
    #[error("bit position {index} out of range for {width}-bit outcomes")]
    OutOfRange { index: usize, width: usize },
    #[error("outcome `{0}` has the wrong width")]
    Width(String),
    #[error("negative or non-finite probability for `{0}`")]
    BadProbability(String),
}

/// Raw shot counts for one circuit execution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Counts {
    /// Final classical register contents.
    pub register: BTreeMap<String, u64>,
    /// Per-clbit histories: the sequence of values written to clbit `k`
    /// during a shot, keyed as `c<k>`.
    #[serde(default)]
    pub mcm: BTreeMap<String, BTreeMap<String, u64>>,
    pub shots: u64,
}

impl Counts {
    pub fn distribution(&self) -> Distribution {
        Distribution::from_counts(&self.register)
    }

    pub fn merge(&mut self, other: &Counts) {
        for (k, v) in &other.register {
            *self.register.entry(k.clone()).or_default() += v;
        }
        for (bit, hist) in &other.mcm {
            let dst = self.mcm.entry(bit.clone()).or_default();
            for (k, v) in hist {
                *dst.entry(k.clone()).or_default() += v;
            }
        }
        self.shots += other.shots;
    }
}

/// A normalized probability distribution over fixed-width bit strings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Distribution {
    probs: BTreeMap<String, f64>,
}

impl Distribution {
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Distribution {
        let total: u64 = counts.values().sum();
        let probs = counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(k, &n)| (k.clone(), n as f64 / total as f64))
            .collect();
        Distribution { probs }
    }

    /// Build from explicit probabilities, checking widths, signs and total mass.
    pub fn from_probs<I, S>(items: I) -> Result<Distribution, CountsError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut probs = BTreeMap::new();
        let mut width = None;
        for (k, p) in items {
            let k = k.into();
            if !p.is_finite() || p < 0.0 {
                return Err(CountsError::BadProbability(k));
            }
            if *width.get_or_insert(k.len()) != k.len() {
                return Err(CountsError::Width(k));
            }
            if p > 0.0 {
                *probs.entry(k).or_insert(0.0) += p;
            }
        }
        let d = Distribution { probs };
        d.check_normalized()?;
        Ok(d)
    }

    /// Point mass at one outcome.
    pub fn point(outcome: &str) -> Distribution {
        Distribution {
            probs: BTreeMap::from([(outcome.to_string(), 1.0)]),
        }
    }

    pub fn check_normalized(&self) -> Result<(), CountsError> {
        if self.probs.is_empty() {
            return Err(CountsError::Empty);
        }
        let total: f64 = self.probs.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CountsError::Unnormalized(total));
        }
        Ok(())
    }

    pub fn get(&self, outcome: &str) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &p)| (k.as_str(), p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn width(&self) -> Option<usize> {
        self.probs.keys().next().map(String::len)
    }

    /// Marginal over the listed bit positions, in the listed order.
    pub fn marginal(&self, positions: &[usize]) -> Result<Distribution, CountsError> {
        let width = self.width().unwrap_or(0);
        if let Some(&index) = positions.iter().find(|&&i| i >= width) {
            return Err(CountsError::OutOfRange { index, width });
        }
        let mut probs = BTreeMap::new();
        for (k, &p) in &self.probs {
            let bytes = k.as_bytes();
            let key: String = positions.iter().map(|&i| bytes[i] as char).collect();
            *probs.entry(key).or_insert(0.0) += p;
        }
        Ok(Distribution { probs })
    }

    /// `Σ_terms coef · E[(-1)^{Σ bits at positions}]`.
    pub fn expectation_z(&self, terms: &[(f64, Vec<usize>)]) -> Result<f64, CountsError> {
        let width = self.width().unwrap_or(0);
        let mut total = 0.0;
        for (coef, positions) in terms {
            if let Some(&index) = positions.iter().find(|&&i| i >= width) {
                return Err(CountsError::OutOfRange { index, width });
            }
            let e: f64 = self
                .probs
                .iter()
                .map(|(k, &p)| {
                    let bytes = k.as_bytes();
                    let odd = positions.iter().filter(|&&i| bytes[i] == b'1').count() % 2 == 1;
                    if odd {
                        -p
                    } else {
                        p
                    }
                })
                .sum();
            total += coef * e;
        }
        Ok(total)
    }

    /// Average single-qubit `⟨Z⟩` over the given positions.
    pub fn magnetization(&self, positions: &[usize]) -> Result<f64, CountsError> {
        let w = 1.0 / positions.len() as f64;
        let terms: Vec<(f64, Vec<usize>)> = positions.iter().map(|&q| (w, vec![q])).collect();
        self.expectation_z(&terms)
    }
}
