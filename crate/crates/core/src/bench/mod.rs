//! Parameterized generators for the benchmark families.
//!
//! Every generator returns the circuit, the branch model used to featurize
//! it and the reference data its fidelity score is computed against.

mod algorithms;
mod clifford;
mod qec;
mod synth;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, Condition};
use crate::counts::Distribution;
use crate::features::BranchModel;

pub(crate) use algorithms::binary_digits;
pub(crate) use clifford::ghz_distribution;
pub use qec::{CodeTables, LogicalState, QecLayout, QecRates};
pub use synth::prepare_stabilizer_state;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("{family} needs {expected}, got {got} qubits")]
    Size {
        family: Family,
        expected: &'static str,
        got: usize,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },
    #[error("unknown benchmark family `{0}`")]
    UnknownFamily(String),
    #[error("stabilizer synthesis failed: {0}")]
    Synthesis(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Ghz,
    GhzReset,
    LrCnot,
    LrCnotSparse,
    CnotLadder,
    Fanout,
    QftM,
    PartialQftM,
    Ipe,
    Tfim,
    RepCode,
    FiveQubitCode,
    SteaneCode,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Ghz,
        Family::GhzReset,
        Family::LrCnot,
        Family::LrCnotSparse,
        Family::CnotLadder,
        Family::Fanout,
        Family::QftM,
        Family::PartialQftM,
        Family::Ipe,
        Family::Tfim,
        Family::RepCode,
        Family::FiveQubitCode,
        Family::SteaneCode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ghz => "GHZ",
            Family::GhzReset => "GHZ_RESET",
            Family::LrCnot => "LR_CNOT",
            Family::LrCnotSparse => "LR_CNOT_SPARSE",
            Family::CnotLadder => "CNOT_LADDER",
            Family::Fanout => "FANOUT",
            Family::QftM => "QFT_M",
            Family::PartialQftM => "PARTIAL_QFT_M",
            Family::Ipe => "IPE",
            Family::Tfim => "TFIM",
            Family::RepCode => "REP_CODE",
            Family::FiveQubitCode => "FIVE_QUBIT_CODE",
            Family::SteaneCode => "STEANE_CODE",
        }
    }

    /// Range of total qubit counts exercised on superconducting hardware.
    pub fn table_range(self) -> (usize, usize) {
        match self {
            Family::Ghz | Family::GhzReset | Family::CnotLadder => (3, 59),
            Family::Fanout | Family::LrCnotSparse => (5, 61),
            Family::LrCnot => (4, 32),
            Family::QftM | Family::PartialQftM => (2, 20),
            Family::Ipe => (2, 2),
            Family::Tfim => (5, 59),
            Family::RepCode => (5, 9),
            Family::FiveQubitCode => (11, 11),
            Family::SteaneCode => (14, 14),
        }
    }

    /// Scored with direct fidelity estimation against a Clifford.
    pub fn is_clifford_gate(self) -> bool {
        matches!(
            self,
            Family::LrCnot | Family::LrCnotSparse | Family::CnotLadder | Family::Fanout
        )
    }

    pub fn is_qec(self) -> bool {
        matches!(
            self,
            Family::RepCode | Family::FiveQubitCode | Family::SteaneCode
        )
    }

    /// Build a spec from a total qubit count plus family parameters. Inputs
    /// left unset in `params` take their defaults; QFT inputs are drawn
    /// from `seed`. Fails for any size or parameter the generator rejects.
    pub fn spec(
        self,
        n_total: usize,
        params: &FamilyParams,
        seed: u64,
    ) -> Result<BenchmarkSpec, BenchError> {
        let odd = |expected| {
            if n_total % 2 == 1 && n_total >= 3 {
                Ok(n_total.div_ceil(2))
            } else {
                Err(BenchError::Size {
                    family: self,
                    expected,
                    got: n_total,
                })
            }
        };
        let exact = |want: usize| {
            if n_total == want {
                Ok(())
            } else {
                Err(BenchError::Size {
                    family: self,
                    expected: match want {
                        2 => "exactly 2",
                        11 => "exactly 11",
                        _ => "exactly 14",
                    },
                    got: n_total,
                })
            }
        };
        let rates = params.rates.unwrap_or_default();
        let spec = match self {
            Family::Ghz => BenchmarkSpec::Ghz {
                n_data: odd("an odd count of at least 3")?,
            },
            Family::GhzReset => BenchmarkSpec::GhzReset { n_total },
            Family::LrCnot => BenchmarkSpec::LrCnot { n_total },
            Family::LrCnotSparse => BenchmarkSpec::LrCnotSparse { n_total },
            Family::CnotLadder => BenchmarkSpec::CnotLadder { n_total },
            Family::Fanout => BenchmarkSpec::Fanout { n_total },
            Family::QftM | Family::PartialQftM => {
                let s = match &params.s {
                    Some(s) => s.clone(),
                    None => qft_inputs(n_total, seed)[0].clone(),
                };
                if self == Family::QftM {
                    BenchmarkSpec::QftM { n: n_total, s }
                } else {
                    BenchmarkSpec::PartialQftM { n: n_total, s }
                }
            }
            Family::Ipe => {
                exact(2)?;
                BenchmarkSpec::Ipe {
                    theta: params.theta.unwrap_or(0.625),
                    m_bits: params.m_bits.unwrap_or(3),
                }
            }
            Family::Tfim => BenchmarkSpec::Tfim {
                n_data: odd("an odd count of at least 3")?,
                steps: params.steps.unwrap_or(2),
                j: params.j.unwrap_or(1.0),
                h: params.h.unwrap_or(1.0),
                dt: params.dt.unwrap_or(0.1),
            },
            Family::RepCode => BenchmarkSpec::RepCode {
                distance: odd("5 or 9")?,
                initial: params.initial.unwrap_or(LogicalState::One),
                rates,
            },
            Family::FiveQubitCode => {
                exact(11)?;
                BenchmarkSpec::FiveQubitCode {
                    initial: params.initial.unwrap_or(LogicalState::Zero),
                    rates,
                }
            }
            Family::SteaneCode => {
                exact(14)?;
                BenchmarkSpec::SteaneCode {
                    initial: params.initial.unwrap_or(LogicalState::One),
                    rates,
                }
            }
        };
        // Generators hold the remaining size and parameter rules.
        spec.generate()?;
        Ok(spec)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Family, BenchError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| BenchError::UnknownFamily(s.to_string()))
    }
}

/// Optional per-family parameters, as they appear in a manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub steps: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub theta: Option<f64>,
    pub m_bits: Option<usize>,
    pub initial: Option<LogicalState>,
    pub s: Option<String>,
    pub rates: Option<QecRates>,
}

/// The three QFT input strings drawn for a seed.
pub fn qft_inputs(n: usize, seed: u64) -> [String; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| {
        (0..n)
            .map(|_| if rng.gen::<bool>() { '1' } else { '0' })
            .collect()
    })
}

/// A fully parameterized benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    rename_all = "SCREAMING_SNAKE_CASE",
    deny_unknown_fields
)]
pub enum BenchmarkSpec {
    Ghz {
        n_data: usize,
    },
    GhzReset {
        n_total: usize,
    },
    LrCnot {
        n_total: usize,
    },
    LrCnotSparse {
        n_total: usize,
    },
    CnotLadder {
        n_total: usize,
    },
    Fanout {
        n_total: usize,
    },
    /// `s` is read left to right as bits 0, 1, ….
    QftM {
        n: usize,
        s: String,
    },
    PartialQftM {
        n: usize,
        s: String,
    },
    Ipe {
        theta: f64,
        m_bits: usize,
    },
    Tfim {
        n_data: usize,
        steps: usize,
        #[serde(rename = "J")]
        j: f64,
        h: f64,
        dt: f64,
    },
    RepCode {
        distance: usize,
        initial: LogicalState,
        #[serde(default)]
        rates: QecRates,
    },
    FiveQubitCode {
        initial: LogicalState,
        #[serde(default)]
        rates: QecRates,
    },
    SteaneCode {
        initial: LogicalState,
        #[serde(default)]
        rates: QecRates,
    },
}

impl BenchmarkSpec {
    pub fn family(&self) -> Family {
        match self {
            BenchmarkSpec::Ghz { .. } => Family::Ghz,
            BenchmarkSpec::GhzReset { .. } => Family::GhzReset,
            BenchmarkSpec::LrCnot { .. } => Family::LrCnot,
            BenchmarkSpec::LrCnotSparse { .. } => Family::LrCnotSparse,
            BenchmarkSpec::CnotLadder { .. } => Family::CnotLadder,
            BenchmarkSpec::Fanout { .. } => Family::Fanout,
            BenchmarkSpec::QftM { .. } => Family::QftM,
            BenchmarkSpec::PartialQftM { .. } => Family::PartialQftM,
            BenchmarkSpec::Ipe { .. } => Family::Ipe,
            BenchmarkSpec::Tfim { .. } => Family::Tfim,
            BenchmarkSpec::RepCode { .. } => Family::RepCode,
            BenchmarkSpec::FiveQubitCode { .. } => Family::FiveQubitCode,
            BenchmarkSpec::SteaneCode { .. } => Family::SteaneCode,
        }
    }

    pub fn total_qubits(&self) -> usize {
        match *self {
            BenchmarkSpec::Ghz { n_data } | BenchmarkSpec::Tfim { n_data, .. } => 2 * n_data - 1,
            BenchmarkSpec::GhzReset { n_total }
            | BenchmarkSpec::LrCnot { n_total }
            | BenchmarkSpec::LrCnotSparse { n_total }
            | BenchmarkSpec::CnotLadder { n_total }
            | BenchmarkSpec::Fanout { n_total } => n_total,
            BenchmarkSpec::QftM { n, .. } | BenchmarkSpec::PartialQftM { n, .. } => n,
            BenchmarkSpec::Ipe { .. } => 2,
            BenchmarkSpec::RepCode { distance, .. } => 2 * distance - 1,
            BenchmarkSpec::FiveQubitCode { .. } => 11,
            BenchmarkSpec::SteaneCode { .. } => 14,
        }
    }

    /// A warning when the size lies outside the family's usual range.
    pub fn advisory(&self) -> Option<String> {
        let (lo, hi) = self.family().table_range();
        let n = self.total_qubits();
        (n < lo || n > hi).then(|| {
            format!(
                "{} with {n} qubits is outside the usual range {lo}-{hi}",
                self.family()
            )
        })
    }

    pub fn generate(&self) -> Result<GeneratedBenchmark, BenchError> {
        let (circuit, branch_model, reference) = match self {
            BenchmarkSpec::Ghz { n_data } => clifford::ghz(*n_data),
            BenchmarkSpec::GhzReset { n_total } => clifford::ghz_reset(*n_total),
            BenchmarkSpec::LrCnot { n_total } => clifford::lr_cnot(*n_total),
            BenchmarkSpec::LrCnotSparse { n_total } => clifford::lr_cnot_sparse(*n_total),
            BenchmarkSpec::CnotLadder { n_total } => clifford::cnot_ladder(*n_total),
            BenchmarkSpec::Fanout { n_total } => clifford::fanout(*n_total),
            BenchmarkSpec::QftM { n, s } => algorithms::qft_m(*n, s, false),
            BenchmarkSpec::PartialQftM { n, s } => algorithms::qft_m(*n, s, true),
            BenchmarkSpec::Ipe { theta, m_bits } => algorithms::ipe(*theta, *m_bits),
            BenchmarkSpec::Tfim {
                n_data,
                steps,
                j,
                h,
                dt,
            } => algorithms::tfim(*n_data, *steps, *j, *h, *dt),
            BenchmarkSpec::RepCode {
                distance,
                initial,
                rates,
            } => qec::rep_code(*distance, *initial, *rates),
            BenchmarkSpec::FiveQubitCode { initial, rates } => {
                qec::five_qubit_code(*initial, *rates)
            }
            BenchmarkSpec::SteaneCode { initial, rates } => qec::steane_code(*initial, *rates),
        }?;
        Ok(GeneratedBenchmark {
            spec: self.clone(),
            circuit,
            branch_model,
            reference,
        })
    }
}

/// Reference data a benchmark's fidelity score is computed against.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealReference {
    /// Exact output distribution over the listed clbits.
    Distribution {
        clbits: Vec<usize>,
        dist: Distribution,
    },
    /// Unitary Clifford on the data qubits. `unitary` acts on data indices;
    /// `data[k]` is the physical qubit for index `k`, read into `clbits[k]`.
    Clifford {
        data: Vec<usize>,
        clbits: Vec<usize>,
        unitary: Circuit,
    },
    /// Ancilla-free Trotter evolution; magnetization is read from `clbits`.
    Tfim {
        n_data: usize,
        steps: usize,
        j: f64,
        h: f64,
        dt: f64,
        clbits: Vec<usize>,
    },
    Qec(QecLayout),
}

impl IdealReference {
    /// Stable text form, hashed into circuit files.
    pub fn canonical(&self) -> String {
        match self {
            IdealReference::Distribution { clbits, dist } => {
                let probs: Vec<String> = dist.iter().map(|(k, p)| format!("{k}:{p:.12}")).collect();
                format!("distribution;clbits={clbits:?};{}", probs.join(","))
            }
            IdealReference::Clifford {
                data,
                clbits,
                unitary,
            } => {
                let ops: Vec<String> = unitary
                    .instructions()
                    .iter()
                    .map(|i| format!("{i:?}"))
                    .collect();
                format!("clifford;data={data:?};clbits={clbits:?};{}", ops.join(","))
            }
            IdealReference::Tfim {
                n_data,
                steps,
                j,
                h,
                dt,
                clbits,
            } => {
                format!("tfim;n={n_data};steps={steps};J={j};h={h};dt={dt};clbits={clbits:?}")
            }
            IdealReference::Qec(layout) => layout.canonical(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBenchmark {
    pub spec: BenchmarkSpec,
    pub circuit: Circuit,
    pub branch_model: BranchModel,
    pub reference: IdealReference,
}

impl GeneratedBenchmark {
    pub fn family(&self) -> Family {
        self.spec.family()
    }
}

/// Condition on one bit, or on the parity of several.
fn odd_parity(clbits: &[usize]) -> Condition {
    match clbits {
        [b] => Condition::bit(*b),
        _ => Condition::parity(clbits, true).expect("nonempty distinct clbits"),
    }
}

/// Controlled phase from two single-qubit phases and two CNOTs.
fn cphase(b: &mut CircuitBuilder, theta: f64, a: usize, t: usize) -> Result<(), CircuitError> {
    b.p(theta / 2.0, a)?
        .p(theta / 2.0, t)?
        .cx(a, t)?
        .p(-theta / 2.0, t)?
        .cx(a, t)?;
    Ok(())
}

type Parts = Result<(Circuit, BranchModel, IdealReference), BenchError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(
                serde_json::to_string(&f).unwrap(),
                format!("\"{}\"", f.name())
            );
        }
        assert!("ghz".parse::<Family>().is_err());
    }

    #[test]
    fn spec_from_sizes() {
        let p = FamilyParams::default();
        assert_eq!(
            Family::Ghz.spec(5, &p, 0).unwrap(),
            BenchmarkSpec::Ghz { n_data: 3 }
        );
        assert!(Family::Ghz.spec(4, &p, 0).is_err());
        assert!(Family::Ipe.spec(3, &p, 0).is_err());
        let BenchmarkSpec::RepCode { distance, .. } = Family::RepCode.spec(9, &p, 0).unwrap()
        else {
            panic!()
        };
        assert_eq!(distance, 5);
        for f in Family::ALL {
            let (lo, _) = f.table_range();
            let spec = f.spec(lo, &p, 1).unwrap();
            assert_eq!(spec.total_qubits(), lo, "{f}");
            assert!(spec.advisory().is_none());
        }
        assert!(Family::Ghz.spec(61, &p, 0).unwrap().advisory().is_some());
    }

    #[test]
    fn spec_json_shape() {
        let s = BenchmarkSpec::Tfim {
            n_data: 3,
            steps: 2,
            j: 1.0,
            h: 1.0,
            dt: 0.1,
        };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"family":"TFIM","n_data":3,"steps":2,"J":1.0,"h":1.0,"dt":0.1}"#
        );
        assert_eq!(serde_json::from_str::<BenchmarkSpec>(&text).unwrap(), s);
    }

    #[test]
    fn qft_inputs_are_seeded() {
        assert_eq!(qft_inputs(6, 3), qft_inputs(6, 3));
        assert!(qft_inputs(6, 3).iter().all(|s| s.len() == 6));
    }
}
