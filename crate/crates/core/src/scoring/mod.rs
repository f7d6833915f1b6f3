//! Fidelity scores in `[0, 1]` for every benchmark family.
//!
//! Scoring is split in two: [`experiments`] lists the circuits a benchmark
//! needs executed (one for most families, three QFT inputs, or `k` Pauli
//! samples for direct fidelity estimation), and [`score_from_counts`] turns
//! their counts into a [`ScoreResult`]. [`evaluate`] does both with the
//! built-in simulator.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    qft_inputs, BenchError, BenchmarkSpec, Family, FamilyParams, GeneratedBenchmark,
    IdealReference, QecLayout,
};
use crate::circuit::{
    parse_bits, strip_final_measurements, Circuit, CircuitBuilder, CircuitError, Instruction,
};
use crate::counts::{Counts, CountsError, Distribution};
use crate::sim::{
    self, basis_change_to_z, prepare_pauli_eigenstate, propagate_pauli, NoiseModel, PauliString,
    SimError,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error(transparent)]
    Counts(#[from] CountsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("outcome `{outcome}` does not have {expected} bits")]
    Width { outcome: String, expected: usize },
    #[error("ideal magnetization is zero; choose a different size, step count or dt")]
    ZeroMagnetization,
    #[error("{0} is not scored by direct fidelity estimation")]
    NotClifford(Family),
    #[error("malformed counts: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub score: f64,
    pub family: String,
    /// Per-experiment values, plus the syndrome histogram for QEC.
    pub details: BTreeMap<String, f64>,
}

/// Direct fidelity estimation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfeConfig {
    /// Number of sampled Pauli strings.
    pub k: usize,
    /// Shots per sampled Pauli.
    pub shots: u64,
}

impl Default for DfeConfig {
    fn default() -> Self {
        DfeConfig { k: 30, shots: 4096 }
    }
}

/// How an experiment's counts become a number in `[0, 1]` (or `[-1, 1]`
/// for a Pauli expectation).
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    Hellinger {
        clbits: Vec<usize>,
        ideal: Distribution,
    },
    /// `±(-1)^{parity}` averaged over shots; an empty list reads `±1`.
    Parity {
        clbits: Vec<usize>,
        negative: bool,
    },
    Magnetization {
        clbits: Vec<usize>,
        ideal: f64,
    },
    Qec(Box<QecLayout>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub label: String,
    pub circuit: Circuit,
    pub shots: u64,
    pub readout: Readout,
}

impl Experiment {
    pub fn value(&self, counts: &Counts) -> Result<f64, ScoreError> {
        let width = self.circuit.num_clbits();
        if let Some(bad) = counts.register.keys().find(|k| k.len() != width) {
            return Err(ScoreError::Width {
                outcome: bad.clone(),
                expected: width,
            });
        }
        if counts.register.values().sum::<u64>() == 0 {
            return Err(ScoreError::Malformed(format!(
                "no shots for `{}`",
                self.label
            )));
        }
        let dist = counts.distribution();
        Ok(match &self.readout {
            Readout::Hellinger { clbits, ideal } => {
                hellinger_fidelity(&dist.marginal(clbits)?, ideal)?
            }
            Readout::Parity { clbits, negative } => {
                let sign = if *negative { -1.0 } else { 1.0 };
                dist.expectation_z(&[(sign, clbits.clone())])?
            }
            Readout::Magnetization { clbits, ideal } => {
                tfim_score(dist.magnetization(clbits)?, *ideal)?.score
            }
            Readout::Qec(layout) => qec_fraction(&counts.register, layout)?,
        })
    }
}

/// `(Σ_x √(p_x q_x))²`.
pub fn hellinger_fidelity(p: &Distribution, q: &Distribution) -> Result<f64, ScoreError> {
    p.check_normalized()?;
    q.check_normalized()?;
    let overlap: f64 = p.iter().map(|(k, pk)| (pk * q.get(k)).sqrt()).sum();
    Ok((overlap * overlap).min(1.0))
}

fn checked_distribution(
    counts: &BTreeMap<String, u64>,
    n: usize,
) -> Result<Distribution, ScoreError> {
    if let Some(bad) = counts.keys().find(|k| k.len() != n) {
        return Err(ScoreError::Width {
            outcome: bad.clone(),
            expected: n,
        });
    }
    let d = Distribution::from_counts(counts);
    d.check_normalized()?;
    Ok(d)
}

fn single(family: Family, label: &str, score: f64) -> ScoreResult {
    ScoreResult {
        score: score.clamp(0.0, 1.0),
        family: family.name().to_string(),
        details: BTreeMap::from([(label.to_string(), score)]),
    }
}

/// Hellinger fidelity against `(|0…0⟩ + |1…1⟩)/√2` read out on `n` bits.
pub fn ghz_score(counts: &BTreeMap<String, u64>, n: usize) -> Result<ScoreResult, ScoreError> {
    let d = checked_distribution(counts, n)?;
    let f = hellinger_fidelity(&d, &crate::bench::ghz_distribution(n))?;
    Ok(single(Family::Ghz, "hellinger", f))
}

/// Hellinger fidelity against the point mass at θ's first `m` binary digits.
pub fn ipe_score(
    counts: &BTreeMap<String, u64>,
    theta: f64,
    m: usize,
) -> Result<ScoreResult, ScoreError> {
    let d = checked_distribution(counts, m)?;
    let f = hellinger_fidelity(
        &d,
        &Distribution::point(&crate::bench::binary_digits(theta, m)),
    )?;
    Ok(single(Family::Ipe, "hellinger", f))
}

/// `1 − |ideal − observed| / |2·ideal|`, clamped to `[0, 1]`.
pub fn tfim_score(observed: f64, ideal: f64) -> Result<ScoreResult, ScoreError> {
    if ideal == 0.0 {
        return Err(ScoreError::ZeroMagnetization);
    }
    let f = 1.0 - (ideal - observed).abs() / (2.0 * ideal).abs();
    let mut r = single(Family::Tfim, "relative", f);
    r.details.insert("observed_mz".into(), observed);
    r.details.insert("ideal_mz".into(), ideal);
    Ok(r)
}

/// Average `⟨Z⟩` after `steps` ancilla-free Trotter steps from `|0…0⟩`.
pub fn ideal_tfim_mz(n: usize, steps: usize, j: f64, h: f64, dt: f64) -> Result<f64, ScoreError> {
    if n > sim::MAX_STATEVECTOR_QUBITS {
        return Err(SimError::QubitBudget {
            qubits: n,
            limit: sim::MAX_STATEVECTOR_QUBITS,
        }
        .into());
    }
    let mut b = CircuitBuilder::new(n, 1)?;
    for _ in 0..steps {
        for q in 0..n {
            b.rx(2.0 * h * dt, q)?;
        }
        for parity in [0, 1] {
            for i in (0..n.saturating_sub(1)).filter(|i| i % 2 == parity) {
                b.rzz(2.0 * j * dt, i, i + 1)?;
            }
        }
    }
    let state = sim::final_state(&b.build()?)?;
    Ok((0..n).map(|q| state.expect_z(&[q])).sum::<f64>() / n as f64)
}

fn qec_fraction(counts: &BTreeMap<String, u64>, layout: &QecLayout) -> Result<f64, ScoreError> {
    let (mut ok, mut total) = (0u64, 0u64);
    for (k, &v) in counts {
        let bits = parse_bits(k).map_err(|e| ScoreError::Malformed(e.to_string()))?;
        if !layout.is_readable(bits.len()) {
            return Err(ScoreError::Malformed(format!(
                "outcome `{k}` is too short for the code layout"
            )));
        }
        if layout.shot_ok(&bits) {
            ok += v;
        }
        total += v;
    }
    if total == 0 {
        return Err(ScoreError::Malformed("no shots".into()));
    }
    Ok(ok as f64 / total as f64)
}

/// One minus the logical error rate: the fraction of shots whose readout is
/// in the code space and carries the prepared logical value. The details
/// hold the histogram of the mid-circuit syndromes.
pub fn qec_score(
    counts: &BTreeMap<String, u64>,
    layout: &QecLayout,
) -> Result<ScoreResult, ScoreError> {
    let f = qec_fraction(counts, layout)?;
    let family = match layout.tables.name {
        "five-qubit" => Family::FiveQubitCode,
        "steane" => Family::SteaneCode,
        _ => Family::RepCode,
    };
    let mut r = single(family, "logical", f);
    r.details.extend(syndrome_histogram(counts, layout));
    Ok(r)
}

fn syndrome_histogram(counts: &BTreeMap<String, u64>, layout: &QecLayout) -> BTreeMap<String, f64> {
    let total: u64 = counts.values().sum();
    let mut hist = BTreeMap::new();
    for (k, &v) in counts {
        let bytes = k.as_bytes();
        let key: String = layout
            .syndrome_clbits
            .iter()
            .map(|&i| bytes[i] as char)
            .collect();
        *hist.entry(format!("syndrome:{key}")).or_insert(0.0) += v as f64 / total as f64;
    }
    hist
}

/// The DFE circuit for one Pauli `p` on the data qubits: prepare its +1
/// eigenstate, run the benchmark without its final readout, then measure
/// `C p C†` by rotating each letter onto Z.
pub fn dfe_experiment(
    bench: &GeneratedBenchmark,
    p: &PauliString,
    shots: u64,
) -> Result<Experiment, ScoreError> {
    let IdealReference::Clifford {
        data,
        clbits,
        unitary,
    } = &bench.reference
    else {
        return Err(ScoreError::NotClifford(bench.family()));
    };
    if p.len() != data.len() {
        return Err(SimError::BadPauli(p.to_string()).into());
    }
    let image = propagate_pauli(unitary.instructions(), p)?;
    let mut insts = Vec::new();
    for (k, &q) in data.iter().enumerate() {
        insts.extend(
            prepare_pauli_eigenstate(p.letter(k))
                .into_iter()
                .map(|g| Instruction::gate(g, &[q])),
        );
    }
    insts.extend(
        strip_final_measurements(&bench.circuit)
            .instructions()
            .iter()
            .cloned(),
    );
    for k in image.support() {
        insts.extend(
            basis_change_to_z(image.letter(k))
                .into_iter()
                .map(|g| Instruction::gate(g, &[data[k]])),
        );
        insts.push(Instruction::Measure {
            qubit: data[k],
            clbit: clbits[k],
        });
    }
    Ok(Experiment {
        label: format!("pauli:{p}"),
        circuit: bench.circuit.with_instructions(insts)?,
        shots,
        readout: Readout::Parity {
            clbits: image.support().iter().map(|&k| clbits[k]).collect(),
            negative: image.is_negative(),
        },
    })
}

/// The circuits needed to score `bench`. Clifford families sample `dfe.k`
/// Paulis from `seed`; QFT families add the second and third seeded inputs
/// to the benchmark's own.
pub fn experiments(
    bench: &GeneratedBenchmark,
    shots: u64,
    dfe: &DfeConfig,
    seed: u64,
) -> Result<Vec<Experiment>, ScoreError> {
    let one = |readout| {
        Ok(vec![Experiment {
            label: "main".into(),
            circuit: bench.circuit.clone(),
            shots,
            readout,
        }])
    };
    match (&bench.reference, &bench.spec) {
        (IdealReference::Clifford { data, .. }, _) => {
            if dfe.k == 0 {
                return Err(ScoreError::Malformed(
                    "DFE needs at least one Pauli sample".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..dfe.k)
                .map(|_| {
                    dfe_experiment(bench, &PauliString::random(data.len(), &mut rng), dfe.shots)
                })
                .collect()
        }
        (_, BenchmarkSpec::QftM { n, s } | BenchmarkSpec::PartialQftM { n, s }) => {
            let [_, second, third] = qft_inputs(*n, seed);
            [s.clone(), second, third]
                .into_iter()
                .map(|s| {
                    let g = bench
                        .family()
                        .spec(
                            *n,
                            &FamilyParams {
                                s: Some(s.clone()),
                                ..Default::default()
                            },
                            seed,
                        )?
                        .generate()?;
                    let IdealReference::Distribution { clbits, dist } = g.reference else {
                        unreachable!("QFT reference")
                    };
                    Ok(Experiment {
                        label: format!("s={s}"),
                        circuit: g.circuit,
                        shots,
                        readout: Readout::Hellinger {
                            clbits,
                            ideal: dist,
                        },
                    })
                })
                .collect()
        }
        (IdealReference::Distribution { clbits, dist }, _) => one(Readout::Hellinger {
            clbits: clbits.clone(),
            ideal: dist.clone(),
        }),
        (
            IdealReference::Tfim {
                n_data,
                steps,
                j,
                h,
                dt,
                clbits,
            },
            _,
        ) => {
            let ideal = ideal_tfim_mz(*n_data, *steps, *j, *h, *dt)?;
            if ideal == 0.0 {
                return Err(ScoreError::ZeroMagnetization);
            }
            one(Readout::Magnetization {
                clbits: clbits.clone(),
                ideal,
            })
        }
        (IdealReference::Qec(layout), _) => one(Readout::Qec(Box::new(layout.clone()))),
    }
}

/// Seed for the `index`-th experiment of a benchmark scored with `seed`.
pub fn experiment_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_experiments(
    exps: &[Experiment],
    nm: &NoiseModel,
    seed: u64,
) -> Result<Vec<Counts>, ScoreError> {
    exps.iter()
        .enumerate()
        .map(|(i, e)| Ok(sim::run(&e.circuit, e.shots, nm, experiment_seed(seed, i))?))
        .collect()
}

/// Combine per-experiment values: the mean, clamped to `[0, 1]`.
pub fn score_from_counts(
    bench: &GeneratedBenchmark,
    exps: &[Experiment],
    counts: &[Counts],
) -> Result<ScoreResult, ScoreError> {
    if exps.is_empty() || exps.len() != counts.len() {
        return Err(ScoreError::Malformed(format!(
            "{} experiments but {} count records",
            exps.len(),
            counts.len()
        )));
    }
    let mut details = BTreeMap::new();
    let mut total = 0.0;
    for (e, c) in exps.iter().zip(counts) {
        let v = e.value(c)?;
        total += v;
        // Repeated Pauli draws share a label; keep the last estimate.
        details.insert(e.label.clone(), v);
        if let Readout::Qec(layout) = &e.readout {
            details.extend(syndrome_histogram(&c.register, layout));
        }
    }
    let score = (total / exps.len() as f64).clamp(0.0, 1.0);
    Ok(ScoreResult {
        score,
        family: bench.family().name().to_string(),
        details,
    })
}

/// Simulate and score any benchmark. Clifford families run `dfe.k` Pauli
/// circuits at `dfe.shots` each; everything else uses `shots`.
pub fn evaluate(
    bench: &GeneratedBenchmark,
    shots: u64,
    dfe: &DfeConfig,
    nm: &NoiseModel,
    seed: u64,
) -> Result<ScoreResult, ScoreError> {
    let exps = experiments(bench, shots, dfe, seed)?;
    let counts = run_experiments(&exps, nm, seed)?;
    score_from_counts(bench, &exps, &counts)
}

pub fn dfe_clifford_score(
    bench: &GeneratedBenchmark,
    cfg: &DfeConfig,
    nm: &NoiseModel,
    seed: u64,
) -> Result<ScoreResult, ScoreError> {
    if !bench.family().is_clifford_gate() {
        return Err(ScoreError::NotClifford(bench.family()));
    }
    evaluate(bench, cfg.shots, cfg, nm, seed)
}

/// Mean Hellinger fidelity over three seeded input strings.
pub fn qft_score(
    family: Family,
    n: usize,
    shots: u64,
    nm: &NoiseModel,
    seed: u64,
) -> Result<ScoreResult, ScoreError> {
    if !matches!(family, Family::QftM | Family::PartialQftM) {
        return Err(BenchError::Param {
            name: "family",
            reason: format!("{family} is not a QFT family"),
        }
        .into());
    }
    let bench = family.spec(n, &FamilyParams::default(), seed)?.generate()?;
    evaluate(&bench, shots, &DfeConfig::default(), nm, seed)
}
