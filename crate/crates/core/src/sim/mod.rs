//! Shot-based simulation of dynamic circuits with stochastic Pauli noise.
//!
//! Each shot owns a ChaCha stream selected by its index, so counts depend only
//! on `(circuit, shots, noise, seed)` and not on how shots are distributed
//! over worker threads.

mod pauli;
mod statevector;
mod tableau;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pauli::{
    basis_change_to_z, prepare_pauli_eigenstate, propagate_pauli, Letter, PauliString,
};
pub use statevector::StateVector;
pub use tableau::Tableau;

use crate::circuit::{bits_to_string, schedule::asap, Circuit, Condition, Gate, Instruction};
use crate::counts::Counts;

/// Largest register the dense backend accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 25;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{qubits} qubits exceeds the statevector budget of {limit}")]
    QubitBudget { qubits: usize, limit: usize },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("non-Clifford operation {0} on the stabilizer path")]
    NonClifford(String),
    #[error("invalid Pauli string `{0}`")]
    BadPauli(String),
    #[error("noise parameter {name} = {value} is outside [0, 1]")]
    BadNoise { name: &'static str, value: f64 },
}

/// Operations shared by the dense and stabilizer backends.
pub trait QuantumState {
    fn apply_gate(&mut self, g: &Gate, qs: &[usize]);
    fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool;
    fn reset<R: Rng>(&mut self, q: usize, rng: &mut R);
    /// Letter 1, 2, 3 = X, Y, Z.
    fn apply_pauli(&mut self, q: usize, letter: u8);
}

/// Stochastic Pauli noise. Depolarizing channels pick a uniformly random
/// non-identity Pauli with the given probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// After every single-qubit gate.
    pub p1: f64,
    /// After every two-qubit gate, over the 15 two-qubit Paulis.
    pub p2: f64,
    /// Flip of each recorded measurement bit.
    pub pm: f64,
    /// Per idle layer on each waiting qubit.
    pub pidle: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> NoiseModel {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            pm: 0.0,
            pidle: 0.0,
        }
    }

    /// Single-qubit gate error defaults to the idle rate.
    pub fn new(p2: f64, pm: f64, pidle: f64) -> NoiseModel {
        NoiseModel {
            p1: pidle,
            p2,
            pm,
            pidle,
        }
    }

    pub fn ibm_like() -> NoiseModel {
        NoiseModel::new(1e-3, 5e-3, 1e-4)
    }

    pub fn helios_like() -> NoiseModel {
        NoiseModel::new(8e-4, 1e-6, 2.5e-5)
    }

    pub fn preset(name: &str) -> Option<NoiseModel> {
        match name {
            "noiseless" => Some(NoiseModel::noiseless()),
            "ibm-like" => Some(NoiseModel::ibm_like()),
            "helios-like" => Some(NoiseModel::helios_like()),
            _ => None,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.pm == 0.0 && self.pidle == 0.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("pm", self.pm),
            ("pidle", self.pidle),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadNoise { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Stabilizer tableau for all-Clifford circuits, statevector otherwise.
    #[default]
    Auto,
    StateVector,
    Stabilizer,
}

#[derive(Debug, Clone)]
enum Step {
    Gate(Gate, [usize; 2]),
    Measure(usize, usize),
    Reset(usize),
    Idle(usize, u32),
    If(Condition, Vec<Step>),
}

/// Flatten a circuit into simulator steps, inserting idle-noise markers for
/// the layers each qubit waits before its next base operation, and for the
/// qubits left waiting during each layer of a taken branch.
fn compile(c: &Circuit, idle: bool) -> Vec<Step> {
    let insts = c.instructions();
    let (layers, _) = asap(insts, c.num_qubits(), c.num_clbits());
    let mut ready = vec![0usize; c.num_qubits()];
    let mut steps = Vec::new();
    for (inst, layer) in insts.iter().zip(layers) {
        if let Some(l) = layer {
            for q in inst.qubits() {
                if idle && l > ready[q] {
                    steps.push(Step::Idle(q, (l - ready[q]) as u32));
                }
                ready[q] = l + 1;
            }
        }
        match inst {
            Instruction::Conditional { condition, body } => {
                let mut inner = Vec::new();
                let (blayers, depth) = asap(body, c.num_qubits(), c.num_clbits());
                for l in 0..depth {
                    let mut busy = vec![false; c.num_qubits()];
                    for (b, bl) in body.iter().zip(&blayers) {
                        if *bl == Some(l) {
                            inner.push(step_of(b));
                            for q in b.qubits() {
                                busy[q] = true;
                            }
                        }
                    }
                    if idle {
                        inner.extend(
                            (0..c.num_qubits())
                                .filter(|&q| !busy[q])
                                .map(|q| Step::Idle(q, 1)),
                        );
                    }
                }
                steps.push(Step::If(condition.clone(), inner));
            }
            other => steps.push(step_of(other)),
        }
    }
    steps
}

fn step_of(inst: &Instruction) -> Step {
    match inst {
        Instruction::Gate { gate, qubits } => {
            Step::Gate(*gate, [qubits[0], *qubits.get(1).unwrap_or(&usize::MAX)])
        }
        Instruction::Measure { qubit, clbit } => Step::Measure(*qubit, *clbit),
        Instruction::Reset { qubit } => Step::Reset(*qubit),
        Instruction::Conditional { .. } => unreachable!("bodies are flat"),
    }
}

struct Shot<'a> {
    nm: &'a NoiseModel,
    register: Vec<bool>,
    history: Vec<String>,
}

impl Shot<'_> {
    fn depolarize1<S: QuantumState, R: Rng>(&self, s: &mut S, q: usize, p: f64, rng: &mut R) {
        if p > 0.0 && rng.gen::<f64>() < p {
            s.apply_pauli(q, rng.gen_range(1..=3));
        }
    }

    fn run<S: QuantumState, R: Rng>(&mut self, s: &mut S, steps: &[Step], rng: &mut R) {
        for step in steps {
            match step {
                Step::Gate(g, qs) => {
                    if g.arity() == 1 {
                        s.apply_gate(g, &qs[..1]);
                        self.depolarize1(s, qs[0], self.nm.p1, rng);
                    } else {
                        s.apply_gate(g, qs);
                        if self.nm.p2 > 0.0 && rng.gen::<f64>() < self.nm.p2 {
                            let k: u8 = rng.gen_range(1..16);
                            if k & 3 != 0 {
                                s.apply_pauli(qs[0], k & 3);
                            }
                            if k >> 2 != 0 {
                                s.apply_pauli(qs[1], k >> 2);
                            }
                        }
                    }
                }
                Step::Measure(q, c) => {
                    let mut bit = s.measure(*q, rng);
                    if self.nm.pm > 0.0 && rng.gen::<f64>() < self.nm.pm {
                        bit = !bit;
                    }
                    self.register[*c] = bit;
                    self.history[*c].push(if bit { '1' } else { '0' });
                }
                Step::Reset(q) => s.reset(*q, rng),
                Step::Idle(q, layers) => {
                    for _ in 0..*layers {
                        self.depolarize1(s, *q, self.nm.pidle, rng);
                    }
                }
                Step::If(cond, body) => {
                    if cond.eval(&self.register) {
                        self.run(s, body, rng);
                    }
                }
            }
        }
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn simulate<S: QuantumState + Clone + Send + Sync>(
    init: &S,
    c: &Circuit,
    shots: u64,
    nm: &NoiseModel,
    seed: u64,
) -> Counts {
    let steps = compile(c, nm.pidle > 0.0);
    let nc = c.num_clbits();
    let tally = |mut acc: (
        BTreeMap<String, u64>,
        BTreeMap<String, BTreeMap<String, u64>>,
    ),
                 shot: u64| {
        let mut rng = shot_rng(seed, shot);
        let mut state = init.clone();
        let mut run = Shot {
            nm,
            register: vec![false; nc],
            history: vec![String::new(); nc],
        };
        run.run(&mut state, &steps, &mut rng);
        *acc.0.entry(bits_to_string(&run.register)).or_default() += 1;
        for (k, h) in run.history.into_iter().enumerate() {
            if !h.is_empty() {
                *acc.1
                    .entry(format!("c{k}"))
                    .or_default()
                    .entry(h)
                    .or_default() += 1;
            }
        }
        acc
    };
    let merge = |mut a: (
        BTreeMap<String, u64>,
        BTreeMap<String, BTreeMap<String, u64>>,
    ),
                 b: (
        BTreeMap<String, u64>,
        BTreeMap<String, BTreeMap<String, u64>>,
    )| {
        for (k, v) in b.0 {
            *a.0.entry(k).or_default() += v;
        }
        for (bit, hist) in b.1 {
            let dst = a.1.entry(bit).or_default();
            for (k, v) in hist {
                *dst.entry(k).or_default() += v;
            }
        }
        a
    };
    let (register, mcm) = (0..shots)
        .into_par_iter()
        .fold(Default::default, tally)
        .reduce(Default::default, merge);
    Counts {
        register,
        mcm,
        shots,
    }
}

/// Execute `shots` shots with automatic backend selection.
pub fn run(c: &Circuit, shots: u64, nm: &NoiseModel, seed: u64) -> Result<Counts, SimError> {
    run_with(c, shots, nm, seed, Backend::Auto)
}

pub fn run_with(
    c: &Circuit,
    shots: u64,
    nm: &NoiseModel,
    seed: u64,
    backend: Backend,
) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    nm.validate()?;
    let stabilizer = match backend {
        Backend::Auto => c.is_clifford(),
        Backend::Stabilizer => {
            if !c.is_clifford() {
                return Err(SimError::NonClifford(format!(
                    "gate in circuit `{}`",
                    c.name()
                )));
            }
            true
        }
        Backend::StateVector => false,
    };
    if stabilizer {
        Ok(simulate(&Tableau::new(c.num_qubits()), c, shots, nm, seed))
    } else {
        if c.num_qubits() > MAX_STATEVECTOR_QUBITS {
            return Err(SimError::QubitBudget {
                qubits: c.num_qubits(),
                limit: MAX_STATEVECTOR_QUBITS,
            });
        }
        Ok(simulate(
            &StateVector::new(c.num_qubits()),
            c,
            shots,
            nm,
            seed,
        ))
    }
}

/// Final statevector of a measurement-free circuit.
pub fn final_state(c: &Circuit) -> Result<StateVector, SimError> {
    if c.num_qubits() > MAX_STATEVECTOR_QUBITS {
        return Err(SimError::QubitBudget {
            qubits: c.num_qubits(),
            limit: MAX_STATEVECTOR_QUBITS,
        });
    }
    let mut s = StateVector::new(c.num_qubits());
    for inst in c.instructions() {
        match inst {
            Instruction::Gate { gate, qubits } => s.apply_gate(gate, qubits),
            other => {
                return Err(SimError::NonClifford(format!(
                    "{other:?} in a unitary-only circuit"
                )))
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parity_example, CircuitBuilder};

    fn coin() -> Circuit {
        let mut b = CircuitBuilder::new(1, 1).unwrap();
        b.h(0).unwrap().measure(0, 0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn coin_is_fair_within_three_sigma() {
        for backend in [Backend::StateVector, Backend::Stabilizer] {
            let counts = run_with(&coin(), 4096, &NoiseModel::noiseless(), 5, backend).unwrap();
            let ones = counts.register.get("1").copied().unwrap_or(0) as i64;
            assert!((ones - 2048).abs() <= 192, "{ones}");
            assert_eq!(counts.shots, 4096);
        }
    }

    #[test]
    fn bell_support() {
        let mut b = CircuitBuilder::new(2, 2).unwrap();
        b.h(0)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .measure(0, 0)
            .unwrap()
            .measure(1, 1)
            .unwrap();
        let c = b.build().unwrap();
        for backend in [Backend::StateVector, Backend::Stabilizer] {
            let counts = run_with(&c, 1000, &NoiseModel::noiseless(), 1, backend).unwrap();
            assert!(counts.register.keys().all(|k| k == "00" || k == "11"));
            assert_eq!(counts.register.len(), 2);
        }
    }

    #[test]
    fn forced_flip() {
        let mut b = CircuitBuilder::new(1, 1).unwrap();
        b.measure(0, 0).unwrap();
        let nm = NoiseModel {
            pm: 1.0,
            ..NoiseModel::noiseless()
        };
        let counts = run(&b.build().unwrap(), 100, &nm, 0).unwrap();
        assert_eq!(counts.register.get("1"), Some(&100));
    }

    #[test]
    fn parity_example_prepares_bell_pair_on_data() {
        // The parity measurement plus correction leaves q0, q2 correlated.
        let mut b2 = CircuitBuilder::new(3, 3).unwrap();
        for inst in parity_example().instructions() {
            b2.push(inst.clone()).unwrap();
        }
        b2.measure(0, 1).unwrap().measure(2, 2).unwrap();
        let c = b2.build().unwrap();
        let counts = run(&c, 2000, &NoiseModel::noiseless(), 9).unwrap();
        for k in counts.register.keys() {
            assert_eq!(&k[1..2], &k[2..3]);
        }
        assert!(counts.mcm.contains_key("c0"));
    }

    #[test]
    fn seeds_determine_counts() {
        let nm = NoiseModel::ibm_like();
        let a = run(&parity_example(), 500, &nm, 42).unwrap();
        let b = run(&parity_example(), 500, &nm, 42).unwrap();
        let c = run(&parity_example(), 500, &nm, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mcm, c.mcm);
    }

    #[test]
    fn pool_size_does_not_change_counts() {
        let nm = NoiseModel::new(0.05, 0.02, 0.01);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let wide = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = serial.install(|| run(&parity_example(), 3000, &nm, 7).unwrap());
        let b = wide.install(|| run(&parity_example(), 3000, &nm, 7).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn guards() {
        assert_eq!(
            run(&coin(), 0, &NoiseModel::noiseless(), 0),
            Err(SimError::NoShots)
        );
        let mut b = CircuitBuilder::new(26, 1).unwrap();
        b.t(0).unwrap();
        assert!(matches!(
            run(&b.build().unwrap(), 1, &NoiseModel::noiseless(), 0),
            Err(SimError::QubitBudget { .. })
        ));
        let bad = NoiseModel {
            p2: 1.5,
            ..NoiseModel::noiseless()
        };
        assert!(run(&coin(), 1, &bad, 0).is_err());
        let mut b = CircuitBuilder::new(1, 1).unwrap();
        b.t(0).unwrap();
        assert!(run_with(
            &b.build().unwrap(),
            1,
            &NoiseModel::noiseless(),
            0,
            Backend::Stabilizer
        )
        .is_err());
    }
}
