//! The 24 dynamic-circuit features, computed as expectations over
//! conditional branches.

mod branch;
mod graph;

use serde::{Deserialize, Serialize};

pub use branch::{qec_branch_probability, BranchModel};
pub use graph::{communication, critical_two_qubit, sota_depth, CommMatrix};

use crate::circuit::{
    classify_qubits, layer_schedule, strip_final_measurements, Circuit, Instruction,
};
use crate::counts::Distribution;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("branch model has no probability for conditional {index}")]
    Uncovered { index: usize },
    #[error("branch model lists {entries} entries for {conditionals} conditionals")]
    Coverage { conditionals: usize, entries: usize },
    #[error("probability {p} for conditional {index} is outside [0, 1]")]
    BadProbability { index: usize, p: f64 },
    #[error("{0} is zero")]
    Zero(&'static str),
    #[error("feature needs at least 2 qubits")]
    TooFewQubits,
    #[error("empty outcome distribution")]
    EmptyCounts,
    #[error("at least one conditioned bit is required")]
    NoConditionBits,
}

/// Which operations `expected_ops` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsVariant {
    /// Gates only.
    Unitary,
    /// Gates, measurements and resets.
    Quantum,
    /// Quantum operations plus one feed-forward operation per conditional.
    All,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BlockStats {
    pub depth: usize,
    pub g1q: usize,
    pub g2q: usize,
    pub measures: usize,
    pub resets: usize,
}

impl BlockStats {
    fn of(insts: &[Instruction], depth: usize) -> BlockStats {
        let mut s = BlockStats {
            depth,
            ..Default::default()
        };
        for i in insts {
            match i {
                Instruction::Gate { gate, .. } if gate.arity() == 2 => s.g2q += 1,
                Instruction::Gate { .. } => s.g1q += 1,
                Instruction::Measure { .. } => s.measures += 1,
                Instruction::Reset { .. } => s.resets += 1,
                Instruction::Conditional { .. } => {}
            }
        }
        s
    }

    fn unitary(&self) -> f64 {
        (self.g1q + self.g2q) as f64
    }

    fn quantum(&self) -> f64 {
        self.unitary() + (self.measures + self.resets) as f64
    }

    /// Qubit-time steps spent busy: two-qubit gates occupy both operands.
    fn live(&self) -> f64 {
        (self.g1q + 2 * self.g2q + self.resets + self.measures) as f64
    }
}

/// Base and branch statistics of one circuit under a branch model.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    pub base: BlockStats,
    pub branches: Vec<(f64, BlockStats)>,
    pub mcm_layers: usize,
}

impl Profile {
    pub fn new(c: &Circuit, bm: &BranchModel) -> Result<Profile, FeatureError> {
        let probs = bm.probabilities(c)?;
        let sched = layer_schedule(c, true);
        let base = BlockStats::of(c.instructions(), sched.base_depth);
        let branches = c
            .conditionals()
            .zip(&sched.branch_depths)
            .zip(probs)
            .map(|(((_, body), &d), p)| (p, BlockStats::of(body, d)))
            .collect();
        Ok(Profile {
            base,
            branches,
            mcm_layers: sched.mcm_layer_count,
        })
    }

    fn expect(&self, f: impl Fn(&BlockStats) -> f64) -> f64 {
        self.branches.iter().map(|(p, b)| p * f(b)).sum()
    }

    fn ncond(&self) -> f64 {
        self.branches.len() as f64
    }

    pub fn depth(&self, include_ff: bool) -> f64 {
        let ff = if include_ff { self.ncond() } else { 0.0 };
        self.base.depth as f64 + ff + self.expect(|b| b.depth as f64)
    }

    pub fn ops(&self, variant: OpsVariant) -> f64 {
        match variant {
            OpsVariant::Unitary => self.base.unitary() + self.expect(BlockStats::unitary),
            OpsVariant::Quantum => self.base.quantum() + self.expect(BlockStats::quantum),
            OpsVariant::All => {
                self.base.quantum() + self.expect(BlockStats::quantum) + self.ncond()
            }
        }
    }
}

pub fn expected_depth(
    c: &Circuit,
    bm: &BranchModel,
    include_ff: bool,
) -> Result<f64, FeatureError> {
    Ok(Profile::new(c, bm)?.depth(include_ff))
}

pub fn expected_ops(
    c: &Circuit,
    bm: &BranchModel,
    variant: OpsVariant,
) -> Result<f64, FeatureError> {
    Ok(Profile::new(c, bm)?.ops(variant))
}

/// `[E_Q(unitary), E_Q(quantum), E_Q(all), E_QC(unitary), E_QC(quantum), E_QC(all)]`.
pub fn entanglement_features(c: &Circuit, bm: &BranchModel) -> Result<[f64; 6], FeatureError> {
    let prof = Profile::new(c, bm)?;
    let q = prof.base.g2q as f64;
    let qc = q + prof.expect(BlockStats::unitary);
    let mut out = [0.0; 6];
    for (k, v) in [OpsVariant::Unitary, OpsVariant::Quantum, OpsVariant::All]
        .into_iter()
        .enumerate()
    {
        let ops = prof.ops(v);
        if ops == 0.0 {
            return Err(FeatureError::Zero("operation count"));
        }
        out[k] = q / ops;
        out[k + 3] = qc / ops;
    }
    Ok(out)
}

pub fn system_qubit_ratio(c: &Circuit) -> f64 {
    c.system_qubits().len() as f64 / c.num_qubits() as f64
}

pub fn dynamic_depth_ratio(
    c: &Circuit,
    bm: &BranchModel,
    include_ff: bool,
) -> Result<f64, FeatureError> {
    let prof = Profile::new(c, bm)?;
    let total = prof.depth(include_ff);
    if total == 0.0 {
        return Err(FeatureError::Zero("expected depth"));
    }
    let ff = if include_ff { prof.ncond() } else { 0.0 };
    Ok((prof.mcm_layers as f64 + ff) / total)
}

/// Busy qubit-time over available qubit-time, after dropping terminal
/// measurements. A mid-circuit measurement counts one step of live time.
pub fn liveness(c: &Circuit, bm: &BranchModel, include_ff: bool) -> Result<f64, FeatureError> {
    let stripped = strip_final_measurements(c);
    let prof = Profile::new(&stripped, bm)?;
    let live = prof.base.live() + prof.expect(BlockStats::live);
    let classes = classify_qubits(&stripped);
    let exec = classes.pre_depths().iter().sum::<usize>() as f64
        + classes.n2() as f64 * prof.depth(include_ff);
    if exec == 0.0 {
        return Err(FeatureError::Zero("execution time"));
    }
    Ok((live / exec).clamp(0.0, 1.0))
}

/// `(O/D − 1)/(n − 1)`, pairing quantum ops with the no-FF depth and all ops
/// with the FF depth.
pub fn parallelism(c: &Circuit, bm: &BranchModel, include_ff: bool) -> Result<f64, FeatureError> {
    let n = c.num_qubits();
    if n < 2 {
        return Err(FeatureError::TooFewQubits);
    }
    let prof = Profile::new(c, bm)?;
    let depth = prof.depth(include_ff);
    if depth == 0.0 {
        return Err(FeatureError::Zero("expected depth"));
    }
    let ops = prof.ops(if include_ff {
        OpsVariant::All
    } else {
        OpsVariant::Quantum
    });
    Ok(((ops / depth - 1.0) / (n - 1) as f64).clamp(0.0, 1.0))
}

/// Rényi-2 entropy of an outcome distribution divided by its bit count.
pub fn renyi2_normalized(dist: &Distribution, n_a: usize) -> Result<f64, FeatureError> {
    if dist.is_empty() {
        return Err(FeatureError::EmptyCounts);
    }
    if n_a == 0 {
        return Err(FeatureError::NoConditionBits);
    }
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    let collision: f64 = dist.iter().map(|(_, p)| (p / total).powi(2)).sum();
    Ok((collision.log2().abs() / n_a as f64).min(1.0))
}

pub const FEATURE_NAMES: [&str; 24] = [
    "f00_depth_noff",
    "f01_depth_ff",
    "f02_ops_unitary",
    "f03_ops_quantum",
    "f04_ops_all",
    "f05_system_qubits",
    "f06_total_qubits",
    "f07_liveness_noff",
    "f08_liveness_ff",
    "f09_system_qubit_ratio",
    "f10_critical_q",
    "f11_critical_qc",
    "f12_dyn_depth_noff",
    "f13_dyn_depth_ff",
    "f14_parallelism_noff",
    "f15_parallelism_ff",
    "f16_comm_q",
    "f17_comm_qc",
    "f18_q_ent_unitary",
    "f19_q_ent_quantum",
    "f20_q_ent_all",
    "f21_qc_ent_unitary",
    "f22_qc_ent_quantum",
    "f23_qc_ent_all",
];

/// Baseline columns: static depth, qubit count and two-qubit gate count.
pub const SOTA_NAMES: [&str; 3] = ["x_sota_depth", "x_sota_qubits", "x_sota_2q"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; 24],
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

pub fn feature_vector(c: &Circuit, bm: &BranchModel) -> Result<FeatureVector, FeatureError> {
    let prof = Profile::new(c, bm)?;
    let ent = entanglement_features(c, bm)?;
    let values = [
        prof.depth(false),
        prof.depth(true),
        prof.ops(OpsVariant::Unitary),
        prof.ops(OpsVariant::Quantum),
        prof.ops(OpsVariant::All),
        c.system_qubits().len() as f64,
        c.num_qubits() as f64,
        liveness(c, bm, false)?,
        liveness(c, bm, true)?,
        system_qubit_ratio(c),
        critical_two_qubit(c, bm, false)?,
        critical_two_qubit(c, bm, true)?,
        dynamic_depth_ratio(c, bm, false)?,
        dynamic_depth_ratio(c, bm, true)?,
        parallelism(c, bm, false)?,
        parallelism(c, bm, true)?,
        communication(c, bm, false)?.0,
        communication(c, bm, true)?.0,
        ent[0],
        ent[1],
        ent[2],
        ent[3],
        ent[4],
        ent[5],
    ];
    Ok(FeatureVector { values })
}

/// `[static depth, qubits, two-qubit gates]` with every conditional treated
/// as always taken.
pub fn sota_features(c: &Circuit) -> [f64; 3] {
    let two_q = c
        .instructions()
        .iter()
        .map(|i| match i {
            Instruction::Conditional { body, .. } => {
                body.iter().filter(|b| b.is_two_qubit_gate()).count()
            }
            other => other.is_two_qubit_gate() as usize,
        })
        .sum::<usize>();
    [sota_depth(c) as f64, c.num_qubits() as f64, two_q as f64]
}
