//! Dynamic circuit representation: gates, mid-circuit measurement, reset and
//! flat classically-conditioned blocks.

mod builder;
mod json;
mod qasm;
pub(crate) mod schedule;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use builder::CircuitBuilder;
pub use json::{CircuitJson, CircuitJsonError, ConditionJson, InstructionJson};
pub use qasm::{from_qasm, to_qasm, QasmError};
pub use schedule::{
    classify_qubits, layer_schedule, strip_final_measurements, LayeredSchedule, QubitClasses,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("register sizes must be at least 1 (got {qubits} qubits, {clbits} clbits)")]
    EmptyRegister { qubits: usize, clbits: usize },
    #[error("qubit {index} out of range for {limit} qubits")]
    QubitOutOfRange { index: usize, limit: usize },
    #[error("clbit {index} out of range for {limit} clbits")]
    ClbitOutOfRange { index: usize, limit: usize },
    #[error("duplicate operand {0}")]
    DuplicateOperand(usize),
    #[error("gate {gate} expects {expected} operands, got {got}")]
    Arity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate} expects {expected} parameters, got {got}")]
    ParamCount {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("conditional bodies may only contain gates and resets")]
    IllegalInBody,
    #[error("condition value has {got} bits for {expected} clbits")]
    ConditionWidth { expected: usize, got: usize },
    #[error("condition has no clbits")]
    EmptyCondition,
    #[error("condition reads clbit {0} before any measurement writes it")]
    UnwrittenClbit(usize),
    #[error("invalid condition: {0}")]
    InvalidCondition(String),
}

/// Supported gate set. Rotation angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    P(f64),
    Cx,
    Cz,
    Swap,
    Rzz(f64),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cx | Gate::Cz | Gate::Swap | Gate::Rzz(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H => "h",
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::T => "t",
            Gate::Rx(_) => "rx",
            Gate::Ry(_) => "ry",
            Gate::Rz(_) => "rz",
            Gate::P(_) => "p",
            Gate::Cx => "cx",
            Gate::Cz => "cz",
            Gate::Swap => "swap",
            Gate::Rzz(_) => "rzz",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) | Gate::P(t) | Gate::Rzz(t) => vec![t],
            _ => Vec::new(),
        }
    }

    pub fn from_name(name: &str, params: &[f64]) -> Result<Gate, CircuitError> {
        let lower = name.to_ascii_lowercase();
        let fixed = match lower.as_str() {
            "h" => Some(Gate::H),
            "x" => Some(Gate::X),
            "y" => Some(Gate::Y),
            "z" => Some(Gate::Z),
            "s" => Some(Gate::S),
            "sdg" => Some(Gate::Sdg),
            "t" => Some(Gate::T),
            "cx" | "cnot" => Some(Gate::Cx),
            "cz" => Some(Gate::Cz),
            "swap" => Some(Gate::Swap),
            _ => None,
        };
        if let Some(g) = fixed {
            if !params.is_empty() {
                return Err(CircuitError::ParamCount {
                    gate: lower,
                    expected: 0,
                    got: params.len(),
                });
            }
            return Ok(g);
        }
        let ctor: fn(f64) -> Gate = match lower.as_str() {
            "rx" => Gate::Rx,
            "ry" => Gate::Ry,
            "rz" => Gate::Rz,
            "p" => Gate::P,
            "rzz" => Gate::Rzz,
            _ => return Err(CircuitError::UnknownGate(name.to_string())),
        };
        match params {
            [t] => Ok(ctor(*t)),
            _ => Err(CircuitError::ParamCount {
                gate: lower,
                expected: 1,
                got: params.len(),
            }),
        }
    }

    /// True for the gates the stabilizer backend can apply exactly.
    pub fn is_clifford(&self) -> bool {
        matches!(
            self,
            Gate::H
                | Gate::X
                | Gate::Y
                | Gate::Z
                | Gate::S
                | Gate::Sdg
                | Gate::Cx
                | Gate::Cz
                | Gate::Swap
        )
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params().first() {
            Some(t) => write!(f, "{}({})", self.name(), t),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// `bits[k]` must equal the k-th listed clbit.
    Equals(Vec<bool>),
    /// XOR of the listed clbits must equal the flag.
    Parity(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub clbits: Vec<usize>,
    pub predicate: Predicate,
}

impl Condition {
    pub fn equals(clbits: &[usize], value: &[bool]) -> Result<Condition, CircuitError> {
        let c = Condition {
            clbits: clbits.to_vec(),
            predicate: Predicate::Equals(value.to_vec()),
        };
        c.check_shape()?;
        Ok(c)
    }

    /// Condition on a single clbit being 1.
    pub fn bit(clbit: usize) -> Condition {
        Condition {
            clbits: vec![clbit],
            predicate: Predicate::Equals(vec![true]),
        }
    }

    pub fn parity(clbits: &[usize], value: bool) -> Result<Condition, CircuitError> {
        let c = Condition {
            clbits: clbits.to_vec(),
            predicate: Predicate::Parity(value),
        };
        c.check_shape()?;
        Ok(c)
    }

    /// Parse a value written as a bit string, character k for the k-th clbit.
    pub fn equals_str(clbits: &[usize], value: &str) -> Result<Condition, CircuitError> {
        let bits = parse_bits(value)?;
        Self::equals(clbits, &bits)
    }

    fn check_shape(&self) -> Result<(), CircuitError> {
        if self.clbits.is_empty() {
            return Err(CircuitError::EmptyCondition);
        }
        let mut seen = BTreeSet::new();
        for &c in &self.clbits {
            if !seen.insert(c) {
                return Err(CircuitError::InvalidCondition(format!(
                    "clbit {c} listed twice"
                )));
            }
        }
        if let Predicate::Equals(v) = &self.predicate {
            if v.len() != self.clbits.len() {
                return Err(CircuitError::ConditionWidth {
                    expected: self.clbits.len(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, register: &[bool]) -> bool {
        match &self.predicate {
            Predicate::Equals(v) => self.clbits.iter().zip(v).all(|(&c, &b)| register[c] == b),
            Predicate::Parity(b) => {
                self.clbits.iter().fold(false, |acc, &c| acc ^ register[c]) == *b
            }
        }
    }

    /// Number of classical bits the predicate constrains; drives the uniform
    /// branch probability `2^-k`.
    pub fn constrained_bits(&self) -> usize {
        match &self.predicate {
            Predicate::Equals(v) => v.len(),
            Predicate::Parity(_) => 1,
        }
    }
}

pub(crate) fn parse_bits(s: &str) -> Result<Vec<bool>, CircuitError> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CircuitError::InvalidCondition(format!(
                "`{s}` is not a bit string"
            ))),
        })
        .collect()
}

pub(crate) fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate {
        gate: Gate,
        qubits: Vec<usize>,
    },
    Measure {
        qubit: usize,
        clbit: usize,
    },
    Reset {
        qubit: usize,
    },
    Conditional {
        condition: Condition,
        body: Vec<Instruction>,
    },
}

impl Instruction {
    pub fn gate(gate: Gate, qubits: &[usize]) -> Instruction {
        Instruction::Gate {
            gate,
            qubits: qubits.to_vec(),
        }
    }

    /// Qubits touched by this instruction, including those of a conditional body.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Gate { qubits, .. } => qubits.clone(),
            Instruction::Measure { qubit, .. } | Instruction::Reset { qubit } => vec![*qubit],
            Instruction::Conditional { body, .. } => {
                let set: BTreeSet<usize> = body.iter().flat_map(|i| i.qubits()).collect();
                set.into_iter().collect()
            }
        }
    }

    pub fn is_two_qubit_gate(&self) -> bool {
        matches!(self, Instruction::Gate { gate, .. } if gate.arity() == 2)
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, Instruction::Gate { .. })
    }
}

/// An immutable, validated dynamic circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    name: String,
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
    system_qubits: BTreeSet<usize>,
    params: BTreeMap<String, f64>,
}

impl Circuit {
    /// Validate and assemble a circuit from raw parts.
    pub fn new(
        num_qubits: usize,
        num_clbits: usize,
        instructions: Vec<Instruction>,
        system_qubits: impl IntoIterator<Item = usize>,
    ) -> Result<Circuit, CircuitError> {
        let mut b = CircuitBuilder::new(num_qubits, num_clbits)?;
        for inst in instructions {
            b.push(inst)?;
        }
        b.system_qubits(system_qubits);
        b.build()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }
    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }
    pub fn system_qubits(&self) -> &BTreeSet<usize> {
        &self.system_qubits
    }
    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn conditionals(&self) -> impl Iterator<Item = (&Condition, &[Instruction])> {
        self.instructions.iter().filter_map(|i| match i {
            Instruction::Conditional { condition, body } => Some((condition, body.as_slice())),
            _ => None,
        })
    }

    pub fn num_conditionals(&self) -> usize {
        self.conditionals().count()
    }

    /// Distinct clbits read by any condition (the `n_a` of the uniform branch model).
    pub fn condition_clbits(&self) -> BTreeSet<usize> {
        self.conditionals()
            .flat_map(|(c, _)| c.clbits.iter().copied())
            .collect()
    }

    /// True when every gate, including those in conditional bodies, is Clifford.
    pub fn is_clifford(&self) -> bool {
        fn all(insts: &[Instruction]) -> bool {
            insts.iter().all(|i| match i {
                Instruction::Gate { gate, .. } => gate.is_clifford(),
                Instruction::Conditional { body, .. } => all(body),
                _ => true,
            })
        }
        all(&self.instructions)
    }

    /// Reopen the circuit for appending.
    pub fn to_builder(&self) -> CircuitBuilder {
        CircuitBuilder::from_circuit(self.clone())
    }

    /// Copy with a different instruction list, keeping registers and metadata.
    pub fn with_instructions(
        &self,
        instructions: Vec<Instruction>,
    ) -> Result<Circuit, CircuitError> {
        let mut b = CircuitBuilder::new(self.num_qubits, self.num_clbits)?;
        for inst in instructions {
            b.push(inst)?;
        }
        b.name(&self.name)
            .system_qubits(self.system_qubits.iter().copied());
        for (k, v) in &self.params {
            b.param(k, *v);
        }
        b.build()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "circuit {} ({} qubits, {} clbits)",
            self.name, self.num_qubits, self.num_clbits
        )?;
        fn line(f: &mut fmt::Formatter<'_>, i: &Instruction, indent: &str) -> fmt::Result {
            match i {
                Instruction::Gate { gate, qubits } => writeln!(f, "{indent}{gate} {qubits:?}"),
                Instruction::Measure { qubit, clbit } => {
                    writeln!(f, "{indent}measure q{qubit} -> c{clbit}")
                }
                Instruction::Reset { qubit } => writeln!(f, "{indent}reset q{qubit}"),
                Instruction::Conditional { condition, body } => {
                    let pred = match &condition.predicate {
                        Predicate::Equals(v) => format!("== {}", bits_to_string(v)),
                        Predicate::Parity(b) => format!("parity {}", *b as u8),
                    };
                    writeln!(f, "{indent}if c{:?} {pred}", condition.clbits)?;
                    for b in body {
                        line(f, b, "    ")?;
                    }
                    Ok(())
                }
            }
        }
        for i in &self.instructions {
            line(f, i, "  ")?;
        }
        Ok(())
    }
}

/// The three-qubit example used throughout the docs and tests: a two-qubit
/// parity measured onto an ancilla followed by a conditional correction.
pub fn parity_example() -> Circuit {
    build_parity_example().expect("static circuit")
}

fn build_parity_example() -> Result<Circuit, CircuitError> {
    let mut b = CircuitBuilder::new(3, 1)?;
    b.h(0)?.h(2)?.cx(0, 1)?.cx(2, 1)?.measure(1, 0)?;
    b.conditional(Condition::bit(0), |body| {
        body.x(2)?;
        Ok(())
    })?;
    b.name("parity_example").system_qubits([0, 2]);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_roundtrip_by_name() {
        for g in [
            Gate::H,
            Gate::Sdg,
            Gate::Rx(0.3),
            Gate::Rzz(-1.25),
            Gate::Swap,
        ] {
            assert_eq!(Gate::from_name(g.name(), &g.params()).unwrap(), g);
        }
        assert!(matches!(
            Gate::from_name("ccx", &[]),
            Err(CircuitError::UnknownGate(_))
        ));
        assert!(Gate::from_name("rx", &[]).is_err());
    }

    #[test]
    fn condition_eval() {
        let reg = [true, false, true];
        assert!(Condition::equals_str(&[0, 1], "10").unwrap().eval(&reg));
        assert!(!Condition::equals_str(&[0, 2], "10").unwrap().eval(&reg));
        assert!(Condition::parity(&[0, 2], false).unwrap().eval(&reg));
        assert!(Condition::parity(&[0, 1, 2], false).unwrap().eval(&reg));
        assert!(Condition::equals_str(&[0], "11").is_err());
        assert!(Condition::parity(&[], true).is_err());
    }

    #[test]
    fn parity_example_shape() {
        let c = parity_example();
        assert_eq!(c.instructions().len(), 6);
        assert_eq!(c.num_conditionals(), 1);
        assert_eq!(c.system_qubits().len(), 2);
        assert!(c.is_clifford());
    }
}
