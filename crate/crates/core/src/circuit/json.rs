use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    bits_to_string, parse_bits, Circuit, CircuitBuilder, CircuitError, Condition, Gate,
    Instruction, Predicate,
};

/// Interchange form of a [`Circuit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    #[serde(default)]
    pub name: String,
    pub qubits: usize,
    pub clbits: usize,
    pub system_qubits: Vec<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub instructions: Vec<InstructionJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstructionJson {
    Gate {
        gate: String,
        qubits: Vec<usize>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
    },
    Measure {
        measure: usize,
        clbit: usize,
    },
    Reset {
        reset: usize,
    },
    If {
        #[serde(rename = "if")]
        condition: ConditionJson,
        body: Vec<InstructionJson>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionJson {
    pub bits: Vec<usize>,
    /// `"eq"` or `"parity"`.
    pub pred: String,
    /// Bit string for `eq`, 0 or 1 for `parity`.
    pub val: serde_json::Value,
}

impl From<&Condition> for ConditionJson {
    fn from(c: &Condition) -> Self {
        let (pred, val) = match &c.predicate {
            Predicate::Equals(v) => ("eq", serde_json::Value::from(bits_to_string(v))),
            Predicate::Parity(b) => ("parity", serde_json::Value::from(*b as u8)),
        };
        ConditionJson {
            bits: c.clbits.clone(),
            pred: pred.to_string(),
            val,
        }
    }
}

impl TryFrom<&ConditionJson> for Condition {
    type Error = CircuitError;
    fn try_from(j: &ConditionJson) -> Result<Self, CircuitError> {
        let bad = || {
            CircuitError::InvalidCondition(format!("bad value {} for predicate {}", j.val, j.pred))
        };
        match j.pred.as_str() {
            "eq" => {
                let s = j.val.as_str().ok_or_else(bad)?;
                Condition::equals(&j.bits, &parse_bits(s)?)
            }
            "parity" => match j.val.as_u64() {
                Some(b @ (0 | 1)) => Condition::parity(&j.bits, b == 1),
                _ => Err(bad()),
            },
            other => Err(CircuitError::InvalidCondition(format!(
                "unknown predicate `{other}`"
            ))),
        }
    }
}

impl From<&Instruction> for InstructionJson {
    fn from(inst: &Instruction) -> Self {
        match inst {
            Instruction::Gate { gate, qubits } => InstructionJson::Gate {
                gate: gate.name().to_string(),
                qubits: qubits.clone(),
                params: gate.params(),
            },
            Instruction::Measure { qubit, clbit } => InstructionJson::Measure {
                measure: *qubit,
                clbit: *clbit,
            },
            Instruction::Reset { qubit } => InstructionJson::Reset { reset: *qubit },
            Instruction::Conditional { condition, body } => InstructionJson::If {
                condition: condition.into(),
                body: body.iter().map(Into::into).collect(),
            },
        }
    }
}

impl TryFrom<&InstructionJson> for Instruction {
    type Error = CircuitError;
    fn try_from(j: &InstructionJson) -> Result<Self, CircuitError> {
        Ok(match j {
            InstructionJson::Gate {
                gate,
                qubits,
                params,
            } => Instruction::Gate {
                gate: Gate::from_name(gate, params)?,
                qubits: qubits.clone(),
            },
            InstructionJson::Measure { measure, clbit } => Instruction::Measure {
                qubit: *measure,
                clbit: *clbit,
            },
            InstructionJson::Reset { reset } => Instruction::Reset { qubit: *reset },
            InstructionJson::If { condition, body } => Instruction::Conditional {
                condition: condition.try_into()?,
                body: body
                    .iter()
                    .map(Instruction::try_from)
                    .collect::<Result<_, _>>()?,
            },
        })
    }
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        CircuitJson {
            name: c.name().to_string(),
            qubits: c.num_qubits(),
            clbits: c.num_clbits(),
            system_qubits: c.system_qubits().iter().copied().collect(),
            params: c.params().clone(),
            instructions: c.instructions().iter().map(Into::into).collect(),
        }
    }
}

impl TryFrom<&CircuitJson> for Circuit {
    type Error = CircuitError;
    fn try_from(j: &CircuitJson) -> Result<Self, CircuitError> {
        let mut b = CircuitBuilder::new(j.qubits, j.clbits)?;
        for inst in &j.instructions {
            b.push(inst.try_into()?)?;
        }
        b.name(&j.name)
            .system_qubits(j.system_qubits.iter().copied());
        for (k, v) in &j.params {
            b.param(k, *v);
        }
        b.build()
    }
}

impl Circuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitJson::from(self))
            .expect("circuit serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Circuit, CircuitJsonError> {
        let j: CircuitJson = serde_json::from_str(s)?;
        Ok(Circuit::try_from(&j)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CircuitJsonError {
    #[error("malformed circuit JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] CircuitError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parity_example;

    #[test]
    fn parity_example_roundtrip() {
        let c = parity_example();
        let s = c.to_json();
        assert!(s.contains(r#""if": {"#));
        assert_eq!(Circuit::from_json(&s).unwrap(), c);
    }

    #[test]
    fn schema_shapes() {
        let src = r#"{"qubits":2,"clbits":2,"system_qubits":[0],
            "instructions":[{"gate":"rx","qubits":[0],"params":[0.5]},
                            {"measure":0,"clbit":1},{"reset":0},
                            {"if":{"bits":[1],"pred":"parity","val":1},"body":[{"gate":"x","qubits":[1]}]}]}"#;
        let c = Circuit::from_json(src).unwrap();
        assert_eq!(c.instructions()[0], Instruction::gate(Gate::Rx(0.5), &[0]));
        let (cond, body) = c.conditionals().next().unwrap();
        assert_eq!(cond.predicate, Predicate::Parity(true));
        assert_eq!(body.len(), 1);
    }

    #[test]
    fn rejects_invalid() {
        let bad_gate = r#"{"qubits":1,"clbits":1,"system_qubits":[],"instructions":[{"gate":"foo","qubits":[0]}]}"#;
        assert!(matches!(
            Circuit::from_json(bad_gate),
            Err(CircuitJsonError::Invalid(_))
        ));
        let bad_pred = r#"{"qubits":1,"clbits":1,"system_qubits":[],"instructions":[{"measure":0,"clbit":0},
            {"if":{"bits":[0],"pred":"parity","val":2},"body":[]}]}"#;
        assert!(Circuit::from_json(bad_pred).is_err());
        assert!(matches!(
            Circuit::from_json("{"),
            Err(CircuitJsonError::Syntax(_))
        ));
    }
}
