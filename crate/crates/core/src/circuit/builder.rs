use std::collections::{BTreeMap, BTreeSet};

use super::{Circuit, CircuitError, Condition, Gate, Instruction};

/// Appends instructions with eager range/arity checks. Causality of
/// conditions is checked by [`CircuitBuilder::build`].
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
    system_qubits: Option<BTreeSet<usize>>,
    name: String,
    params: BTreeMap<String, f64>,
    in_body: bool,
}

macro_rules! one_qubit {
    ($($fn:ident => $gate:expr),* $(,)?) => {
        $(pub fn $fn(&mut self, q: usize) -> Result<&mut Self, CircuitError> {
            self.gate($gate, &[q])
        })*
    };
}

macro_rules! rotation {
    ($($fn:ident => $gate:path),* $(,)?) => {
        $(pub fn $fn(&mut self, theta: f64, q: usize) -> Result<&mut Self, CircuitError> {
            self.gate($gate(theta), &[q])
        })*
    };
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Result<CircuitBuilder, CircuitError> {
        if num_qubits == 0 || num_clbits == 0 {
            return Err(CircuitError::EmptyRegister {
                qubits: num_qubits,
                clbits: num_clbits,
            });
        }
        Ok(CircuitBuilder {
            num_qubits,
            num_clbits,
            instructions: Vec::new(),
            system_qubits: None,
            name: String::new(),
            params: BTreeMap::new(),
            in_body: false,
        })
    }

    pub(crate) fn from_circuit(c: Circuit) -> CircuitBuilder {
        CircuitBuilder {
            num_qubits: c.num_qubits,
            num_clbits: c.num_clbits,
            instructions: c.instructions,
            system_qubits: Some(c.system_qubits),
            name: c.name,
            params: c.params,
            in_body: false,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: q,
                limit: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_clbit(&self, c: usize) -> Result<(), CircuitError> {
        if c >= self.num_clbits {
            return Err(CircuitError::ClbitOutOfRange {
                index: c,
                limit: self.num_clbits,
            });
        }
        Ok(())
    }

    /// Validate and append any instruction.
    pub fn push(&mut self, inst: Instruction) -> Result<&mut Self, CircuitError> {
        match &inst {
            Instruction::Gate { gate, qubits } => {
                if qubits.len() != gate.arity() {
                    return Err(CircuitError::Arity {
                        gate: gate.name(),
                        expected: gate.arity(),
                        got: qubits.len(),
                    });
                }
                for &q in qubits {
                    self.check_qubit(q)?;
                }
                if qubits.len() == 2 && qubits[0] == qubits[1] {
                    return Err(CircuitError::DuplicateOperand(qubits[0]));
                }
            }
            Instruction::Measure { qubit, clbit } => {
                if self.in_body {
                    return Err(CircuitError::IllegalInBody);
                }
                self.check_qubit(*qubit)?;
                self.check_clbit(*clbit)?;
            }
            Instruction::Reset { qubit } => self.check_qubit(*qubit)?,
            Instruction::Conditional { condition, body } => {
                if self.in_body {
                    return Err(CircuitError::IllegalInBody);
                }
                condition.check_shape()?;
                for &c in &condition.clbits {
                    self.check_clbit(c)?;
                }
                let mut inner = self.body_builder();
                for i in body {
                    inner.push(i.clone())?;
                }
            }
        }
        self.instructions.push(inst);
        Ok(self)
    }

    fn body_builder(&self) -> CircuitBuilder {
        CircuitBuilder {
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            instructions: Vec::new(),
            system_qubits: None,
            name: String::new(),
            params: BTreeMap::new(),
            in_body: true,
        }
    }

    pub fn gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<&mut Self, CircuitError> {
        self.push(Instruction::gate(gate, qubits))
    }

    one_qubit! { h => Gate::H, x => Gate::X, y => Gate::Y, z => Gate::Z, s => Gate::S, sdg => Gate::Sdg, t => Gate::T }
    rotation! { rx => Gate::Rx, ry => Gate::Ry, rz => Gate::Rz, p => Gate::P }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self, CircuitError> {
        self.gate(Gate::Cx, &[control, target])
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self, CircuitError> {
        self.gate(Gate::Cz, &[a, b])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<&mut Self, CircuitError> {
        self.gate(Gate::Swap, &[a, b])
    }

    pub fn rzz(&mut self, theta: f64, a: usize, b: usize) -> Result<&mut Self, CircuitError> {
        self.gate(Gate::Rzz(theta), &[a, b])
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Instruction::Measure { qubit, clbit })
    }

    pub fn reset(&mut self, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Instruction::Reset { qubit })
    }

    /// Append a conditional block whose body is filled in by `f`. Bodies accept
    /// gates and resets only.
    pub fn conditional<F>(&mut self, condition: Condition, f: F) -> Result<&mut Self, CircuitError>
    where
        F: FnOnce(&mut CircuitBuilder) -> Result<(), CircuitError>,
    {
        let mut inner = self.body_builder();
        f(&mut inner)?;
        self.push(Instruction::Conditional {
            condition,
            body: inner.instructions,
        })
    }

    pub fn name(&mut self, name: &str) -> &mut Self {
        self.name = name.to_string();
        self
    }

    pub fn param(&mut self, key: &str, value: f64) -> &mut Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Defaults to all qubits when never set.
    pub fn system_qubits(&mut self, qubits: impl IntoIterator<Item = usize>) -> &mut Self {
        self.system_qubits = Some(qubits.into_iter().collect());
        self
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        let mut written = vec![false; self.num_clbits];
        for inst in &self.instructions {
            match inst {
                Instruction::Measure { clbit, .. } => written[*clbit] = true,
                Instruction::Conditional { condition, .. } => {
                    if let Some(&c) = condition.clbits.iter().find(|&&c| !written[c]) {
                        return Err(CircuitError::UnwrittenClbit(c));
                    }
                }
                _ => {}
            }
        }
        let system_qubits = self
            .system_qubits
            .unwrap_or_else(|| (0..self.num_qubits).collect());
        if let Some(&q) = system_qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(CircuitError::QubitOutOfRange {
                index: q,
                limit: self.num_qubits,
            });
        }
        Ok(Circuit {
            name: self.name,
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            instructions: self.instructions,
            system_qubits,
            params: self.params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appends_in_order() {
        let mut b = CircuitBuilder::new(3, 1).unwrap();
        b.h(0).unwrap().cx(0, 1).unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.instructions().len(), 2);
        assert_eq!(c.instructions()[1], Instruction::gate(Gate::Cx, &[0, 1]));
    }

    #[test]
    fn rejects_bad_operands() {
        let mut b = CircuitBuilder::new(3, 1).unwrap();
        assert_eq!(b.cx(0, 0).unwrap_err(), CircuitError::DuplicateOperand(0));
        assert!(matches!(
            b.h(3),
            Err(CircuitError::QubitOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            b.measure(0, 1),
            Err(CircuitError::ClbitOutOfRange { .. })
        ));
        assert!(matches!(
            b.gate(Gate::Cx, &[0]),
            Err(CircuitError::Arity { .. })
        ));
        assert!(CircuitBuilder::new(0, 1).is_err());
    }

    #[test]
    fn condition_needs_earlier_writer() {
        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.conditional(Condition::bit(0), |body| body.x(1).map(|_| ()))
            .unwrap();
        b.measure(0, 0).unwrap();
        assert_eq!(b.build().unwrap_err(), CircuitError::UnwrittenClbit(0));
    }

    #[test]
    fn bodies_are_flat() {
        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.measure(0, 0).unwrap();
        let err = b
            .conditional(Condition::bit(0), |body| {
                body.measure(1, 0)?;
                Ok(())
            })
            .unwrap_err();
        assert_eq!(err, CircuitError::IllegalInBody);
        let nested = Instruction::Conditional {
            condition: Condition::bit(0),
            body: vec![Instruction::Conditional {
                condition: Condition::bit(0),
                body: vec![],
            }],
        };
        assert_eq!(b.push(nested).unwrap_err(), CircuitError::IllegalInBody);
    }

    #[test]
    fn system_qubits_default_and_range() {
        let c = CircuitBuilder::new(2, 1).unwrap().build().unwrap();
        assert_eq!(c.system_qubits().len(), 2);
        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.system_qubits([5]);
        assert!(b.build().is_err());
    }
}
