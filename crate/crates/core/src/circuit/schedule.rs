use super::{Circuit, Instruction};

/// ASAP layering of a circuit's base instructions plus per-branch depths.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSchedule {
    /// Instruction indices (into `Circuit::instructions`) per base layer.
    pub base_layers: Vec<Vec<usize>>,
    /// Base layer of each top-level instruction; `None` for conditionals.
    pub layer_of: Vec<Option<usize>>,
    /// `l_mcm`: base layers holding at least one mid-circuit measurement.
    pub mcm_layer_count: usize,
    /// `l_ff`: one layer per conditional when feed-forward counting is on.
    pub ff_layer_count: usize,
    /// Depth `D_i` of each conditional body, in program order.
    pub branch_depths: Vec<usize>,
    pub base_depth: usize,
}

impl LayeredSchedule {
    /// `D_base + l_ff + expected_branch`, where the caller supplies the
    /// probability-weighted branch depth.
    pub fn total_depth(&self, expected_branch: f64) -> f64 {
        (self.base_depth + self.ff_layer_count) as f64 + expected_branch
    }
}

/// Layer indices for a flat instruction list, skipping conditionals.
/// Measurements also occupy their clbit so repeated writes serialize.
pub(crate) fn asap(
    insts: &[Instruction],
    num_qubits: usize,
    num_clbits: usize,
) -> (Vec<Option<usize>>, usize) {
    let mut qfree = vec![0usize; num_qubits];
    let mut cfree = vec![0usize; num_clbits];
    let mut depth = 0;
    let layers = insts
        .iter()
        .map(|inst| {
            let (qs, cb): (Vec<usize>, Option<usize>) = match inst {
                Instruction::Gate { qubits, .. } => (qubits.clone(), None),
                Instruction::Measure { qubit, clbit } => (vec![*qubit], Some(*clbit)),
                Instruction::Reset { qubit } => (vec![*qubit], None),
                Instruction::Conditional { .. } => return None,
            };
            let mut layer = qs.iter().map(|&q| qfree[q]).max().unwrap_or(0);
            if let Some(c) = cb {
                layer = layer.max(cfree[c]);
                cfree[c] = layer + 1;
            }
            for &q in &qs {
                qfree[q] = layer + 1;
            }
            depth = depth.max(layer + 1);
            Some(layer)
        })
        .collect();
    (layers, depth)
}

/// For each top-level instruction, whether it is a measurement that some later
/// instruction depends on (a mid-circuit measurement). A measurement is final
/// when nothing later touches its qubit and no later condition reads its clbit.
pub(crate) fn mid_circuit_flags(insts: &[Instruction]) -> Vec<bool> {
    insts
        .iter()
        .enumerate()
        .map(|(i, inst)| match inst {
            Instruction::Measure { qubit, clbit } => insts[i + 1..].iter().any(|later| {
                later.qubits().contains(qubit)
                    || matches!(later, Instruction::Conditional { condition, .. } if condition.clbits.contains(clbit))
            }),
            _ => false,
        })
        .collect()
}

pub fn layer_schedule(c: &Circuit, include_ff: bool) -> LayeredSchedule {
    let insts = c.instructions();
    let (layer_of, base_depth) = asap(insts, c.num_qubits(), c.num_clbits());
    let mut base_layers = vec![Vec::new(); base_depth];
    for (i, l) in layer_of.iter().enumerate() {
        if let Some(l) = l {
            base_layers[*l].push(i);
        }
    }
    let mcm = mid_circuit_flags(insts);
    let mcm_layer_count = base_layers
        .iter()
        .filter(|layer| layer.iter().any(|&i| mcm[i]))
        .count();
    let branch_depths: Vec<usize> = c
        .conditionals()
        .map(|(_, body)| asap(body, c.num_qubits(), c.num_clbits()).1)
        .collect();
    LayeredSchedule {
        base_layers,
        layer_of,
        mcm_layer_count,
        ff_layer_count: if include_ff { branch_depths.len() } else { 0 },
        branch_depths,
        base_depth,
    }
}

/// Drop terminal measurements, keeping any measurement whose qubit is reused
/// or whose clbit feeds a later condition.
pub fn strip_final_measurements(c: &Circuit) -> Circuit {
    let mcm = mid_circuit_flags(c.instructions());
    let kept: Vec<Instruction> = c
        .instructions()
        .iter()
        .zip(&mcm)
        .filter(|(inst, &is_mcm)| is_mcm || !matches!(inst, Instruction::Measure { .. }))
        .map(|(inst, _)| inst.clone())
        .collect();
    c.with_instructions(kept)
        .expect("removing terminal measurements preserves validity")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitClasses {
    /// Qubits idle after their last mid-circuit measurement, each with the
    /// number of base layers preceding that measurement.
    pub measured: Vec<(usize, usize)>,
    /// All other qubits.
    pub live: Vec<usize>,
}

impl QubitClasses {
    pub fn n1(&self) -> usize {
        self.measured.len()
    }
    pub fn n2(&self) -> usize {
        self.live.len()
    }
    pub fn pre_depths(&self) -> Vec<usize> {
        self.measured.iter().map(|&(_, d)| d).collect()
    }
}

/// Split qubits into `n1` (measured and never touched again) and `n2`.
/// Intended for circuits already passed through [`strip_final_measurements`].
pub fn classify_qubits(c: &Circuit) -> QubitClasses {
    let insts = c.instructions();
    let (layer_of, _) = asap(insts, c.num_qubits(), c.num_clbits());
    let mut measured = Vec::new();
    let mut live = Vec::new();
    for q in 0..c.num_qubits() {
        let last_touch = insts.iter().rposition(|i| i.qubits().contains(&q));
        match last_touch.map(|i| (i, &insts[i])) {
            Some((i, Instruction::Measure { .. })) => {
                measured.push((q, layer_of[i].expect("measure is a base op")))
            }
            _ => live.push(q),
        }
    }
    QubitClasses { measured, live }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parity_example, CircuitBuilder, Condition};

    #[test]
    fn parity_example_layers() {
        let s = layer_schedule(&parity_example(), true);
        assert_eq!(s.base_depth, 4);
        assert_eq!(s.mcm_layer_count, 1);
        assert_eq!(s.ff_layer_count, 1);
        assert_eq!(s.branch_depths, vec![1]);
        assert_eq!(s.base_layers, vec![vec![0, 1], vec![2], vec![3], vec![4]]);
        assert_eq!(layer_schedule(&parity_example(), false).ff_layer_count, 0);
    }

    #[test]
    fn trivial_layers() {
        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.h(0).unwrap();
        let s = layer_schedule(&b.clone().build().unwrap(), true);
        assert_eq!(
            (s.base_depth, s.mcm_layer_count, s.ff_layer_count),
            (1, 0, 0)
        );
        b.h(1).unwrap();
        assert_eq!(layer_schedule(&b.build().unwrap(), false).base_depth, 1);
    }

    #[test]
    fn strip_rules() {
        let mut b = CircuitBuilder::new(2, 2).unwrap();
        b.h(0)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .measure(0, 0)
            .unwrap()
            .measure(1, 1)
            .unwrap();
        let bell = b.build().unwrap();
        assert_eq!(strip_final_measurements(&bell).instructions().len(), 2);

        assert_eq!(
            strip_final_measurements(&parity_example()),
            parity_example()
        );

        let mut b = CircuitBuilder::new(1, 1).unwrap();
        b.h(0).unwrap().measure(0, 0).unwrap().reset(0).unwrap();
        let c = b.build().unwrap();
        assert_eq!(strip_final_measurements(&c).instructions().len(), 3);
    }

    #[test]
    fn body_use_keeps_measurement() {
        let mut b = CircuitBuilder::new(2, 2).unwrap();
        b.measure(0, 0).unwrap().measure(1, 1).unwrap();
        b.conditional(Condition::bit(1), |body| body.x(0).map(|_| ()))
            .unwrap();
        let c = b.build().unwrap();
        // q0 is touched by the branch, c1 is read by it: both measurements stay
        assert_eq!(strip_final_measurements(&c).instructions().len(), 3);
    }

    #[test]
    fn classify() {
        let c = strip_final_measurements(&parity_example());
        let k = classify_qubits(&c);
        assert_eq!(k.n1(), 1);
        assert_eq!(k.measured, vec![(1, 3)]);
        assert_eq!(k.n2(), 2);

        let mut b = CircuitBuilder::new(3, 1).unwrap();
        b.h(0).unwrap();
        let k = classify_qubits(&b.build().unwrap());
        assert_eq!((k.n1(), k.n2()), (0, 3));
    }
}
