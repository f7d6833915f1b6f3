use super::{BranchModel, FeatureError};
use crate::circuit::{Circuit, Instruction};

struct Node {
    preds: Vec<usize>,
    weight: f64,
    two_q: f64,
}

/// Heaviest path through a DAG given in topological order. Ties on weight
/// prefer the path carrying more two-qubit weight.
fn heaviest_path(nodes: &[Node]) -> (f64, f64) {
    let mut best: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    let better = |a: (f64, f64), b: (f64, f64)| {
        a.0 > b.0 + 1e-12 || ((a.0 - b.0).abs() <= 1e-12 && a.1 > b.1)
    };
    let mut overall = (0.0, 0.0);
    for n in nodes {
        let mut from = (0.0, 0.0);
        for &p in &n.preds {
            if better(best[p], from) {
                from = best[p];
            }
        }
        let here = (from.0 + n.weight, from.1 + n.two_q);
        if better(here, overall) {
            overall = here;
        }
        best.push(here);
    }
    overall
}

/// Dependency DAG builder tracking the last node on each qubit and the last
/// writer of each clbit.
struct Dag {
    nodes: Vec<Node>,
    last_q: Vec<Option<usize>>,
    writer: Vec<Option<usize>>,
}

impl Dag {
    fn new(nq: usize, nc: usize) -> Dag {
        Dag {
            nodes: Vec::new(),
            last_q: vec![None; nq],
            writer: vec![None; nc],
        }
    }

    fn add(&mut self, inst: &Instruction, weight: f64, extra: Option<usize>) -> usize {
        let id = self.nodes.len();
        let qubits = inst.qubits();
        let mut preds: Vec<usize> = qubits.iter().filter_map(|&q| self.last_q[q]).collect();
        if let Instruction::Measure { clbit, .. } = inst {
            preds.extend(self.writer[*clbit]);
            self.writer[*clbit] = Some(id);
        }
        preds.extend(extra);
        let two_q = if inst.is_two_qubit_gate() {
            weight
        } else {
            0.0
        };
        self.nodes.push(Node {
            preds,
            weight,
            two_q,
        });
        for q in qubits {
            self.last_q[q] = Some(id);
        }
        id
    }
}

fn block_critical(insts: &[Instruction], nq: usize, nc: usize) -> f64 {
    let mut dag = Dag::new(nq, nc);
    for i in insts
        .iter()
        .filter(|i| !matches!(i, Instruction::Conditional { .. }))
    {
        dag.add(i, 1.0, None);
    }
    heaviest_path(&dag.nodes).1
}

fn two_qubit_count(insts: &[Instruction]) -> usize {
    insts.iter().filter(|i| i.is_two_qubit_gate()).count()
}

/// Share of two-qubit gates lying on the critical path.
///
/// Without feed-forward ordering the base circuit and each branch are
/// analysed separately and combined by branch probability. With it, a single
/// DAG is built in which each conditional adds a unit-weight feed-forward node
/// after the measurements it reads, followed by its body with node weights
/// equal to the branch probability.
pub fn critical_two_qubit(
    c: &Circuit,
    bm: &BranchModel,
    include_ff_ordering: bool,
) -> Result<f64, FeatureError> {
    let probs = bm.probabilities(c)?;
    let (nq, nc) = (c.num_qubits(), c.num_clbits());
    let total = two_qubit_count(c.instructions()) as f64
        + c.conditionals()
            .zip(&probs)
            .map(|((_, body), p)| p * two_qubit_count(body) as f64)
            .sum::<f64>();
    if total == 0.0 {
        return Ok(0.0);
    }
    let critical = if include_ff_ordering {
        let mut dag = Dag::new(nq, nc);
        let mut k = 0;
        for inst in c.instructions() {
            match inst {
                Instruction::Conditional { condition, body } => {
                    let p = probs[k];
                    k += 1;
                    let id = dag.nodes.len();
                    let preds = condition
                        .clbits
                        .iter()
                        .filter_map(|&b| dag.writer[b])
                        .collect();
                    dag.nodes.push(Node {
                        preds,
                        weight: 1.0,
                        two_q: 0.0,
                    });
                    for b in body {
                        dag.add(b, p, Some(id));
                    }
                }
                other => {
                    dag.add(other, 1.0, None);
                }
            }
        }
        heaviest_path(&dag.nodes).1
    } else {
        block_critical(c.instructions(), nq, nc)
            + c.conditionals()
                .zip(&probs)
                .map(|((_, body), p)| p * block_critical(body, nq, nc))
                .sum::<f64>()
    };
    Ok((critical / total).clamp(0.0, 1.0))
}

/// Symmetric interaction-probability matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CommMatrix {
    n: usize,
    a: Vec<f64>,
}

impl CommMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn degree(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j))
            .sum()
    }
}

/// Average normalized degree of the interaction graph. Repeated interactions
/// combine as `1 − Π(1 − p)`. With `include_classical`, branch gates also tie
/// their operands to the qubits whose measurements govern the branch.
pub fn communication(
    c: &Circuit,
    bm: &BranchModel,
    include_classical: bool,
) -> Result<(f64, CommMatrix), FeatureError> {
    let n = c.num_qubits();
    if n < 2 {
        return Err(FeatureError::TooFewQubits);
    }
    let probs = bm.probabilities(c)?;
    let mut miss = vec![1.0; n * n];
    let mut link = |i: usize, j: usize, p: f64| {
        if i != j {
            miss[i * n + j] *= 1.0 - p;
            miss[j * n + i] *= 1.0 - p;
        }
    };
    let mut measured_by = vec![None; c.num_clbits()];
    let mut k = 0;
    for inst in c.instructions() {
        match inst {
            Instruction::Gate { qubits, .. } if qubits.len() == 2 => {
                link(qubits[0], qubits[1], 1.0)
            }
            Instruction::Measure { qubit, clbit } => measured_by[*clbit] = Some(*qubit),
            Instruction::Conditional { condition, body } => {
                let p = probs[k];
                k += 1;
                if !include_classical {
                    continue;
                }
                let sources: Vec<usize> = condition
                    .clbits
                    .iter()
                    .filter_map(|&b| measured_by[b])
                    .collect();
                for g in body {
                    if let Instruction::Gate { qubits, .. } = g {
                        if qubits.len() == 2 {
                            link(qubits[0], qubits[1], p);
                        }
                        for &q in qubits {
                            for &m in &sources {
                                link(q, m, p);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    let a: Vec<f64> = miss.iter().map(|m| 1.0 - m).collect();
    let m = CommMatrix { n, a };
    let total: f64 = (0..n).map(|i| m.degree(i)).sum();
    Ok((total / (n * (n - 1)) as f64, m))
}

/// ASAP depth with every conditional body inlined after the measurements it
/// reads, as a static compiler would report it.
pub fn sota_depth(c: &Circuit) -> usize {
    let mut qfree = vec![0usize; c.num_qubits()];
    let mut cfree = vec![0usize; c.num_clbits()];
    let mut depth = 0;
    let mut place = |qs: &[usize], floor: usize, qfree: &mut Vec<usize>| {
        let layer = qs.iter().map(|&q| qfree[q]).max().unwrap_or(0).max(floor);
        for &q in qs {
            qfree[q] = layer + 1;
        }
        depth = depth.max(layer + 1);
        layer
    };
    for inst in c.instructions() {
        match inst {
            Instruction::Conditional { condition, body } => {
                let floor = condition
                    .clbits
                    .iter()
                    .map(|&b| cfree[b])
                    .max()
                    .unwrap_or(0);
                for b in body {
                    place(&b.qubits(), floor, &mut qfree);
                }
            }
            Instruction::Measure { qubit, clbit } => {
                let layer = place(&[*qubit], cfree[*clbit], &mut qfree);
                cfree[*clbit] = layer + 1;
            }
            other => {
                place(&other.qubits(), 0, &mut qfree);
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parity_example, CircuitBuilder, Condition};

    #[test]
    fn critical_examples() {
        let u = BranchModel::Uniform;
        assert_eq!(
            critical_two_qubit(&parity_example(), &u, false).unwrap(),
            1.0
        );
        assert_eq!(
            critical_two_qubit(&parity_example(), &u, true).unwrap(),
            1.0
        );

        let mut b = CircuitBuilder::new(4, 1).unwrap();
        b.cx(0, 1).unwrap().cx(2, 3).unwrap();
        assert_eq!(
            critical_two_qubit(&b.build().unwrap(), &u, false).unwrap(),
            0.5
        );

        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.h(0).unwrap();
        assert_eq!(
            critical_two_qubit(&b.build().unwrap(), &u, true).unwrap(),
            0.0
        );
    }

    #[test]
    fn critical_prefers_two_qubit_ties() {
        // Two length-2 paths; only one carries a CX.
        let mut b = CircuitBuilder::new(4, 1).unwrap();
        b.h(0)
            .unwrap()
            .h(0)
            .unwrap()
            .h(2)
            .unwrap()
            .cx(2, 3)
            .unwrap();
        assert_eq!(
            critical_two_qubit(&b.build().unwrap(), &BranchModel::Uniform, false).unwrap(),
            1.0
        );
    }

    #[test]
    fn ff_ordering_can_move_the_critical_path() {
        // Base: a 3-CX chain (length 3) beside H-measure (length 2). The
        // feed-forward layer plus branch makes the measured path longest.
        let mut b = CircuitBuilder::new(3, 1).unwrap();
        b.cx(1, 2)
            .unwrap()
            .cx(1, 2)
            .unwrap()
            .cx(1, 2)
            .unwrap()
            .h(0)
            .unwrap()
            .measure(0, 0)
            .unwrap();
        b.conditional(Condition::bit(0), |body| body.x(0).map(|_| ()))
            .unwrap();
        let c = b.build().unwrap();
        let u = BranchModel::Uniform;
        assert_eq!(critical_two_qubit(&c, &u, false).unwrap(), 1.0);
        assert_eq!(critical_two_qubit(&c, &u, true).unwrap(), 0.0);
    }

    #[test]
    fn communication_examples() {
        let u = BranchModel::Uniform;
        let (q, m) = communication(&parity_example(), &u, false).unwrap();
        assert!((q - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(0, 2), 0.0);
        let (qc, m) = communication(&parity_example(), &u, true).unwrap();
        assert!((qc - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(m.get(1, 2), 1.0);

        let mut b = CircuitBuilder::new(2, 1).unwrap();
        b.cx(0, 1).unwrap();
        assert_eq!(communication(&b.build().unwrap(), &u, true).unwrap().0, 1.0);
        let empty = CircuitBuilder::new(3, 1).unwrap().build().unwrap();
        assert_eq!(communication(&empty, &u, true).unwrap().0, 0.0);
        let one = CircuitBuilder::new(1, 1).unwrap().build().unwrap();
        assert!(communication(&one, &u, false).is_err());
    }

    #[test]
    fn classical_links_use_branch_probability() {
        let mut b = CircuitBuilder::new(3, 1).unwrap();
        b.measure(0, 0).unwrap();
        b.conditional(Condition::bit(0), |body| body.x(2).map(|_| ()))
            .unwrap();
        b.conditional(Condition::bit(0), |body| body.x(2).map(|_| ()))
            .unwrap();
        let c = b.build().unwrap();
        let (_, m) = communication(&c, &BranchModel::Uniform, true).unwrap();
        assert!((m.get(0, 2) - 0.75).abs() < 1e-12);
        assert_eq!(m.get(0, 2), m.get(2, 0));
    }
}
