use super::BenchError;
use crate::circuit::{Gate, Instruction};
use crate::sim::{Letter, PauliString};

fn inverse(g: Gate) -> Gate {
    match g {
        Gate::S => Gate::Sdg,
        Gate::Sdg => Gate::S,
        other => other,
    }
}

/// Clifford gates taking `|0…0⟩` to the state stabilized by `generators`.
///
/// The generators are reduced to `±X_i` by conjugation with H, S†, CX, CZ
/// and SWAP (row operations leave the group unchanged). Preparing the
/// reduced state and undoing the reduction gives the target.
pub fn prepare_stabilizer_state(
    generators: &[PauliString],
) -> Result<Vec<Instruction>, BenchError> {
    let n = generators.len();
    let bad = |why: &str| BenchError::Synthesis(why.to_string());
    if generators.iter().any(|g| g.len() != n) {
        return Err(bad("need exactly one generator per qubit"));
    }
    for (i, a) in generators.iter().enumerate() {
        if generators[i + 1..].iter().any(|b| !a.commutes_with(b)) {
            return Err(bad("generators do not commute"));
        }
    }
    let mut rows = generators.to_vec();
    let mut gates: Vec<Instruction> = Vec::new();
    let mut apply = |rows: &mut Vec<PauliString>, g: Gate, qs: &[usize]| {
        for r in rows.iter_mut() {
            r.conjugate(&g, qs).expect("Clifford gate");
        }
        gates.push(Instruction::gate(g, qs));
    };
    for i in 0..n {
        let (r, j) = (i..n)
            .flat_map(|r| (i..n).map(move |j| (r, j)))
            .find(|&(r, j)| rows[r].letter(j) != Letter::I)
            .ok_or_else(|| bad("generators are not independent"))?;
        rows.swap(i, r);
        if j != i {
            apply(&mut rows, Gate::Swap, &[i, j]);
        }
        match rows[i].letter(i) {
            Letter::Z => apply(&mut rows, Gate::H, &[i]),
            Letter::Y => apply(&mut rows, Gate::Sdg, &[i]),
            _ => {}
        }
        for j in i + 1..n {
            if matches!(rows[i].letter(j), Letter::X | Letter::Y) {
                apply(&mut rows, Gate::Cx, &[i, j]);
            }
        }
        if rows[i].letter(i) == Letter::Y {
            apply(&mut rows, Gate::Sdg, &[i]);
        }
        for j in i + 1..n {
            if rows[i].letter(j) == Letter::Z {
                apply(&mut rows, Gate::Cz, &[i, j]);
            }
        }
        let pivot = rows[i].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != i && row.letter(i) != Letter::I {
                *row = row.mul_commuting(&pivot).expect("commuting rows");
            }
        }
    }
    let mut out = Vec::with_capacity(2 * n + gates.len());
    for (i, row) in rows.iter().enumerate() {
        if row.is_negative() {
            out.push(Instruction::gate(Gate::X, &[i]));
        }
        out.push(Instruction::gate(Gate::H, &[i]));
    }
    for inst in gates.into_iter().rev() {
        if let Instruction::Gate { gate, qubits } = inst {
            out.push(Instruction::Gate {
                gate: inverse(gate),
                qubits,
            });
        }
    }
    Ok(out)
}
