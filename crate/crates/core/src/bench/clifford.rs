//! GHZ preparation and constant-depth Clifford gates.
//!
//! All constructions teleport parities through measured ancillas: a
//! Z-measured ancilla reveals a parity that is undone with X corrections,
//! an X-measured ancilla leaves a phase that is undone with Z corrections.

use super::{odd_parity, BenchError, Family, IdealReference, Parts};
use crate::circuit::{CircuitBuilder, Gate};
use crate::counts::Distribution;
use crate::features::BranchModel;

pub(crate) fn ghz_distribution(n: usize) -> Distribution {
    Distribution::from_probs([("0".repeat(n), 0.5), ("1".repeat(n), 0.5)]).expect("normalized")
}

fn too_small(family: Family, expected: &'static str, got: usize) -> BenchError {
    BenchError::Size {
        family,
        expected,
        got,
    }
}

pub(super) fn ghz(n_data: usize) -> Parts {
    if n_data < 2 {
        return Err(too_small(
            Family::Ghz,
            "at least 2 data qubits (3 in total)",
            2 * n_data.max(1) - 1,
        ));
    }
    let n = 2 * n_data - 1;
    let m = n_data - 1;
    let data = |k: usize| 2 * k;
    let anc = |k: usize| 2 * k + 1;
    let mut b = CircuitBuilder::new(n, m + n_data)?;
    for k in 0..n_data {
        b.h(data(k))?;
    }
    for k in 0..m {
        b.cx(data(k), anc(k))?;
    }
    for k in 0..m {
        b.cx(data(k + 1), anc(k))?;
    }
    for k in 0..m {
        b.measure(anc(k), k)?;
    }
    // Data qubit j differs from qubit 0 by the parity of the first j checks.
    for j in 1..n_data {
        let bits: Vec<usize> = (0..j).collect();
        b.conditional(odd_parity(&bits), |body| body.x(data(j)).map(|_| ()))?;
    }
    for j in 0..n_data {
        b.measure(data(j), m + j)?;
    }
    b.name(&format!("ghz_n{n}"))
        .system_qubits((0..n_data).map(data));
    let out: Vec<usize> = (m..m + n_data).collect();
    Ok((
        b.build()?,
        BranchModel::Uniform,
        IdealReference::Distribution {
            clbits: out,
            dist: ghz_distribution(n_data),
        },
    ))
}

/// GHZ over every qubit: parity checks on the even qubits, then the reset
/// checkers are entangled in as extra GHZ members.
pub(super) fn ghz_reset(n: usize) -> Parts {
    if n < 2 {
        return Err(too_small(Family::GhzReset, "at least 2 qubits", n));
    }
    let n_even = n.div_ceil(2);
    let m = n_even - 1;
    let data = |k: usize| 2 * k;
    let anc = |k: usize| 2 * k + 1;
    let mut b = CircuitBuilder::new(n, m + n)?;
    for k in 0..n_even {
        b.h(data(k))?;
    }
    for k in 0..m {
        b.cx(data(k), anc(k))?;
    }
    for k in 0..m {
        b.cx(data(k + 1), anc(k))?;
    }
    for k in 0..m {
        b.measure(anc(k), k)?.reset(anc(k))?;
    }
    for j in 1..n_even {
        let bits: Vec<usize> = (0..j).collect();
        b.conditional(odd_parity(&bits), |body| body.x(data(j)).map(|_| ()))?;
    }
    for k in 0..m {
        b.cx(data(k), anc(k))?;
    }
    if n.is_multiple_of(2) {
        b.cx(data(n_even - 1), n - 1)?;
    }
    for q in 0..n {
        b.measure(q, m + q)?;
    }
    b.name(&format!("ghz_reset_n{n}"));
    Ok((
        b.build()?,
        BranchModel::Uniform,
        IdealReference::Distribution {
            clbits: (m..m + n).collect(),
            dist: ghz_distribution(n),
        },
    ))
}

fn clifford_reference(
    data: Vec<usize>,
    clbits: Vec<usize>,
    ops: &[(Gate, [usize; 2])],
) -> Result<IdealReference, BenchError> {
    let mut u = CircuitBuilder::new(data.len(), 1)?;
    for (g, qs) in ops {
        u.gate(*g, &qs[..g.arity()])?;
    }
    Ok(IdealReference::Clifford {
        data,
        clbits,
        unitary: u.build()?,
    })
}

/// Shared tail of both long-range CNOT variants: corrections, data readout
/// and metadata.
fn lr_cnot_finish(
    mut b: CircuitBuilder,
    name: String,
    linkers: &[usize],
    holders: &[usize],
) -> Parts {
    let n = b.num_qubits();
    let (c, t) = (0, n - 1);
    b.conditional(odd_parity(linkers), |body| body.x(t).map(|_| ()))?;
    b.conditional(odd_parity(holders), |body| body.z(c).map(|_| ()))?;
    let out = b.num_clbits() - 2;
    b.measure(c, out)?.measure(t, out + 1)?;
    b.name(&name).system_qubits([c, t]);
    let reference = clifford_reference(vec![c, t], vec![out, out + 1], &[(Gate::Cx, [0, 1])])?;
    Ok((b.build()?, BranchModel::Uniform, reference))
}

/// CNOT(0 → n−1) through a chain of Bell pairs; every intermediate qubit is
/// measured. For an odd ancilla count the first ancilla holds a copy of the
/// control.
pub(super) fn lr_cnot(n: usize) -> Parts {
    if n < 4 {
        return Err(too_small(Family::LrCnot, "at least 4 qubits", n));
    }
    let (c, t) = (0, n - 1);
    let m = n - 2;
    let copy = m % 2 == 1;
    let first = if copy { 2 } else { 1 };
    let pairs: Vec<(usize, usize)> = (0..(m - copy as usize) / 2)
        .map(|i| (first + 2 * i, first + 2 * i + 1))
        .collect();
    let mut b = CircuitBuilder::new(n, m + 2)?;
    if copy {
        b.cx(c, 1)?;
    }
    for &(u, _) in &pairs {
        b.h(u)?;
    }
    for &(u, v) in &pairs {
        b.cx(u, v)?;
    }
    b.cx(if copy { 1 } else { c }, pairs[0].0)?;
    for w in pairs.windows(2) {
        b.cx(w[0].1, w[1].0)?;
    }
    b.cx(pairs[pairs.len() - 1].1, t)?;
    let mut clbit = 0;
    let mut linkers = Vec::new();
    for &(u, _) in &pairs {
        b.measure(u, clbit)?;
        linkers.push(clbit);
        clbit += 1;
    }
    let holder_qubits: Vec<usize> = copy
        .then_some(1)
        .into_iter()
        .chain(pairs.iter().map(|p| p.1))
        .collect();
    let mut holders = Vec::new();
    for &q in &holder_qubits {
        b.h(q)?.measure(q, clbit)?;
        holders.push(clbit);
        clbit += 1;
    }
    lr_cnot_finish(b, format!("lr_cnot_n{n}"), &linkers, &holders)
}

/// Sparse variant: ancillas come in units of linker, holder and relay. The
/// relay carries the holder's value onward and is uncomputed instead of
/// measured, so only two of every three ancillas are measured.
pub(super) fn lr_cnot_sparse(n: usize) -> Parts {
    if n < 5 {
        return Err(too_small(Family::LrCnotSparse, "at least 5 qubits", n));
    }
    let (c, t) = (0, n - 1);
    let m = n - 2;
    let r = m % 3;
    let units: Vec<[usize; 3]> = (0..m / 3)
        .map(|i| {
            let s = 1 + r + 3 * i;
            [s, s + 1, s + 2]
        })
        .collect();
    // Relays are never measured.
    let mut b = CircuitBuilder::new(n, 2 * units.len() + r + 2)?;
    let mut linker_q = Vec::new();
    let mut holder_q = Vec::new();
    // A leading remainder of one or two ancillas becomes a copy of the
    // control or a dense Bell pair.
    let prev = match r {
        0 => c,
        1 => {
            b.cx(c, 1)?;
            holder_q.push(1);
            1
        }
        _ => {
            b.h(1)?.cx(1, 2)?.cx(c, 1)?;
            linker_q.push(1);
            holder_q.push(2);
            2
        }
    };
    for &[l, h, _] in &units {
        b.h(l)?.cx(l, h)?;
    }
    for &[_, h, relay] in &units {
        b.cx(h, relay)?;
    }
    b.cx(prev, units[0][0])?;
    for w in units.windows(2) {
        b.cx(w[0][2], w[1][0])?;
    }
    b.cx(units[units.len() - 1][2], t)?;
    for &[l, h, relay] in &units {
        b.cx(h, relay)?;
        linker_q.push(l);
        holder_q.push(h);
    }
    let mut clbit = 0;
    let mut linkers = Vec::new();
    for &q in &linker_q {
        b.measure(q, clbit)?;
        linkers.push(clbit);
        clbit += 1;
    }
    let mut holders = Vec::new();
    for &q in &holder_q {
        b.h(q)?.measure(q, clbit)?;
        holders.push(clbit);
        clbit += 1;
    }
    lr_cnot_finish(b, format!("lr_cnot_sparse_n{n}"), &linkers, &holders)
}

/// Ladder gadget on `data` with the ancilla between each neighbouring pair.
/// Realises CX(d0,d1)·CX(d1,d2)·… (applied left to right) as a Hadamard
/// conjugate of the parallel update `d_j ^= d_{j+1}`.
fn ladder_gadget(
    b: &mut CircuitBuilder,
    data: &[usize],
    anc: &[usize],
    first_clbit: usize,
) -> Result<(), BenchError> {
    let k = anc.len();
    for &d in data {
        b.h(d)?;
    }
    for j in 0..k {
        b.cx(data[j + 1], anc[j])?;
    }
    for j in 0..k {
        b.cx(anc[j], data[j])?;
    }
    for &d in data {
        b.h(d)?;
    }
    for (j, &a) in anc.iter().enumerate() {
        b.h(a)?.measure(a, first_clbit + j)?;
    }
    for i in 1..=k {
        let bits: Vec<usize> = (first_clbit..first_clbit + i).collect();
        b.conditional(odd_parity(&bits), |body| body.x(data[i]).map(|_| ()))?;
    }
    Ok(())
}

fn odd_chain(family: Family, n: usize, min: usize) -> Result<usize, BenchError> {
    if n < min || n.is_multiple_of(2) {
        let expected = if min == 3 {
            "an odd count of at least 3"
        } else {
            "an odd count of at least 5"
        };
        return Err(too_small(family, expected, n));
    }
    Ok((n - 1) / 2)
}

pub(super) fn cnot_ladder(n: usize) -> Parts {
    let k = odd_chain(Family::CnotLadder, n, 3)?;
    let data: Vec<usize> = (0..=k).map(|j| 2 * j).collect();
    let anc: Vec<usize> = (0..k).map(|j| 2 * j + 1).collect();
    let mut b = CircuitBuilder::new(n, 2 * k + 1)?;
    ladder_gadget(&mut b, &data, &anc, 0)?;
    for (j, &d) in data.iter().enumerate() {
        b.measure(d, k + j)?;
    }
    b.name(&format!("cnot_ladder_n{n}"))
        .system_qubits(data.iter().copied());
    let ops: Vec<(Gate, [usize; 2])> = (0..k).map(|j| (Gate::Cx, [j, j + 1])).collect();
    let reference = clifford_reference(data, (k..2 * k + 1).collect(), &ops)?;
    Ok((b.build()?, BranchModel::Uniform, reference))
}

/// Fanout from data qubit 0 as an inverse ladder on the targets followed by
/// a full ladder. The inverse ladder is the parallel update
/// `d_j ^= d_{j−1}` (j ≥ 2), done through X-measured copies.
pub(super) fn fanout(n: usize) -> Parts {
    let k = odd_chain(Family::Fanout, n, 5)?;
    let data: Vec<usize> = (0..=k).map(|j| 2 * j).collect();
    let anc: Vec<usize> = (0..k).map(|j| 2 * j + 1).collect();
    let mut b = CircuitBuilder::new(n, (k - 1) + k + (k + 1))?;
    for j in 2..=k {
        b.cx(data[j - 1], anc[j - 1])?;
    }
    for j in 2..=k {
        b.cx(anc[j - 1], data[j])?;
    }
    for m in 1..k {
        b.h(anc[m])?.measure(anc[m], m - 1)?.reset(anc[m])?;
    }
    // The copy of d_m left a phase on the prefix d_1..d_m of the new values.
    for i in 1..k {
        let bits: Vec<usize> = (i..k).map(|m| m - 1).collect();
        b.conditional(odd_parity(&bits), |body| body.z(data[i]).map(|_| ()))?;
    }
    ladder_gadget(&mut b, &data, &anc, k - 1)?;
    let out = (k - 1) + k;
    for (j, &d) in data.iter().enumerate() {
        b.measure(d, out + j)?;
    }
    b.name(&format!("fanout_n{n}"))
        .system_qubits(data.iter().copied());
    let ops: Vec<(Gate, [usize; 2])> = (1..=k).map(|j| (Gate::Cx, [0, j])).collect();
    let reference = clifford_reference(data, (out..out + k + 1).collect(), &ops)?;
    Ok((b.build()?, BranchModel::Uniform, reference))
}
