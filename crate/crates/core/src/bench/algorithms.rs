//! QFT with measurements, iterative phase estimation and Trotterized TFIM.

use std::f64::consts::TAU;

use super::{cphase, BenchError, IdealReference, Parts};
use crate::circuit::{parse_bits, CircuitBuilder, Condition};
use crate::counts::Distribution;
use crate::features::BranchModel;

/// Prepare `QFT|s⟩` with one phase per qubit, then undo the transform with
/// an inverse QFT whose first ⌈n/2⌉ qubits (all of them unless `partial`)
/// are measured mid-circuit and drive classically controlled phases.
///
/// Qubit `j` carries weight `2^j`; its outcome lands in clbit `n−1−j`, so
/// the register reads back as `s`.
pub(super) fn qft_m(n: usize, s: &str, partial: bool) -> Parts {
    if !(2..=64).contains(&n) {
        return Err(BenchError::Param {
            name: "n",
            reason: format!("QFT needs 2 to 64 qubits, got {n}"),
        });
    }
    let bits = parse_bits(s)
        .ok()
        .filter(|b| b.len() == n)
        .ok_or_else(|| BenchError::Param {
            name: "s",
            reason: format!("`{s}` is not a {n}-bit string"),
        })?;
    let value: u128 = bits
        .iter()
        .enumerate()
        .map(|(b, &v)| (v as u128) << b)
        .sum();
    let dynamic = |j: usize| !partial || j >= n - n.div_ceil(2);
    let clbit = |j: usize| n - 1 - j;

    let mut b = CircuitBuilder::new(n, n)?;
    for j in 0..n {
        b.h(j)?;
    }
    for j in 0..n {
        // Fractional part of s·2^j / 2^n.
        let span = 1u128 << (n - j);
        let frac = (value % span) as f64 / span as f64;
        b.p(TAU * frac, j)?;
    }
    for j in (0..n).rev() {
        for later in j + 1..n {
            let angle = -TAU / (1u128 << (later - j + 1)) as f64;
            if dynamic(later) {
                b.conditional(Condition::bit(clbit(later)), |body| {
                    body.p(angle, j).map(|_| ())
                })?;
            } else {
                cphase(&mut b, angle, later, j)?;
            }
        }
        b.h(j)?;
        if dynamic(j) {
            b.measure(j, clbit(j))?;
        }
    }
    for j in (0..n).filter(|&j| !dynamic(j)) {
        b.measure(j, clbit(j))?;
    }
    let kind = if partial { "partial_qft_m" } else { "qft_m" };
    b.name(&format!("{kind}_n{n}"));
    Ok((
        b.build()?,
        BranchModel::Uniform,
        IdealReference::Distribution {
            clbits: (0..n).collect(),
            dist: Distribution::point(s),
        },
    ))
}

/// The first `m` binary digits of `theta`, most significant first.
pub(crate) fn binary_digits(theta: f64, m: usize) -> String {
    let v = (theta * (1u64 << m) as f64).floor() as u64;
    (0..m)
        .map(|b| {
            if (v >> (m - 1 - b)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Phase estimation of `P(2πθ)` on its eigenstate `|1⟩` (qubit 1) with one
/// recycled ancilla (qubit 0). Round `k` reads digit `m−k+1` of θ into
/// clbit `m−k`, so the register spells θ's expansion.
pub(super) fn ipe(theta: f64, m: usize) -> Parts {
    if !(0.0..1.0).contains(&theta) {
        return Err(BenchError::Param {
            name: "theta",
            reason: format!("{theta} is outside [0, 1)"),
        });
    }
    if m == 0 || m > 52 {
        return Err(BenchError::Param {
            name: "m_bits",
            reason: format!("{m} is outside 1..=52"),
        });
    }
    let mut b = CircuitBuilder::new(2, m)?;
    b.x(1)?;
    for k in 1..=m {
        if k > 1 {
            b.reset(0)?;
        }
        b.h(0)?;
        let power = (theta * (1u64 << (m - k)) as f64).fract();
        cphase(&mut b, TAU * power, 0, 1)?;
        for earlier in 1..k {
            let angle = -TAU / (1u64 << (k - earlier + 1)) as f64;
            b.conditional(Condition::bit(m - earlier), |body| {
                body.rz(angle, 0).map(|_| ())
            })?;
        }
        b.h(0)?.measure(0, m - k)?;
    }
    b.name(&format!("ipe_m{m}")).param("theta", theta);
    Ok((
        b.build()?,
        BranchModel::Uniform,
        IdealReference::Distribution {
            clbits: (0..m).collect(),
            dist: Distribution::point(&binary_digits(theta, m)),
        },
    ))
}

/// Trotterized transverse-field Ising chain. Each step applies
/// `RX(2h·dt)` to every data qubit, then `RZZ(2J·dt)` on even bonds and on
/// odd bonds, each through the ancilla between the pair: the ancilla
/// collects the ZZ parity, rotates, and is X-measured and reset, leaving a
/// ZZ correction on the pair.
pub(super) fn tfim(n_data: usize, steps: usize, j: f64, h: f64, dt: f64) -> Parts {
    if n_data < 2 {
        return Err(BenchError::Param {
            name: "n_data",
            reason: format!("need at least 2 data qubits, got {n_data}"),
        });
    }
    for (name, v) in [("J", j), ("h", h), ("dt", dt)] {
        if !v.is_finite() {
            return Err(BenchError::Param {
                name,
                reason: format!("{v} is not finite"),
            });
        }
    }
    let n = 2 * n_data - 1;
    let data = |i: usize| 2 * i;
    let bonds = n_data - 1;
    let out = steps * bonds;
    let mut b = CircuitBuilder::new(n, out + n_data)?;
    let mut clbit = 0;
    for _ in 0..steps {
        for i in 0..n_data {
            b.rx(2.0 * h * dt, data(i))?;
        }
        for parity in [0, 1] {
            for i in (0..bonds).filter(|i| i % 2 == parity) {
                let a = 2 * i + 1;
                b.cx(data(i), a)?
                    .cx(data(i + 1), a)?
                    .rz(2.0 * j * dt, a)?
                    .h(a)?
                    .measure(a, clbit)?
                    .reset(a)?;
                b.conditional(Condition::bit(clbit), |body| {
                    body.z(data(i))?.z(data(i + 1))?;
                    Ok(())
                })?;
                clbit += 1;
            }
        }
    }
    for i in 0..n_data {
        b.measure(data(i), out + i)?;
    }
    b.name(&format!("tfim_n{n}"))
        .param("steps", steps as f64)
        .param("J", j)
        .param("h", h)
        .param("dt", dt);
    b.system_qubits((0..n_data).map(data));
    Ok((
        b.build()?,
        BranchModel::Uniform,
        IdealReference::Tfim {
            n_data,
            steps,
            j,
            h,
            dt,
            clbits: (out..out + n_data).collect(),
        },
    ))
}
