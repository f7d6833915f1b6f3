//! Exact check of direct fidelity estimation on small Clifford benchmarks.
//!
//! A dense density-matrix simulator, written independently of the crate's
//! shot simulator, evaluates (a) the exact expectation of every DFE circuit
//! over all 4^k Paulis and (b) the process fidelity of the benchmark's
//! effective channel on its data qubits, `(1/d³) Σ_P Tr(U P U† Λ(P))`.
//! Under Pauli noise the two must agree.

use std::collections::BTreeMap;

use dynabench::bench::{Family, FamilyParams, GeneratedBenchmark, IdealReference};
use dynabench::circuit::{strip_final_measurements, Gate, Instruction};
use dynabench::scoring::{dfe_experiment, Readout};
use dynabench::sim::{Letter, NoiseModel, PauliString};
use num_complex::Complex64 as C;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

type Mat2 = [[C; 2]; 2];

fn mat1(g: Gate) -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::H => [
            [C::new(h, 0.0), C::new(h, 0.0)],
            [C::new(h, 0.0), C::new(-h, 0.0)],
        ],
        Gate::X => [[ZERO, ONE], [ONE, ZERO]],
        Gate::Y => [[ZERO, -I], [I, ZERO]],
        Gate::Z => [[ONE, ZERO], [ZERO, -ONE]],
        Gate::S => [[ONE, ZERO], [ZERO, I]],
        Gate::Sdg => [[ONE, ZERO], [ZERO, -I]],
        other => panic!("no oracle matrix for {other:?}"),
    }
}

fn letter_mat(l: Letter) -> Mat2 {
    match l {
        Letter::I => [[ONE, ZERO], [ZERO, ONE]],
        Letter::X => mat1(Gate::X),
        Letter::Y => mat1(Gate::Y),
        Letter::Z => mat1(Gate::Z),
    }
}

/// Row-major `d×d` operator; bit `q` of a basis index is qubit `q`.
#[derive(Clone, Debug)]
struct Op {
    d: usize,
    m: Vec<C>,
}

impl Op {
    fn zeros(n: usize) -> Op {
        let d = 1 << n;
        Op {
            d,
            m: vec![ZERO; d * d],
        }
    }

    fn add_scaled(&mut self, other: &Op, w: f64) {
        for (a, b) in self.m.iter_mut().zip(&other.m) {
            *a += b * w;
        }
    }

    fn scaled(&self, w: f64) -> Op {
        Op {
            d: self.d,
            m: self.m.iter().map(|x| x * w).collect(),
        }
    }

    fn trace(&self) -> C {
        (0..self.d).map(|i| self.m[i * self.d + i]).sum()
    }

    /// `U ρ U†` for a single-qubit `U` on qubit `q`.
    fn conj1(&self, q: usize, u: &Mat2) -> Op {
        let d = self.d;
        let bit = 1 << q;
        let mut left = self.m.clone();
        for i0 in (0..d).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            for c in 0..d {
                let (a, b) = (self.m[i0 * d + c], self.m[i1 * d + c]);
                left[i0 * d + c] = u[0][0] * a + u[0][1] * b;
                left[i1 * d + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        let mut out = left.clone();
        for r in 0..d {
            for j0 in (0..d).filter(|j| j & bit == 0) {
                let j1 = j0 | bit;
                let (a, b) = (left[r * d + j0], left[r * d + j1]);
                out[r * d + j0] = a * u[0][0].conj() + b * u[0][1].conj();
                out[r * d + j1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
        Op { d, m: out }
    }

    /// `G ρ G†` for a two-qubit gate acting as a signed basis permutation.
    fn conj2(&self, g: Gate, a: usize, b: usize) -> Op {
        let map = |i: usize| -> (usize, f64) {
            let (ba, bb) = ((i >> a) & 1, (i >> b) & 1);
            match g {
                Gate::Cx => (if ba == 1 { i ^ (1 << b) } else { i }, 1.0),
                Gate::Cz => (i, if ba == 1 && bb == 1 { -1.0 } else { 1.0 }),
                Gate::Swap => (if ba != bb { i ^ (1 << a) ^ (1 << b) } else { i }, 1.0),
                other => panic!("no oracle permutation for {other:?}"),
            }
        };
        let d = self.d;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let (fi, si) = map(i);
            for j in 0..d {
                let (fj, sj) = map(j);
                out[fi * d + fj] = self.m[i * d + j] * (si * sj);
            }
        }
        Op { d, m: out }
    }

    fn project(&self, q: usize, value: bool) -> Op {
        let d = self.d;
        let keep = |i: usize| ((i >> q) & 1 == 1) == value;
        let mut out = self.m.clone();
        for i in 0..d {
            for j in 0..d {
                if !keep(i) || !keep(j) {
                    out[i * d + j] = ZERO;
                }
            }
        }
        Op { d, m: out }
    }
}

fn depolarize1(rho: &Op, q: usize, p: f64) -> Op {
    if p == 0.0 {
        return rho.clone();
    }
    let mut out = rho.scaled(1.0 - p);
    for l in [Letter::X, Letter::Y, Letter::Z] {
        out.add_scaled(&rho.conj1(q, &letter_mat(l)), p / 3.0);
    }
    out
}

fn depolarize2(rho: &Op, a: usize, b: usize, p: f64) -> Op {
    if p == 0.0 {
        return rho.clone();
    }
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut out = rho.scaled(1.0 - p);
    for la in letters {
        for lb in letters {
            if la == Letter::I && lb == Letter::I {
                continue;
            }
            let term = rho.conj1(a, &letter_mat(la)).conj1(b, &letter_mat(lb));
            out.add_scaled(&term, p / 15.0);
        }
    }
    out
}

/// Classical register contents mapped to the (unnormalized) quantum state
/// conditioned on them.
type Branches = BTreeMap<Vec<bool>, Op>;

fn apply(branches: Branches, inst: &Instruction, nm: &NoiseModel) -> Branches {
    let mut out = Branches::new();
    let mut add = |reg: Vec<bool>, op: Op| match out.get_mut(&reg) {
        Some(existing) => existing.add_scaled(&op, 1.0),
        None => {
            out.insert(reg, op);
        }
    };
    for (reg, rho) in branches {
        match inst {
            Instruction::Gate { gate, qubits } if qubits.len() == 1 => {
                add(
                    reg,
                    depolarize1(&rho.conj1(qubits[0], &mat1(*gate)), qubits[0], nm.p1),
                );
            }
            Instruction::Gate { gate, qubits } => {
                let (a, b) = (qubits[0], qubits[1]);
                add(reg, depolarize2(&rho.conj2(*gate, a, b), a, b, nm.p2));
            }
            Instruction::Measure { qubit, clbit } => {
                for outcome in [false, true] {
                    let projected = rho.project(*qubit, outcome);
                    for (recorded, w) in [(outcome, 1.0 - nm.pm), (!outcome, nm.pm)] {
                        if w > 0.0 {
                            let mut r = reg.clone();
                            r[*clbit] = recorded;
                            add(r, projected.scaled(w));
                        }
                    }
                }
            }
            Instruction::Reset { qubit } => {
                let mut r = rho.project(*qubit, false);
                r.add_scaled(
                    &rho.project(*qubit, true).conj1(*qubit, &mat1(Gate::X)),
                    1.0,
                );
                add(reg, r);
            }
            Instruction::Conditional { condition, body } => {
                if condition.eval(&reg) {
                    let mut inner = Branches::from([(reg, rho)]);
                    for b in body {
                        inner = apply(inner, b, nm);
                    }
                    for (r, op) in inner {
                        add(r, op);
                    }
                } else {
                    add(reg, rho);
                }
            }
        }
    }
    out
}

fn run(insts: &[Instruction], init: Op, num_clbits: usize, nm: &NoiseModel) -> Branches {
    let mut branches = Branches::from([(vec![false; num_clbits], init)]);
    for inst in insts {
        branches = apply(branches, inst, nm);
    }
    branches
}

fn ground(n: usize) -> Op {
    let mut rho = Op::zeros(n);
    rho.m[0] = ONE;
    rho
}

/// Dense `k`-qubit Pauli matrix.
fn pauli_dense(p: &PauliString) -> Op {
    let k = p.len();
    let mut out = Op::zeros(k);
    let d = out.d;
    for a in 0..d {
        for b in 0..d {
            let mut v = ONE;
            for q in 0..k {
                v *= letter_mat(p.letter(q))[(a >> q) & 1][(b >> q) & 1];
            }
            out.m[a * d + b] = v * p.sign() as f64;
        }
    }
    out
}

fn matmul(x: &Op, y: &Op) -> Op {
    let d = x.d;
    let mut out = Op {
        d,
        m: vec![ZERO; d * d],
    };
    for i in 0..d {
        for k in 0..d {
            let xik = x.m[i * d + k];
            if xik != ZERO {
                for j in 0..d {
                    out.m[i * d + j] += xik * y.m[k * d + j];
                }
            }
        }
    }
    out
}

/// Place a data-qubit operator into the full register with ancillas in |0⟩.
fn embed(op: &Op, data: &[usize], n: usize) -> Op {
    let mut out = Op::zeros(n);
    let spread = |a: usize| {
        data.iter()
            .enumerate()
            .map(|(k, &q)| ((a >> k) & 1) << q)
            .sum::<usize>()
    };
    for a in 0..op.d {
        for b in 0..op.d {
            out.m[spread(a) * out.d + spread(b)] = op.m[a * op.d + b];
        }
    }
    out
}

/// Trace out every qubit not in `data`.
fn reduce(op: &Op, data: &[usize], n: usize) -> Op {
    let k = data.len();
    let mut out = Op::zeros(k);
    let spread = |a: usize| {
        data.iter()
            .enumerate()
            .map(|(i, &q)| ((a >> i) & 1) << q)
            .sum::<usize>()
    };
    let data_mask: usize = data.iter().map(|&q| 1 << q).sum();
    let env: Vec<usize> = (0..1usize << n).filter(|e| e & data_mask == 0).collect();
    for a in 0..out.d {
        for b in 0..out.d {
            out.m[a * out.d + b] = env
                .iter()
                .map(|&e| op.m[(spread(a) | e) * op.d + (spread(b) | e)])
                .sum();
        }
    }
    out
}

fn exact_dfe(bench: &GeneratedBenchmark, nm: &NoiseModel, k: usize) -> f64 {
    let n = bench.circuit.num_qubits();
    let mut total = 0.0;
    for p in PauliString::all(k) {
        let e = dfe_experiment(bench, &p, 1).unwrap();
        let Readout::Parity { clbits, negative } = &e.readout else {
            panic!()
        };
        let branches = run(
            e.circuit.instructions(),
            ground(n),
            e.circuit.num_clbits(),
            nm,
        );
        let value: f64 = branches
            .iter()
            .map(|(reg, rho)| {
                let odd = clbits.iter().filter(|&&c| reg[c]).count() % 2 == 1;
                let s = if odd ^ negative { -1.0 } else { 1.0 };
                s * rho.trace().re
            })
            .sum();
        total += value;
    }
    total / 4f64.powi(k as i32)
}

fn process_fidelity(bench: &GeneratedBenchmark, nm: &NoiseModel) -> f64 {
    let IdealReference::Clifford { data, unitary, .. } = &bench.reference else {
        panic!()
    };
    let (n, k) = (bench.circuit.num_qubits(), data.len());
    let d = (1usize << k) as f64;
    let core = strip_final_measurements(&bench.circuit);
    // U column by column: evolve each basis vector.
    let mut u = Op::zeros(k);
    for col in 0..u.d {
        let mut psi = vec![ZERO; u.d];
        psi[col] = ONE;
        for inst in unitary.instructions() {
            let Instruction::Gate { gate, qubits } = inst else {
                panic!()
            };
            psi = match qubits.as_slice() {
                [q] => {
                    let m = mat1(*gate);
                    let mut out = psi.clone();
                    for i0 in (0..u.d).filter(|i| i & (1 << q) == 0) {
                        let i1 = i0 | (1 << q);
                        out[i0] = m[0][0] * psi[i0] + m[0][1] * psi[i1];
                        out[i1] = m[1][0] * psi[i0] + m[1][1] * psi[i1];
                    }
                    out
                }
                [a, b] => {
                    let mut out = vec![ZERO; u.d];
                    for (i, amp) in psi.iter().enumerate() {
                        let (ba, bb) = ((i >> a) & 1, (i >> b) & 1);
                        let (j, s) = match gate {
                            Gate::Cx => (if ba == 1 { i ^ (1 << b) } else { i }, 1.0),
                            Gate::Cz => (i, if ba == 1 && bb == 1 { -1.0 } else { 1.0 }),
                            Gate::Swap => (if ba != bb { i ^ (1 << a) ^ (1 << b) } else { i }, 1.0),
                            other => panic!("{other:?}"),
                        };
                        out[j] += amp * s;
                    }
                    out
                }
                _ => panic!(),
            };
        }
        for row in 0..u.d {
            u.m[row * u.d + col] = psi[row];
        }
    }
    let u_dag = Op {
        d: u.d,
        m: (0..u.d * u.d)
            .map(|i| u.m[(i % u.d) * u.d + i / u.d].conj())
            .collect(),
    };
    let mut total = 0.0;
    for p in PauliString::all(k) {
        let dense = pauli_dense(&p);
        let image = matmul(&matmul(&u, &dense), &u_dag);
        let branches = run(
            core.instructions(),
            embed(&dense, data, n),
            core.num_clbits(),
            nm,
        );
        let mut lambda = Op::zeros(k);
        for rho in branches.values() {
            lambda.add_scaled(&reduce(rho, data, n), 1.0);
        }
        total += matmul(&image, &lambda).trace().re;
    }
    total / (d * d * d)
}

#[test]
fn dfe_over_all_paulis_equals_process_fidelity() {
    // Two-qubit depolarizing noise only: single-qubit and readout errors
    // would also hit the DFE preparation and basis changes, which the
    // process fidelity of the benchmark itself does not include.
    let noisy = NoiseModel {
        p1: 0.0,
        p2: 0.04,
        pm: 0.0,
        pidle: 0.0,
    };
    let cases = [
        (Family::CnotLadder, 3),
        (Family::CnotLadder, 5),
        (Family::LrCnot, 4),
        (Family::LrCnot, 5),
        (Family::LrCnotSparse, 5),
        (Family::Fanout, 5),
    ];
    for (f, n) in cases {
        let bench = f
            .spec(n, &FamilyParams::default(), 0)
            .unwrap()
            .generate()
            .unwrap();
        let IdealReference::Clifford { data, .. } = &bench.reference else {
            panic!()
        };
        let k = data.len();
        let clean = NoiseModel::noiseless();
        assert!((exact_dfe(&bench, &clean, k) - 1.0).abs() < 1e-9, "{f} {n}");
        assert!(
            (process_fidelity(&bench, &clean) - 1.0).abs() < 1e-9,
            "{f} {n}"
        );
        let dfe = exact_dfe(&bench, &noisy, k);
        let fpro = process_fidelity(&bench, &noisy);
        assert!(dfe < 0.99, "{f} {n}: noise should be visible, got {dfe}");
        assert!(
            (dfe - fpro).abs() < 1e-6,
            "{f} {n}: DFE {dfe} vs process fidelity {fpro}"
        );
    }
}
