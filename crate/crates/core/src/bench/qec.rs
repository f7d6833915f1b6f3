//! Small stabilizer codes: one round of syndrome extraction, lookup-table
//! correction and a transversal logical readout.

use serde::{Deserialize, Serialize};

use super::{prepare_stabilizer_state, BenchError, Family, IdealReference, Parts};
use crate::circuit::{CircuitBuilder, CircuitError, Condition, Instruction};
use crate::features::BranchModel;
use crate::sim::{Letter, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LogicalState {
    Zero,
    One,
    Plus,
}

impl LogicalState {
    /// Basis of the logical readout.
    pub fn basis(self) -> Letter {
        match self {
            LogicalState::Zero | LogicalState::One => Letter::Z,
            LogicalState::Plus => Letter::X,
        }
    }

    /// Readout bit of the prepared state: set for a −1 eigenvalue.
    pub fn expected_bit(self) -> bool {
        self == LogicalState::One
    }
}

/// Hardware error rates used to estimate correction-branch probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QecRates {
    #[default]
    IbmLike,
    HeliosLike,
}

impl QecRates {
    /// `(p, m, s)`: two-qubit gate, measurement and one-qubit gate error.
    pub fn values(self) -> (f64, f64, f64) {
        match self {
            QecRates::IbmLike => (1e-3, 5e-3, 1e-4),
            QecRates::HeliosLike => (8e-4, 1e-6, 2.5e-5),
        }
    }

    fn branch_model(self, weight: usize, conditionals: usize) -> BranchModel {
        let (p, m, s) = self.values();
        BranchModel::QecNoise {
            p,
            m,
            s,
            weights: vec![weight; conditionals],
        }
    }
}

fn letter_product(a: Letter, b: Letter) -> Letter {
    use Letter::*;
    match (a, b) {
        (I, l) | (l, I) => l,
        (X, X) | (Y, Y) | (Z, Z) => I,
        (X, Z) | (Z, X) => Y,
        (X, Y) | (Y, X) => Z,
        (Y, Z) | (Z, Y) => X,
    }
}

/// Product of two strings with phases dropped.
fn unsigned_product(a: &PauliString, b: &PauliString) -> PauliString {
    let letters: Vec<Letter> = a
        .letters()
        .into_iter()
        .zip(b.letters())
        .map(|(x, y)| letter_product(x, y))
        .collect();
    PauliString::from_letters(&letters, false)
}

fn single(n: usize, q: usize, l: Letter) -> PauliString {
    let mut letters = vec![Letter::I; n];
    letters[q] = l;
    PauliString::from_letters(&letters, false)
}

fn parse(s: &str) -> PauliString {
    s.parse().expect("valid Pauli literal")
}

/// Stabilizers, logical operators and a complete lookup decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTables {
    pub name: &'static str,
    pub stabilizers: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    /// Correction for every syndrome; bit `k` of the index is check `k`.
    decoder: Vec<PauliString>,
    x_only: bool,
}

impl CodeTables {
    /// Bit-flip repetition code of odd distance `d`; corrections follow the
    /// majority vote.
    pub fn repetition(d: usize) -> Result<CodeTables, BenchError> {
        if d < 3 || d.is_multiple_of(2) || d > 15 {
            return Err(BenchError::Param {
                name: "distance",
                reason: format!("{d} is not an odd distance in 3..=15"),
            });
        }
        let stabilizers: Vec<PauliString> = (0..d - 1)
            .map(|i| {
                let mut letters = vec![Letter::I; d];
                letters[i] = Letter::Z;
                letters[i + 1] = Letter::Z;
                PauliString::from_letters(&letters, false)
            })
            .collect();
        let decoder = (0..1usize << (d - 1))
            .map(|syn| {
                let mut flips = vec![false; d];
                for i in 0..d - 1 {
                    flips[i + 1] = flips[i] ^ (syn >> i & 1 == 1);
                }
                if flips.iter().filter(|&&f| f).count() > d / 2 {
                    flips.iter_mut().for_each(|f| *f = !*f);
                }
                let letters: Vec<Letter> = flips
                    .iter()
                    .map(|&f| if f { Letter::X } else { Letter::I })
                    .collect();
                PauliString::from_letters(&letters, false)
            })
            .collect();
        Ok(CodeTables {
            name: "repetition",
            stabilizers,
            logical_x: PauliString::from_letters(&vec![Letter::X; d], false),
            logical_z: PauliString::from_letters(&vec![Letter::Z; d], false),
            decoder,
            x_only: true,
        })
    }

    /// The perfect [[5,1,3]] code: every syndrome is a distinct weight-one error.
    pub fn five_qubit() -> CodeTables {
        let stabilizers: Vec<PauliString> = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
            .iter()
            .map(|s| parse(s))
            .collect();
        let mut t = CodeTables {
            name: "five-qubit",
            stabilizers,
            logical_x: parse("XXXXX"),
            logical_z: parse("ZZZZZ"),
            decoder: vec![PauliString::identity(5); 16],
            x_only: false,
        };
        for e in t.correctable_errors() {
            let syn = t.syndrome(&e);
            t.decoder[syn] = e;
        }
        t
    }

    /// Steane [[7,1,3]] code from the Hamming checks. Checks 0..3 are
    /// X-type and locate Z errors, checks 3..6 are Z-type and locate X
    /// errors; the decoder corrects both halves independently.
    pub fn steane() -> CodeTables {
        let rows = ["1010101", "0110011", "0001111"];
        let typed = |l: Letter| -> Vec<PauliString> {
            rows.iter()
                .map(|r| {
                    let letters: Vec<Letter> = r
                        .chars()
                        .map(|c| if c == '1' { l } else { Letter::I })
                        .collect();
                    PauliString::from_letters(&letters, false)
                })
                .collect()
        };
        let mut stabilizers = typed(Letter::X);
        stabilizers.extend(typed(Letter::Z));
        // Hamming checks read the 1-based position of a single flip in binary.
        let locate = |v: usize, l: Letter| {
            if v == 0 {
                PauliString::identity(7)
            } else {
                single(7, v - 1, l)
            }
        };
        let decoder = (0..64)
            .map(|syn| unsigned_product(&locate(syn & 7, Letter::Z), &locate(syn >> 3, Letter::X)))
            .collect();
        CodeTables {
            name: "steane",
            stabilizers,
            logical_x: parse("XXXXXXX"),
            logical_z: parse("ZZZZZZZ"),
            decoder,
            x_only: false,
        }
    }

    pub fn n_data(&self) -> usize {
        self.logical_z.len()
    }

    pub fn num_checks(&self) -> usize {
        self.stabilizers.len()
    }

    /// Syndrome of an error as an integer, bit `k` set when it anticommutes
    /// with check `k`.
    pub fn syndrome(&self, error: &PauliString) -> usize {
        self.stabilizers
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.commutes_with(error))
            .map(|(k, _)| 1 << k)
            .sum()
    }

    pub fn decode(&self, syndrome: usize) -> &PauliString {
        &self.decoder[syndrome]
    }

    /// Weight-one errors the code is meant to correct.
    pub fn correctable_errors(&self) -> Vec<PauliString> {
        let letters: &[Letter] = if self.x_only {
            &[Letter::X]
        } else {
            &[Letter::X, Letter::Y, Letter::Z]
        };
        (0..self.n_data())
            .flat_map(|q| letters.iter().map(move |&l| single(self.n_data(), q, l)))
            .collect()
    }

    /// Whether `e` followed by the decoder's correction acts trivially on the
    /// code space: the residual must commute with every check and with both
    /// logical operators.
    pub fn corrects(&self, e: &PauliString) -> bool {
        let residual = unsigned_product(e, self.decode(self.syndrome(e)));
        self.syndrome(&residual) == 0
            && residual.commutes_with(&self.logical_x)
            && residual.commutes_with(&self.logical_z)
    }

    /// Every nontrivial element of the stabilizer group made only of `basis`
    /// letters, i.e. the checks that survive a transversal readout in it.
    pub fn readout_checks(&self, basis: Letter) -> Vec<PauliString> {
        let r = self.stabilizers.len();
        (1..1usize << r)
            .map(|mask| {
                (0..r).filter(|k| mask >> k & 1 == 1).fold(
                    PauliString::identity(self.n_data()),
                    |acc, k| {
                        acc.mul_commuting(&self.stabilizers[k])
                            .expect("stabilizers commute")
                    },
                )
            })
            .filter(|p| {
                !p.is_identity() && p.letters().iter().all(|&l| l == Letter::I || l == basis)
            })
            .collect()
    }
}

/// Where a generated code circuit keeps its qubits and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct QecLayout {
    pub tables: CodeTables,
    pub initial: LogicalState,
    pub data: Vec<usize>,
    pub syndrome_clbits: Vec<usize>,
    /// Ancilla readouts of the logical operator; their parity is the
    /// logical value.
    pub logical_clbits: Vec<usize>,
    pub data_clbits: Vec<usize>,
    /// Instructions before syndrome extraction starts.
    pub encode_len: usize,
}

impl QecLayout {
    /// Whether one shot's register shows the prepared logical state: every
    /// readout check passes and both the data and ancilla logical values
    /// match.
    pub fn shot_ok(&self, register: &[bool]) -> bool {
        let basis = self.initial.basis();
        let bits: Vec<bool> = self.data_clbits.iter().map(|&c| register[c]).collect();
        let value = |p: &PauliString| {
            p.support()
                .iter()
                .fold(p.is_negative(), |acc, &q| acc ^ bits[q])
        };
        if self.tables.readout_checks(basis).iter().any(&value) {
            return false;
        }
        let logical = if basis == Letter::Z {
            &self.tables.logical_z
        } else {
            &self.tables.logical_x
        };
        let expected = self.initial.expected_bit();
        if value(logical) != expected {
            return false;
        }
        self.logical_clbits.is_empty()
            || self
                .logical_clbits
                .iter()
                .fold(false, |acc, &c| acc ^ register[c])
                == expected
    }

    /// Whether a register of `width` bits holds every clbit the layout reads.
    pub fn is_readable(&self, width: usize) -> bool {
        let mut all = self
            .syndrome_clbits
            .iter()
            .chain(&self.logical_clbits)
            .chain(&self.data_clbits);
        all.all(|&c| c < width)
    }

    pub fn canonical(&self) -> String {
        let stab: Vec<String> = self
            .tables
            .stabilizers
            .iter()
            .map(|s| s.to_string())
            .collect();
        format!(
            "qec;{};{:?};stabilizers={};data={:?};syndrome={:?};logical={:?};readout={:?};encode={}",
            self.tables.name,
            self.initial,
            stab.join(","),
            self.data,
            self.syndrome_clbits,
            self.logical_clbits,
            self.data_clbits,
            self.encode_len
        )
    }
}

fn bits_of(value: usize, width: usize) -> Vec<bool> {
    (0..width).map(|k| value >> k & 1 == 1).collect()
}

fn apply_pauli(
    b: &mut CircuitBuilder,
    p: &PauliString,
    data: &[usize],
) -> Result<(), CircuitError> {
    for q in p.support() {
        match p.letter(q) {
            Letter::X => b.x(data[q])?,
            Letter::Y => b.y(data[q])?,
            _ => b.z(data[q])?,
        };
    }
    Ok(())
}

/// Measure a stabilizer onto a fresh ancilla: Z-type checks copy parities
/// directly, others use an ancilla in |+⟩ controlling each letter.
fn measure_check(
    b: &mut CircuitBuilder,
    s: &PauliString,
    data: &[usize],
    anc: usize,
    clbit: usize,
) -> Result<(), BenchError> {
    let support = s.support();
    if support.iter().all(|&q| s.letter(q) == Letter::Z) {
        for q in support {
            b.cx(data[q], anc)?;
        }
    } else {
        b.h(anc)?;
        for q in support {
            match s.letter(q) {
                Letter::X => b.cx(anc, data[q])?,
                Letter::Z => b.cz(anc, data[q])?,
                _ => b.sdg(data[q])?.cx(anc, data[q])?.s(data[q])?,
            };
        }
        b.h(anc)?;
    }
    b.measure(anc, clbit)?;
    Ok(())
}

/// Measure the logical operator of `basis` in pieces, one ancilla per group
/// of data qubits.
fn measure_logical(
    b: &mut CircuitBuilder,
    basis: Letter,
    groups: &[&[usize]],
    data: &[usize],
    ancillas: &[usize],
    first_clbit: usize,
) -> Result<(), BenchError> {
    for (k, (group, &a)) in groups.iter().zip(ancillas).enumerate() {
        if basis == Letter::Z {
            for &q in *group {
                b.cx(data[q], a)?;
            }
        } else {
            b.h(a)?;
            for &q in *group {
                b.cx(a, data[q])?;
            }
            b.h(a)?;
        }
        b.measure(a, first_clbit + k)?;
    }
    Ok(())
}

fn readout(
    b: &mut CircuitBuilder,
    basis: Letter,
    data: &[usize],
    first_clbit: usize,
) -> Result<(), BenchError> {
    for (k, &q) in data.iter().enumerate() {
        if basis == Letter::X {
            b.h(q)?;
        }
        b.measure(q, first_clbit + k)?;
    }
    Ok(())
}

/// One conditional per nonzero syndrome over `clbits`, applying
/// `correction(syndrome)` on the data.
fn corrections(
    b: &mut CircuitBuilder,
    clbits: &[usize],
    data: &[usize],
    correction: impl Fn(usize) -> PauliString,
) -> Result<usize, BenchError> {
    let mut count = 0;
    for syn in 1..1usize << clbits.len() {
        let p = correction(syn);
        let cond = Condition::equals(clbits, &bits_of(syn, clbits.len()))?;
        b.conditional(cond, |body| apply_pauli(body, &p, data))?;
        count += 1;
    }
    Ok(count)
}

fn encode(
    b: &mut CircuitBuilder,
    tables: &CodeTables,
    initial: LogicalState,
    data: &[usize],
) -> Result<(), BenchError> {
    let mut logical = match initial.basis() {
        Letter::Z => tables.logical_z.clone(),
        _ => tables.logical_x.clone(),
    };
    logical.set_negative(initial.expected_bit());
    let mut gens = tables.stabilizers.clone();
    gens.push(logical);
    for inst in prepare_stabilizer_state(&gens)? {
        if let Instruction::Gate { gate, qubits } = inst {
            let mapped: Vec<usize> = qubits.iter().map(|&q| data[q]).collect();
            b.gate(gate, &mapped)?;
        }
    }
    Ok(())
}

pub(super) fn rep_code(d: usize, initial: LogicalState, rates: QecRates) -> Parts {
    if d != 3 && d != 5 {
        return Err(BenchError::Size {
            family: Family::RepCode,
            expected: "distance 3 or 5 (5 or 9 qubits)",
            got: 2 * d - 1,
        });
    }
    if initial == LogicalState::Zero {
        return Err(BenchError::Param {
            name: "initial",
            reason: "the repetition code prepares ONE or PLUS".into(),
        });
    }
    let tables = CodeTables::repetition(d)?;
    let n = 2 * d - 1;
    let data: Vec<usize> = (0..d).map(|i| 2 * i).collect();
    let checks = d - 1;
    let mut b = CircuitBuilder::new(n, checks + d)?;
    if initial == LogicalState::One {
        b.x(data[0])?;
    } else {
        b.h(data[0])?;
    }
    for i in 1..d {
        b.cx(data[i - 1], data[i])?;
    }
    let encode_len = b.len();
    for (k, s) in tables.stabilizers.iter().enumerate() {
        measure_check(&mut b, s, &data, 2 * k + 1, k)?;
    }
    let syndrome: Vec<usize> = (0..checks).collect();
    let conds = corrections(&mut b, &syndrome, &data, |syn| tables.decode(syn).clone())?;
    readout(&mut b, initial.basis(), &data, checks)?;
    b.name(&format!("rep_code_n{n}"))
        .system_qubits(data.iter().copied());
    let layout = QecLayout {
        tables,
        initial,
        data: data.clone(),
        syndrome_clbits: syndrome,
        logical_clbits: vec![],
        data_clbits: (checks..checks + d).collect(),
        encode_len,
    };
    Ok((
        b.build()?,
        rates.branch_model(2, conds),
        IdealReference::Qec(layout),
    ))
}

pub(super) fn five_qubit_code(initial: LogicalState, rates: QecRates) -> Parts {
    if initial == LogicalState::Plus {
        return Err(BenchError::Param {
            name: "initial",
            reason: "the five-qubit code prepares ZERO or ONE".into(),
        });
    }
    let tables = CodeTables::five_qubit();
    let data: Vec<usize> = (0..5).collect();
    let (checks, logical_anc) = ([5, 6, 7, 8], [9, 10]);
    let mut b = CircuitBuilder::new(11, 4 + 2 + 5)?;
    encode(&mut b, &tables, initial, &data)?;
    let encode_len = b.len();
    for (k, s) in tables.stabilizers.iter().enumerate() {
        measure_check(&mut b, s, &data, checks[k], k)?;
    }
    let syndrome: Vec<usize> = (0..4).collect();
    let conds = corrections(&mut b, &syndrome, &data, |syn| tables.decode(syn).clone())?;
    measure_logical(
        &mut b,
        initial.basis(),
        &[&[0, 1, 2], &[3, 4]],
        &data,
        &logical_anc,
        4,
    )?;
    readout(&mut b, initial.basis(), &data, 6)?;
    b.name("five_qubit_code_n11")
        .system_qubits(data.iter().copied());
    // Deep extraction circuits on sparse hardware make correction branches
    // far likelier than the rate model suggests; use a flat 1/16 there.
    let bm = match rates {
        QecRates::IbmLike => BranchModel::Explicit {
            probabilities: vec![1.0 / 16.0; conds],
        },
        QecRates::HeliosLike => rates.branch_model(4, conds),
    };
    let layout = QecLayout {
        tables,
        initial,
        data,
        syndrome_clbits: syndrome,
        logical_clbits: vec![4, 5],
        data_clbits: (6..11).collect(),
        encode_len,
    };
    Ok((b.build()?, bm, IdealReference::Qec(layout)))
}

pub(super) fn steane_code(initial: LogicalState, rates: QecRates) -> Parts {
    if initial == LogicalState::Zero {
        return Err(BenchError::Param {
            name: "initial",
            reason: "the Steane code prepares ONE or PLUS".into(),
        });
    }
    let tables = CodeTables::steane();
    let data: Vec<usize> = (0..7).collect();
    let mut b = CircuitBuilder::new(14, 6 + 1 + 7)?;
    encode(&mut b, &tables, initial, &data)?;
    let encode_len = b.len();
    for (k, s) in tables.stabilizers.iter().enumerate() {
        measure_check(&mut b, s, &data, 7 + k, k)?;
    }
    let locate = |v: usize, l: Letter| single(7, v - 1, l);
    let mut conds = corrections(&mut b, &[3, 4, 5], &data, |v| locate(v, Letter::X))?;
    conds += corrections(&mut b, &[0, 1, 2], &data, |v| locate(v, Letter::Z))?;
    measure_logical(
        &mut b,
        initial.basis(),
        &[&[0, 1, 2, 3, 4, 5, 6]],
        &data,
        &[13],
        6,
    )?;
    readout(&mut b, initial.basis(), &data, 7)?;
    b.name("steane_code_n14")
        .system_qubits(data.iter().copied());
    let layout = QecLayout {
        tables,
        initial,
        data,
        syndrome_clbits: (0..6).collect(),
        logical_clbits: vec![6],
        data_clbits: (7..14).collect(),
        encode_len,
    };
    Ok((
        b.build()?,
        rates.branch_model(4, conds),
        IdealReference::Qec(layout),
    ))
}
