use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::SimError;
use crate::circuit::{Gate, Instruction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Hermitian Pauli operator `±P_0 ⊗ … ⊗ P_{n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> PauliString {
        PauliString {
            x: vec![false; n],
            z: vec![false; n],
            negative: false,
        }
    }

    pub fn from_letters(letters: &[Letter], negative: bool) -> PauliString {
        let (x, z) = letters.iter().map(|l| l.bits()).unzip();
        PauliString { x, z, negative }
    }

    /// Uniform draw over all `4^n` unsigned strings.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> PauliString {
        let letters: Vec<Letter> = (0..n)
            .map(|_| Letter::from_bits(rng.gen(), rng.gen()))
            .collect();
        PauliString::from_letters(&letters, false)
    }

    /// All `4^n` unsigned strings, in base-4 order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..(1usize << (2 * n))).map(move |k| {
            let letters: Vec<Letter> = (0..n)
                .map(|q| [Letter::I, Letter::X, Letter::Y, Letter::Z][(k >> (2 * q)) & 3])
                .collect();
            PauliString::from_letters(&letters, false)
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x[q], self.z[q])
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.len()).map(|q| self.letter(q)).collect()
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| self.x[q] || self.z[q])
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.support().is_empty()
    }

    /// Commutation test by symplectic inner product.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        (0..self.len())
            .filter(|&q| (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]))
            .count()
            % 2
            == 0
    }

    /// Embed into a larger register at the given positions.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliString {
        let mut out = PauliString::identity(n);
        for (k, &q) in positions.iter().enumerate() {
            out.x[q] = self.x[k];
            out.z[q] = self.z[k];
        }
        out.negative = self.negative;
        out
    }

    /// Restrict to the given positions.
    pub fn restrict(&self, positions: &[usize]) -> PauliString {
        PauliString {
            x: positions.iter().map(|&q| self.x[q]).collect(),
            z: positions.iter().map(|&q| self.z[q]).collect(),
            negative: self.negative,
        }
    }

    /// Product `self · other` of two commuting strings.
    pub fn mul_commuting(&self, other: &PauliString) -> Result<PauliString, SimError> {
        if !self.commutes_with(other) {
            return Err(SimError::BadPauli(format!(
                "{self} and {other} anticommute"
            )));
        }
        // Accumulate the exponent of i picked up per qubit.
        let mut phase: i32 = 2 * (self.negative as i32 + other.negative as i32);
        for q in 0..self.len() {
            phase += match (self.letter(q), other.letter(q)) {
                (Letter::X, Letter::Y) | (Letter::Y, Letter::Z) | (Letter::Z, Letter::X) => 1,
                (Letter::Y, Letter::X) | (Letter::Z, Letter::Y) | (Letter::X, Letter::Z) => -1,
                _ => 0,
            };
        }
        Ok(PauliString {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            negative: phase.rem_euclid(4) == 2,
        })
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    /// Replace `self` with `G · self · G†`.
    pub fn conjugate(&mut self, g: &Gate, qs: &[usize]) -> Result<(), SimError> {
        let flip = |s: &mut Self, b: bool| s.negative ^= b;
        match g {
            Gate::H => {
                let q = qs[0];
                flip(self, self.x[q] & self.z[q]);
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            Gate::S => {
                let q = qs[0];
                flip(self, self.x[q] & self.z[q]);
                self.z[q] ^= self.x[q];
            }
            Gate::Sdg => {
                let q = qs[0];
                flip(self, self.x[q] & !self.z[q]);
                self.z[q] ^= self.x[q];
            }
            Gate::X => flip(self, self.z[qs[0]]),
            Gate::Y => flip(self, self.x[qs[0]] ^ self.z[qs[0]]),
            Gate::Z => flip(self, self.x[qs[0]]),
            Gate::Cx => {
                let (c, t) = (qs[0], qs[1]);
                flip(self, self.x[c] & self.z[t] & !(self.x[t] ^ self.z[c]));
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Gate::Cz => {
                self.conjugate(&Gate::H, &qs[1..])?;
                self.conjugate(&Gate::Cx, qs)?;
                self.conjugate(&Gate::H, &qs[1..])?;
            }
            Gate::Swap => {
                self.x.swap(qs[0], qs[1]);
                self.z.swap(qs[0], qs[1]);
            }
            other => return Err(SimError::NonClifford(other.to_string())),
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.len() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                _ => Err(SimError::BadPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString::from_letters(&letters, negative))
    }
}

/// Conjugate `p` through a sequence of Clifford gates: `C·P·C†`.
pub fn propagate_pauli(ops: &[Instruction], p: &PauliString) -> Result<PauliString, SimError> {
    let mut out = p.clone();
    for op in ops {
        match op {
            Instruction::Gate { gate, qubits } => out.conjugate(gate, qubits)?,
            other => return Err(SimError::NonClifford(format!("{other:?}"))),
        }
    }
    Ok(out)
}

/// Gates taking `|0⟩` to the +1 eigenstate of `letter`.
pub fn prepare_pauli_eigenstate(letter: Letter) -> Vec<Gate> {
    match letter {
        Letter::I | Letter::Z => vec![],
        Letter::X => vec![Gate::H],
        Letter::Y => vec![Gate::H, Gate::S],
    }
}

/// Gates rotating the eigenbasis of `letter` onto the Z basis, so that a
/// Z measurement afterwards reads the `letter` eigenvalue.
pub fn basis_change_to_z(letter: Letter) -> Vec<Gate> {
    match letter {
        Letter::I | Letter::Z => vec![],
        Letter::X => vec![Gate::H],
        Letter::Y => vec![Gate::Sdg, Gate::H],
    }
}
