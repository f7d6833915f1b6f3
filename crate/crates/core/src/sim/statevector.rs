use num_complex::Complex64 as C;
use rand::Rng;

use super::QuantumState;
use crate::circuit::Gate;

/// Dense state over `n` qubits; qubit `q` is bit `q` of the amplitude index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub(crate) fn matrix(g: &Gate) -> [[C; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = C::new(0.0, 1.0);
    match *g {
        Gate::H => [
            [C::new(h, 0.0), C::new(h, 0.0)],
            [C::new(h, 0.0), C::new(-h, 0.0)],
        ],
        Gate::X => [[ZERO, ONE], [ONE, ZERO]],
        Gate::Y => [[ZERO, -i], [i, ZERO]],
        Gate::Z => [[ONE, ZERO], [ZERO, -ONE]],
        Gate::S => [[ONE, ZERO], [ZERO, i]],
        Gate::Sdg => [[ONE, ZERO], [ZERO, -i]],
        Gate::T => [
            [ONE, ZERO],
            [ZERO, C::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
        ],
        Gate::Rx(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [
                [C::new(c, 0.0), C::new(0.0, -s)],
                [C::new(0.0, -s), C::new(c, 0.0)],
            ]
        }
        Gate::Ry(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [
                [C::new(c, 0.0), C::new(-s, 0.0)],
                [C::new(s, 0.0), C::new(c, 0.0)],
            ]
        }
        Gate::Rz(t) => [
            [C::from_polar(1.0, -t / 2.0), ZERO],
            [ZERO, C::from_polar(1.0, t / 2.0)],
        ],
        Gate::P(t) => [[ONE, ZERO], [ZERO, C::from_polar(1.0, t)]],
        Gate::Cx | Gate::Cz | Gate::Swap | Gate::Rzz(_) => {
            unreachable!("two-qubit gate has no 2x2 matrix")
        }
    }
}

impl StateVector {
    pub fn new(n: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_matrix(&mut self, q: usize, m: &[[C; 2]; 2]) {
        let bit = 1usize << q;
        let diag = m[0][1] == ZERO && m[1][0] == ZERO;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            if diag {
                self.amps[i] = m[0][0] * a0;
                self.amps[i | bit] = m[1][1] * a1;
            } else {
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project qubit `q` onto `outcome` and renormalize.
    fn collapse(&mut self, q: usize, outcome: bool, prob: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Expectation of a product of Z operators on the listed qubits.
    pub fn expect_z(&self, qubits: &[usize]) -> f64 {
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if (i & mask).count_ones() % 2 == 1 {
                    -a.norm_sqr()
                } else {
                    a.norm_sqr()
                }
            })
            .sum()
    }

    /// Born probabilities of all basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl QuantumState for StateVector {
    fn apply_gate(&mut self, g: &Gate, qs: &[usize]) {
        match *g {
            Gate::Cx => {
                let (c, t) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::Cz => {
                let m = (1usize << qs[0]) | (1usize << qs[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            Gate::Swap => {
                let (a, b) = (1usize << qs[0], 1usize << qs[1]);
                for i in 0..self.amps.len() {
                    if i & a != 0 && i & b == 0 {
                        self.amps.swap(i, (i & !a) | b);
                    }
                }
            }
            Gate::Rzz(t) => {
                let (a, b) = (1usize << qs[0], 1usize << qs[1]);
                let even = C::from_polar(1.0, -t / 2.0);
                let odd = C::from_polar(1.0, t / 2.0);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if ((i & a) != 0) ^ ((i & b) != 0) {
                        odd
                    } else {
                        even
                    };
                }
            }
            ref g1 => self.apply_matrix(qs[0], &matrix(g1)),
        }
    }

    fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() < p1;
        self.collapse(q, outcome, if outcome { p1 } else { 1.0 - p1 });
        outcome
    }

    fn reset<R: Rng>(&mut self, q: usize, rng: &mut R) {
        if self.measure(q, rng) {
            self.apply_matrix(q, &matrix(&Gate::X));
        }
    }

    fn apply_pauli(&mut self, q: usize, letter: u8) {
        let g = match letter {
            1 => Gate::X,
            2 => Gate::Y,
            _ => Gate::Z,
        };
        self.apply_matrix(q, &matrix(&g));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_state() {
        let mut s = StateVector::new(2);
        s.apply_gate(&Gate::H, &[0]);
        s.apply_gate(&Gate::Cx, &[0, 1]);
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
        assert!((s.expect_z(&[0, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_match_definitions() {
        let mut s = StateVector::new(1);
        s.apply_gate(&Gate::Rx(std::f64::consts::PI), &[0]);
        assert!((s.probabilities()[1] - 1.0).abs() < 1e-12);
        let mut s = StateVector::new(2);
        s.apply_gate(&Gate::X, &[0]);
        s.apply_gate(&Gate::Rzz(0.7), &[0, 1]);
        let a = s.amplitudes()[1];
        assert!((a - C::from_polar(1.0, 0.35)).norm() < 1e-12);
    }

    #[test]
    fn swap_moves_excitation() {
        let mut s = StateVector::new(3);
        s.apply_gate(&Gate::X, &[0]);
        s.apply_gate(&Gate::Swap, &[0, 2]);
        assert!((s.probabilities()[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_collapses_and_normalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut s = StateVector::new(2);
            s.apply_gate(&Gate::H, &[0]);
            s.apply_gate(&Gate::Cx, &[0, 1]);
            let a = s.measure(0, &mut rng);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(s.measure(1, &mut rng), a);
            s.reset(1, &mut rng);
            assert!(s.prob_one(1) < 1e-12);
        }
    }
}
