use rand::Rng;

use super::QuantumState;
use crate::circuit::Gate;

/// Aaronson–Gottesman stabilizer tableau. Rows `0..n` are destabilizers,
/// `n..2n` stabilizers and row `2n` is scratch space; each row is a
/// bit-packed symplectic vector with a sign bit.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    /// The all-zeros state.
    pub fn new(n: usize) -> Tableau {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for i in 0..n {
            t.set_x(i, i, true);
            t.set_z(n + i, i, true);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, row: usize, q: usize) -> (usize, u64) {
        (row * self.words + q / 64, 1u64 << (q % 64))
    }

    #[inline]
    pub(crate) fn get_x(&self, row: usize, q: usize) -> bool {
        let (i, m) = self.idx(row, q);
        self.x[i] & m != 0
    }

    #[inline]
    pub(crate) fn get_z(&self, row: usize, q: usize) -> bool {
        let (i, m) = self.idx(row, q);
        self.z[i] & m != 0
    }

    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let (i, m) = self.idx(row, q);
        if v {
            self.x[i] |= m
        } else {
            self.x[i] &= !m
        }
    }

    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let (i, m) = self.idx(row, q);
        if v {
            self.z[i] |= m
        } else {
            self.z[i] &= !m
        }
    }

    /// Stabilizer generator `k` as (x bits, z bits, negative sign).
    pub fn stabilizer(&self, k: usize) -> (Vec<bool>, Vec<bool>, bool) {
        let row = self.n + k;
        (
            (0..self.n).map(|q| self.get_x(row, q)).collect(),
            (0..self.n).map(|q| self.get_z(row, q)).collect(),
            self.r[row],
        )
    }

    fn rows(&self) -> usize {
        2 * self.n
    }

    fn for_rows(&mut self, q: usize, mut f: impl FnMut(&mut bool, &mut bool, &mut bool)) {
        for row in 0..self.rows() {
            let (i, m) = self.idx(row, q);
            let (mut xv, mut zv) = (self.x[i] & m != 0, self.z[i] & m != 0);
            f(&mut xv, &mut zv, &mut self.r[row]);
            if xv {
                self.x[i] |= m
            } else {
                self.x[i] &= !m
            }
            if zv {
                self.z[i] |= m
            } else {
                self.z[i] &= !m
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        self.for_rows(q, |x, z, r| {
            *r ^= *x & *z;
            std::mem::swap(x, z);
        });
    }

    pub fn s(&mut self, q: usize) {
        self.for_rows(q, |x, z, r| {
            *r ^= *x & *z;
            *z ^= *x;
        });
    }

    pub fn sdg(&mut self, q: usize) {
        self.for_rows(q, |x, z, r| {
            *r ^= *x & !*z;
            *z ^= *x;
        });
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for row in 0..self.rows() {
            let (xc, zc, xt, zt) = (
                self.get_x(row, c),
                self.get_z(row, c),
                self.get_x(row, t),
                self.get_z(row, t),
            );
            self.r[row] ^= xc & zt & !(xt ^ zc);
            self.set_x(row, t, xt ^ xc);
            self.set_z(row, c, zc ^ zt);
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        for row in 0..self.rows() {
            let (xa, za, xb, zb) = (
                self.get_x(row, a),
                self.get_z(row, a),
                self.get_x(row, b),
                self.get_z(row, b),
            );
            self.set_x(row, a, xb);
            self.set_z(row, a, zb);
            self.set_x(row, b, xa);
            self.set_z(row, b, za);
        }
    }

    /// Multiply row `h` by row `i` in place, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (mut plus, mut minus) = (0u32, 0u32);
        for k in 0..self.words {
            let (x1, z1) = (self.x[i * self.words + k], self.z[i * self.words + k]);
            let (x2, z2) = (self.x[h * self.words + k], self.z[h * self.words + k]);
            let (y1, xo1, zo1) = (x1 & z1, x1 & !z1, !x1 & z1);
            let (y2, xo2, zo2) = (x2 & z2, x2 & !z2, !x2 & z2);
            plus += ((y1 & zo2) | (xo1 & y2) | (zo1 & xo2)).count_ones();
            minus += ((y1 & xo2) | (xo1 & zo2) | (zo1 & y2)).count_ones();
            self.x[h * self.words + k] = x1 ^ x2;
            self.z[h * self.words + k] = z1 ^ z2;
        }
        let total = 2 * (self.r[h] as i64) + 2 * (self.r[i] as i64) + plus as i64 - minus as i64;
        self.r[h] = total.rem_euclid(4) == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        for k in 0..self.words {
            self.x[dst * self.words + k] = self.x[src * self.words + k];
            self.z[dst * self.words + k] = self.z[src * self.words + k];
        }
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        for k in 0..self.words {
            self.x[row * self.words + k] = 0;
            self.z[row * self.words + k] = 0;
        }
        self.r[row] = false;
    }

    /// Outcome of measuring `q` if it is deterministic.
    pub fn deterministic_outcome(&mut self, q: usize) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|p| self.get_x(p, q)) {
            return None;
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.get_x(i, q) {
                self.rowsum(scratch, i + n);
            }
        }
        Some(self.r[scratch])
    }

    /// Z-basis measurement with the outcome forced when it is random.
    pub fn measure_with(&mut self, q: usize, random_bit: impl FnOnce() -> bool) -> bool {
        let n = self.n;
        match (n..2 * n).find(|&p| self.get_x(p, q)) {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && self.get_x(i, q) {
                        self.rowsum(i, p);
                    }
                }
                self.copy_row(p - n, p);
                self.clear_row(p);
                let b = random_bit();
                self.r[p] = b;
                self.set_z(p, q, true);
                b
            }
            None => self
                .deterministic_outcome(q)
                .expect("no anticommuting stabilizer"),
        }
    }
}

impl QuantumState for Tableau {
    fn apply_gate(&mut self, g: &Gate, qs: &[usize]) {
        match g {
            Gate::H => self.h(qs[0]),
            Gate::S => self.s(qs[0]),
            Gate::Sdg => self.sdg(qs[0]),
            Gate::X => self.apply_pauli(qs[0], 1),
            Gate::Y => self.apply_pauli(qs[0], 2),
            Gate::Z => self.apply_pauli(qs[0], 3),
            Gate::Cx => self.cx(qs[0], qs[1]),
            Gate::Cz => self.cz(qs[0], qs[1]),
            Gate::Swap => self.swap(qs[0], qs[1]),
            other => panic!("non-Clifford gate {other} on stabilizer backend"),
        }
    }

    fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        self.measure_with(q, || rng.gen::<bool>())
    }

    fn reset<R: Rng>(&mut self, q: usize, rng: &mut R) {
        if self.measure(q, rng) {
            self.apply_pauli(q, 1);
        }
    }

    fn apply_pauli(&mut self, q: usize, letter: u8) {
        self.for_rows(q, |x, z, r| {
            *r ^= match letter {
                1 => *z,
                2 => *x ^ *z,
                _ => *x,
            };
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = [false; 2];
        for _ in 0..32 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cx(0, 1);
            let a = t.measure(0, &mut rng);
            assert_eq!(t.deterministic_outcome(1), Some(a));
            seen[a as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn phases_track_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = Tableau::new(1);
        t.apply_gate(&Gate::X, &[0]);
        assert!(t.measure(0, &mut rng));
        // S·S = Z; H Z H = X flips |0> to |1>
        let mut t = Tableau::new(1);
        t.h(0);
        t.s(0);
        t.s(0);
        t.h(0);
        assert_eq!(t.deterministic_outcome(0), Some(true));
        let mut t = Tableau::new(1);
        t.h(0);
        t.s(0);
        t.sdg(0);
        t.h(0);
        assert_eq!(t.deterministic_outcome(0), Some(false));
    }

    #[test]
    fn ghz_on_many_words() {
        let n = 130;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Tableau::new(n);
        t.h(0);
        for q in 1..n {
            t.cx(q - 1, q);
        }
        let a = t.measure(n - 1, &mut rng);
        for q in 0..n {
            assert_eq!(t.measure(q, &mut rng), a);
        }
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cx(0, 1);
            t.reset(0, &mut rng);
            assert_eq!(t.deterministic_outcome(0), Some(false));
        }
    }
}
