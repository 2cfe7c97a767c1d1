//! Stabilizer tableau with destabilizers (Aaronson–Gottesman layout).
//!
//! Rows `0..n` are destabilizers and rows `n..2n` stabilizers. Each row is a
//! bit-packed Pauli string plus a sign bit. Global phase is not tracked.

use rand::Rng;

use super::circuit::Gate;
use crate::error::{Result, SimError};
use crate::pauli::{product_phase_word, words_for, BitString, PauliString};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<bool>,
}

impl Tableau {
    /// `|0^n⟩`: destabilizers `X_j`, stabilizers `+Z_j`.
    pub fn zero(n: usize) -> Tableau {
        let words = words_for(n);
        let rows = 2 * n;
        let mut t = Tableau {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            sign: vec![false; rows],
        };
        for j in 0..n {
            t.x[j * words + j / 64] |= 1 << (j % 64);
            t.z[(n + j) * words + j / 64] |= 1 << (j % 64);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(&self, row: usize, q: usize) -> (bool, bool) {
        let i = row * self.words + q / 64;
        let b = q % 64;
        ((self.x[i] >> b) & 1 == 1, (self.z[i] >> b) & 1 == 1)
    }

    /// Row `row` as a Pauli string and its sign (`true` = −1).
    pub fn row(&self, row: usize) -> (PauliString, bool) {
        let r = row * self.words..(row + 1) * self.words;
        (
            PauliString::from_words(self.n, self.x[r.clone()].to_vec(), self.z[r].to_vec()),
            self.sign[row],
        )
    }

    pub fn stabilizer(&self, j: usize) -> (PauliString, bool) {
        self.row(self.n + j)
    }

    pub fn destabilizer(&self, j: usize) -> (PauliString, bool) {
        self.row(j)
    }

    fn for_each_row(&mut self, q: usize, mut f: impl FnMut(&mut u64, &mut u64, &mut bool, u64)) {
        let (w, mask) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            f(&mut self.x[i], &mut self.z[i], &mut self.sign[row], mask);
        }
    }

    pub fn h(&mut self, q: usize) {
        self.for_each_row(q, |x, z, s, m| {
            if *x & *z & m != 0 {
                *s = !*s;
            }
            let t = (*x ^ *z) & m;
            *x ^= t;
            *z ^= t;
        });
    }

    pub fn s(&mut self, q: usize) {
        self.for_each_row(q, |x, z, s, m| {
            if *x & *z & m != 0 {
                *s = !*s;
            }
            *z ^= *x & m;
        });
    }

    pub fn pauli_x(&mut self, q: usize) {
        self.for_each_row(q, |_, z, s, m| {
            if *z & m != 0 {
                *s = !*s;
            }
        });
    }

    pub fn pauli_z(&mut self, q: usize) {
        self.for_each_row(q, |x, _, s, m| {
            if *x & m != 0 {
                *s = !*s;
            }
        });
    }

    pub fn pauli_y(&mut self, q: usize) {
        self.for_each_row(q, |x, z, s, m| {
            if (*x ^ *z) & m != 0 {
                *s = !*s;
            }
        });
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        for row in 0..2 * self.n {
            let (xc, zc) = self.bit(row, control);
            let (xt, zt) = self.bit(row, target);
            if xc && zt && (xt == zc) {
                self.sign[row] = !self.sign[row];
            }
            let base = row * self.words;
            if xc {
                self.x[base + target / 64] ^= 1 << (target % 64);
            }
            if zt {
                self.z[base + control / 64] ^= 1 << (control % 64);
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::H(q) => self.h(q),
            Gate::S(q) => self.s(q),
            Gate::X(q) => self.pauli_x(q),
            Gate::Y(q) => self.pauli_y(q),
            Gate::Z(q) => self.pauli_z(q),
            Gate::CX { control, target } => self.cx(control, target),
            _ => {
                return Err(SimError::UnsupportedGate {
                    gate: gate.to_string(),
                    backend: "stabilizer",
                })
            }
        }
        Ok(())
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(SimError::dim(self.n, p.n()));
        }
        Ok(())
    }

    fn anticommutes_row(&self, row: usize, p: &PauliString) -> bool {
        let base = row * self.words;
        let (px, pz) = (p.x_words(), p.z_words());
        let mut parity = 0u32;
        for w in 0..self.words {
            parity ^= ((self.x[base + w] & pz[w]) ^ (self.z[base + w] & px[w])).count_ones();
        }
        parity & 1 == 1
    }

    /// Conjugation by a Pauli flips the sign of every anticommuting row.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check(p)?;
        for row in 0..2 * self.n {
            if self.anticommutes_row(row, p) {
                self.sign[row] = !self.sign[row];
            }
        }
        Ok(())
    }

    /// Row `target` ← row `source` · row `target`.
    fn rowmul(&mut self, target: usize, source: usize) {
        let (tb, sb) = (target * self.words, source * self.words);
        let mut k = 2 * (self.sign[target] as i64 + self.sign[source] as i64);
        for w in 0..self.words {
            k += product_phase_word(
                self.x[sb + w],
                self.z[sb + w],
                self.x[tb + w],
                self.z[tb + w],
            );
            self.x[tb + w] ^= self.x[sb + w];
            self.z[tb + w] ^= self.z[sb + w];
        }
        let k = k.rem_euclid(4);
        debug_assert!(k % 2 == 0, "row product left an imaginary phase");
        self.sign[target] = k == 2;
    }

    fn set_row(&mut self, row: usize, p: &PauliString, negative: bool) {
        let base = row * self.words;
        self.x[base..base + self.words].copy_from_slice(p.x_words());
        self.z[base..base + self.words].copy_from_slice(p.z_words());
        self.sign[row] = negative;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.words, src * self.words);
        self.x.copy_within(s..s + self.words, d);
        self.z.copy_within(s..s + self.words, d);
        self.sign[dst] = self.sign[src];
    }

    /// Sign of `p` within the stabilizer group, or `None` if `p` anticommutes
    /// with some stabilizer.
    fn deterministic_value(&self, p: &PauliString) -> Option<i8> {
        if (self.n..2 * self.n).any(|row| self.anticommutes_row(row, p)) {
            return None;
        }
        // p = ± product of the stabilizers whose destabilizer anticommutes with p
        let mut ax = vec![0u64; self.words];
        let mut az = vec![0u64; self.words];
        let mut k = 0i64;
        for j in (0..self.n).filter(|&j| self.anticommutes_row(j, p)) {
            let base = (self.n + j) * self.words;
            k += 2 * self.sign[self.n + j] as i64;
            for w in 0..self.words {
                k += product_phase_word(self.x[base + w], self.z[base + w], ax[w], az[w]);
                ax[w] ^= self.x[base + w];
                az[w] ^= self.z[base + w];
            }
        }
        debug_assert!(ax == p.x_words() && az == p.z_words());
        let k = k.rem_euclid(4);
        debug_assert!(k % 2 == 0);
        Some(if k == 2 { -1 } else { 1 })
    }

    /// Exact `⟨P⟩ ∈ {−1, 0, +1}`.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        self.check(p)?;
        Ok(self.deterministic_value(p).map_or(0.0, |v| v as f64))
    }

    /// Projective measurement of `p` with tableau update.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> Result<i8> {
        self.check(p)?;
        if p.is_identity() {
            return Err(SimError::Argument(
                "identity observable has the deterministic value +1".into(),
            ));
        }
        let pivot = (self.n..2 * self.n).find(|&row| self.anticommutes_row(row, p));
        match pivot {
            None => Ok(self.deterministic_value(p).expect("commutes with all stabilizers")),
            Some(pivot) => {
                // Row pivot - n is overwritten below, so it is skipped.
                for row in 0..2 * self.n {
                    if row != pivot && row != pivot - self.n && self.anticommutes_row(row, p) {
                        self.rowmul(row, pivot);
                    }
                }
                self.copy_row(pivot - self.n, pivot);
                let negative = rng.random::<bool>();
                self.set_row(pivot, p, negative);
                Ok(if negative { -1 } else { 1 })
            }
        }
    }

    /// Measures every `Z_j` in order.
    pub fn sample_bitstring<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitString {
        let bits = (0..self.n)
            .map(|j| {
                let z = PauliString::single(self.n, j, crate::pauli::Pauli::Z);
                self.measure_pauli(&z, rng).expect("valid Z measurement") == -1
            })
            .collect();
        BitString(bits)
    }

    /// Stabilizers commute pairwise; each destabilizer anticommutes exactly
    /// with its partner stabilizer.
    pub fn is_consistent(&self) -> bool {
        let rows: Vec<PauliString> = (0..2 * self.n).map(|r| self.row(r).0).collect();
        for i in 0..self.n {
            for j in 0..self.n {
                let dj_si = rows[i].commutes_with(&rows[self.n + j]).unwrap();
                if dj_si != (i != j) {
                    return false;
                }
                if !rows[self.n + i].commutes_with(&rows[self.n + j]).unwrap() {
                    return false;
                }
            }
        }
        true
    }
}
