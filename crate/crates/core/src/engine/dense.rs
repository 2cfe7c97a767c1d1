use num_complex::Complex64;
use rand::Rng;

use super::circuit::{c, CMatrix, Gate};
use crate::error::{Result, SimError};
use crate::pauli::{BitString, PauliString};

/// Dense statevector; basis index bit `j` is qubit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> StateVector {
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        StateVector { n, amps }
    }

    /// Wrap raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::Argument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        let s = StateVector { n, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(SimError::Validation(format!(
                "state norm^2 is {}",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        StateVector {
            n: self.n + other.n,
            amps,
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match gate {
            Gate::H(q)
            | Gate::S(q)
            | Gate::T(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::RX { qubit: q, .. }
            | Gate::RY { qubit: q, .. }
            | Gate::RZ { qubit: q, .. } => {
                let m = gate.matrix();
                self.apply_1q(*q, [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
            }
            Gate::CX { control, target } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
            Gate::RZZ { a, b, theta } => {
                let ph = Complex64::from_polar(1.0, -theta / 2.0);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    let parity = ((i >> a) ^ (i >> b)) & 1;
                    *amp *= if parity == 0 { ph } else { ph.conj() };
                }
            }
            Gate::Dense { targets, matrix } => self.apply_matrix(targets, matrix, &[], 0),
            Gate::MultiplexedRy { .. } => {
                self.apply_matrix(&gate.qubits(), &gate.matrix(), &[], 0)
            }
        }
    }

    /// Row-major 2x2 `[m00, m01, m10, m11]` on qubit `q`.
    pub fn apply_1q(&mut self, q: usize, m: [Complex64; 4]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[i | bit] = m[2] * a0 + m[3] * a1;
            }
        }
    }

    /// Apply `matrix` on `targets` (index bit j = `targets[j]`) to the
    /// subspace where `controls` read `pattern` (bit j = `controls[j]`).
    pub fn apply_matrix(
        &mut self,
        targets: &[usize],
        matrix: &CMatrix,
        controls: &[usize],
        pattern: usize,
    ) {
        let dim = 1usize << targets.len();
        debug_assert_eq!(matrix.nrows(), dim);
        let target_mask: usize = targets.iter().map(|&q| 1usize << q).sum();
        let (ctrl_mask, ctrl_value) =
            controls
                .iter()
                .enumerate()
                .fold((0usize, 0usize), |(m, v), (j, &q)| {
                    (m | (1 << q), v | (((pattern >> j) & 1) << q))
                });
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .map(|(j, &q)| ((local >> j) & 1) << q)
                    .sum()
            })
            .collect();
        let mut buf = vec![c(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 || base & ctrl_mask != ctrl_value {
                continue;
            }
            for (slot, &off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (col, v) in buf.iter().enumerate() {
                    acc += matrix[(row, col)] * v;
                }
                self.amps[base | off] = acc;
            }
        }
    }

    fn check_pauli(&self, p: &PauliString) -> Result<(u64, u64)> {
        if p.n() != self.n {
            return Err(SimError::dim(self.n, p.n()));
        }
        Ok(p.masks())
    }

    /// `P|b⟩ = i^{#Y} (-1)^{|b ∧ z|} |b ⊕ x⟩`.
    fn pauli_phase(b: usize, y_phase: Complex64, z: u64) -> Complex64 {
        if ((b as u64) & z).count_ones() % 2 == 1 {
            -y_phase
        } else {
            y_phase
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        let (x, z) = self.check_pauli(p)?;
        let y_phase = crate::pauli::Phase::from_exponent(p.y_count() as i64).to_complex();
        let x = x as usize;
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            out[b ^ x] = Self::pauli_phase(b, y_phase, z) * a;
        }
        self.amps = out;
        Ok(())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        let (x, z) = self.check_pauli(p)?;
        let y_phase = crate::pauli::Phase::from_exponent(p.y_count() as i64).to_complex();
        let x = x as usize;
        let mut acc = c(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ x].conj() * Self::pauli_phase(b, y_phase, z) * a;
        }
        Ok(acc.re)
    }

    /// Born-rule sample of the eigenvalue of `p`, collapsing the state.
    pub fn sample_pauli_eigenvalue<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        rng: &mut R,
    ) -> Result<i8> {
        if p.is_identity() {
            return Err(SimError::Argument(
                "identity observable has the deterministic value +1".into(),
            ));
        }
        let e = self.expectation_pauli(p)?;
        let p_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let outcome: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        // project onto (I + s P)/2
        let mut image = self.clone();
        image.apply_pauli(p)?;
        let s = outcome as f64;
        for (a, pa) in self.amps.iter_mut().zip(&image.amps) {
            *a = (*a + pa * s) * 0.5;
        }
        self.renormalize();
        Ok(outcome)
    }

    /// Computational-basis sample, collapsing the state.
    pub fn sample_bitstring<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitString {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last_nonzero = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let pr = a.norm_sqr();
            if pr > 0.0 {
                last_nonzero = i;
            }
            acc += pr;
            if r < acc {
                chosen = Some(i);
                break;
            }
        }
        // rounding can leave acc slightly below 1
        let idx = chosen.unwrap_or(last_nonzero);
        let phase = self.amps[idx] / self.amps[idx].norm();
        self.amps.iter_mut().for_each(|a| *a = c(0.0, 0.0));
        self.amps[idx] = phase;
        BitString::from_index(self.n, idx as u64)
    }

    fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= norm);
        }
    }
}
