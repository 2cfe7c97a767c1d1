//! Exact references: density matrices, closed-form depolarizing values,
//! readout Hamming-weight laws and the two-qubit transverse-field Ising
//! evolution.
//!
//! Everything here is built from explicit matrices and never touches the
//! statevector engine, so it can be used to check it.

mod fit;
mod tfim;

pub use fit::{fit_decay_time, DecayFit};
pub use tfim::{
    predicted_decay_time, tfim_eigenbasis, tfim_exact_evolve, tfim_hamiltonian, tfim_propagator,
    PopulationSeries, TfimEigenbasis, TfimParams,
};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::channels::{RandomUnitaryChannel, Unitary};
use crate::engine::{CMatrix, Gate, Observable, StateVector};
use crate::error::{Result, SimError};
use crate::pauli::{Pauli, PauliString, MAX_INDEXED_QUBITS};

pub const MAX_ORACLE_QUBITS: usize = 6;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_oracle_n(n: usize) -> Result<()> {
    if n > MAX_ORACLE_QUBITS {
        return Err(SimError::capacity("oracle qubits", MAX_ORACLE_QUBITS, n));
    }
    Ok(())
}

fn single_pauli_matrix(p: Pauli) -> CMatrix {
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    match p {
        Pauli::I => CMatrix::identity(2, 2),
        Pauli::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        Pauli::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `P_{n-1} ⊗ … ⊗ P_0`, so qubit 0 is the least significant index bit.
pub fn pauli_matrix(p: &PauliString) -> Result<CMatrix> {
    check_oracle_n(p.n())?;
    let mut m = CMatrix::identity(1, 1);
    for q in (0..p.n()).rev() {
        m = m.kronecker(&single_pauli_matrix(p.get(q)));
    }
    Ok(m)
}

pub fn observable_matrix(o: &Observable) -> Result<CMatrix> {
    let dim = 1usize << o.n().min(MAX_ORACLE_QUBITS + 1);
    let mut m = CMatrix::zeros(dim, dim);
    for (coef, p) in o.terms() {
        m += pauli_matrix(p)? * c(*coef, 0.0);
    }
    Ok(m)
}

/// Gate matrix acting on `n` qubits, by explicit index bookkeeping.
pub fn gate_matrix(gate: &Gate, n: usize) -> Result<CMatrix> {
    check_oracle_n(n)?;
    gate.validate(n)?;
    let qubits = gate.qubits();
    let local = gate.matrix();
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let compress = |i: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(j, &q)| ((i >> q) & 1) << j)
            .sum()
    };
    let expand = |l: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(j, &q)| ((l >> j) & 1) << q)
            .sum()
    };
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !mask;
        let lc = compress(col);
        for lr in 0..local.nrows() {
            let v = local[(lr, lc)];
            if v != c(0.0, 0.0) {
                m[(rest | expand(lr), col)] = v;
            }
        }
    }
    Ok(m)
}

pub fn unitary_matrix(u: &Unitary) -> Result<CMatrix> {
    match u {
        Unitary::Pauli(p) => pauli_matrix(p),
        Unitary::Dense(m) => Ok(m.clone()),
        Unitary::Circuit(circuit) => {
            check_oracle_n(circuit.n())?;
            let dim = 1usize << circuit.n();
            let mut m = CMatrix::identity(dim, dim);
            for g in circuit.gates() {
                m = gate_matrix(g, circuit.n())? * m;
            }
            Ok(m)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Result<DensityMatrix> {
        check_oracle_n(n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        m[(0, 0)] = c(1.0, 0.0);
        Ok(DensityMatrix { n, m })
    }

    pub fn maximally_mixed(n: usize) -> Result<DensityMatrix> {
        check_oracle_n(n)?;
        let dim = 1usize << n;
        let m = CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0);
        Ok(DensityMatrix { n, m })
    }

    pub fn from_pure(psi: &StateVector) -> Result<DensityMatrix> {
        check_oracle_n(psi.n())?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok(DensityMatrix {
            n: psi.n(),
            m: &v * v.adjoint(),
        })
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(m: CMatrix) -> Result<DensityMatrix> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(SimError::Validation(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_oracle_n(n)?;
        let rho = DensityMatrix { n, m };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.m - self.m.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.m + self.m.adjoint()) * c(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(SimError::Validation(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(SimError::Validation(format!("density matrix trace is {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(SimError::Validation(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.m.nrows() || u.ncols() != self.m.ncols() {
            return Err(SimError::dim(self.m.nrows(), u.nrows()));
        }
        Ok(DensityMatrix {
            n: self.n,
            m: u * &self.m * u.adjoint(),
        })
    }

    /// `Re Tr[M ρ]`.
    pub fn expectation_matrix(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.m.nrows() {
            return Err(SimError::dim(self.m.nrows(), op.nrows()));
        }
        Ok((op * &self.m).trace().re)
    }

    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        if o.n() != self.n {
            return Err(SimError::dim(self.n, o.n()));
        }
        self.expectation_matrix(&observable_matrix(o)?)
    }

    /// Computational-basis populations.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m.nrows()).map(|i| self.m[(i, i)].re).collect()
    }
}

/// `Σ_i p_i U_i ρ U_i†` over the full enumeration of `channel`.
pub fn apply_channel_exact(
    rho: &DensityMatrix,
    channel: &RandomUnitaryChannel,
    cap: usize,
) -> Result<DensityMatrix> {
    if channel.n() != rho.n {
        return Err(SimError::dim(rho.n, channel.n()));
    }
    let e = channel.enumerate_explicit(cap)?;
    let mut out = CMatrix::zeros(rho.m.nrows(), rho.m.ncols());
    for (p, u) in e.terms() {
        if p == 0.0 {
            continue;
        }
        let um = unitary_matrix(u)?;
        out += (&um * &rho.m * um.adjoint()) * c(p, 0.0);
    }
    Ok(DensityMatrix { n: rho.n, m: out })
}

/// `λ = 4^n / (4^n − 1) · p`.
pub fn lambda(n: usize, p: f64) -> Result<f64> {
    if n == 0 || n > MAX_INDEXED_QUBITS {
        return Err(SimError::capacity("depolarizing qubits", MAX_INDEXED_QUBITS, n));
    }
    Ok(p / (1.0 - 0.25f64.powi(n as i32)))
}

/// `(1 − λ) Tr[Oρ] + λ Tr[O] / 2^n`, with `Tr[O] / 2^n` passed directly as
/// the identity weight so that large `n` never forms `2^n`.
pub fn depolarized_value(n: usize, p: f64, tr_o_rho: f64, identity_weight: f64) -> Result<f64> {
    let l = lambda(n, p)?;
    Ok((1.0 - l) * tr_o_rho + l * identity_weight)
}

pub fn depolarized_expectation(o: &Observable, rho: &DensityMatrix, p: f64) -> Result<f64> {
    let tr = rho.expectation(o)?;
    depolarized_value(rho.n, p, tr, o.identity_weight())
}

/// `⟨Z_i⟩` on depolarized `|0^n⟩`: `1 − λ`.
pub fn zero_state_z_expectation(n: usize, p: f64) -> Result<f64> {
    depolarized_value(n, p, 1.0, 0.0)
}

/// `⟨X_{2i} X_{2i+1}⟩` on depolarized bell-phase pairs: `(1 − λ)/√2`.
pub fn bell_phase_xx_expectation(n: usize, p: f64) -> Result<f64> {
    depolarized_value(n, p, std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

fn binomial_pmf(n: usize, q: f64) -> Vec<f64> {
    let mut coef = 1.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coef = coef * (n - k + 1) as f64 / k as f64;
            }
            coef * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32)
        })
        .collect()
}

/// Readout Hamming-weight law of depolarized `|0^n⟩` with independent
/// bit-flips: `(1 − λ) Bin(n, p_flip) + λ Bin(n, 1/2)`.
pub fn hamming_distribution(n: usize, p: f64, p_flip: f64) -> Result<Vec<f64>> {
    for (name, v) in [("p", p), ("p_flip", p_flip)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(SimError::Argument(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let l = lambda(n, p)?;
    let clean = binomial_pmf(n, p_flip);
    let mixed = binomial_pmf(n, 0.5);
    Ok(clean
        .iter()
        .zip(&mixed)
        .map(|(a, b)| (1.0 - l) * a + l * b)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::DEFAULT_ENUMERATION_CAP;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn pauli_matrix_ordering() {
        // X on qubit 0 flips the least significant bit
        let m = pauli_matrix(&ps("XI")).unwrap();
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 0)], c(0.0, 0.0));
        let z1 = pauli_matrix(&ps("IZ")).unwrap();
        assert_eq!(z1[(2, 2)], c(-1.0, 0.0));
        assert_eq!(z1[(1, 1)], c(1.0, 0.0));
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = DensityMatrix::zero(2).unwrap();
        let out =
            apply_channel_exact(&rho, &RandomUnitaryChannel::identity(2), DEFAULT_ENUMERATION_CAP)
                .unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn full_depolarization_gives_maximally_mixed() {
        let mut psi = StateVector::zero(1);
        psi.apply_gate(&Gate::H(0));
        psi.apply_gate(&Gate::T(0));
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let ch = RandomUnitaryChannel::depolarizing(1, 0.75).unwrap();
        let out = apply_channel_exact(&rho, &ch, 16).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((out.matrix() - mixed.matrix()).iter().all(|e| e.norm() < 1e-15));
    }

    #[test]
    fn unital() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let ch = RandomUnitaryChannel::explicit(
            vec![0.3, 0.7],
            vec![
                Unitary::Pauli(ps("XY")),
                Unitary::Circuit(
                    crate::engine::CircuitSeq::from_gates(
                        2,
                        vec![Gate::H(0), Gate::CX { control: 0, target: 1 }, Gate::T(1)],
                    )
                    .unwrap(),
                ),
            ],
        )
        .unwrap();
        let out = apply_channel_exact(&mixed, &ch, 16).unwrap();
        assert!((out.matrix() - mixed.matrix()).iter().all(|e| e.norm() < 1e-14));
        out.check_invariants().unwrap();
    }

    #[test]
    fn closed_form_values() {
        assert!((zero_state_z_expectation(1, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((zero_state_z_expectation(2, 0.5).unwrap() - (1.0 - 16.0 / 15.0 * 0.5)).abs() < 1e-15);
        let rho = DensityMatrix::zero(3).unwrap();
        let o = Observable::from(ps("ZII"));
        assert_eq!(depolarized_expectation(&o, &rho, 0.0).unwrap(), 1.0);
        // λ = 1 kills the bell-pair correlator
        assert!(bell_phase_xx_expectation(2, 15.0 / 16.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_density_matrix() {
        let rho = DensityMatrix::zero(2).unwrap();
        let o = Observable::new(vec![(0.5, ps("ZI")), (2.0, ps("II")), (-1.0, ps("ZZ"))]).unwrap();
        let p = 0.3;
        let exact = apply_channel_exact(&rho, &RandomUnitaryChannel::depolarizing(2, p).unwrap(), 16)
            .unwrap()
            .expectation(&o)
            .unwrap();
        assert!((exact - depolarized_expectation(&o, &rho, p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distribution(4, 0.0, 0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let full = hamming_distribution(3, 63.0 / 64.0, 0.2).unwrap();
        for (a, b) in full.iter().zip(binomial_pmf(3, 0.5)) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = hamming_distribution(2, 0.5, 0.0).unwrap();
        for (a, b) in d.iter().zip([0.6, 4.0 / 15.0, 2.0 / 15.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(hamming_distribution(2, 1.5, 0.0).is_err());
        assert!(DensityMatrix::zero(7).is_err());
        let bad = CMatrix::identity(2, 2);
        assert!(DensityMatrix::from_matrix(bad).is_err());
    }

    #[test]
    fn gate_matrix_cx_control_low() {
        let m = gate_matrix(&Gate::CX { control: 1, target: 0 }, 2).unwrap();
        // |q1=1, q0=0⟩ = index 2 → index 3
        assert_eq!(m[(3, 2)], c(1.0, 0.0));
        assert_eq!(m[(1, 1)], c(1.0, 0.0));
    }
}
