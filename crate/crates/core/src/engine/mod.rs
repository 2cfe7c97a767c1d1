//! State-evolution backends and measurement.
//!
//! [`QuantumState`] wraps one of three representations behind a common
//! interface: a dense statevector, a product of small dense registers, or a
//! stabilizer tableau for Clifford-only evolution.

mod circuit;
mod dense;
mod factored;
mod stabilizer;

pub use circuit::{
    is_unitary, CMatrix, CircuitSeq, Gate, Observable, MAX_DENSE_GATE_QUBITS, UNITARY_TOL,
};
pub use dense::StateVector;
pub use factored::{FactoredState, Register};
pub use stabilizer::Tableau;

pub(crate) use circuit::c;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::pauli::{BitString, PauliString};

/// Default qubit cap for dense amplitude storage (16 MiB of `Complex64`).
pub const DEFAULT_DENSE_CAP: usize = 20;
pub const STABILIZER_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Dense,
    /// Independent registers of `block` consecutive qubits.
    Factored { block: usize },
    Stabilizer,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Factored { .. } => "factored",
            Backend::Stabilizer => "stabilizer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub dense_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Dense(StateVector),
    Factored(FactoredState),
    Stabilizer(Tableau),
}

pub fn prepare_zero(n: usize, backend: Backend, config: &EngineConfig) -> Result<QuantumState> {
    match backend {
        Backend::Dense => {
            if n > config.dense_cap {
                return Err(SimError::capacity("dense qubits", config.dense_cap, n));
            }
            Ok(QuantumState::Dense(StateVector::zero(n)))
        }
        Backend::Factored { block } => Ok(QuantumState::Factored(FactoredState::zero(
            n,
            block,
            config.dense_cap,
        )?)),
        Backend::Stabilizer => {
            if n > STABILIZER_CAP {
                return Err(SimError::capacity("stabilizer qubits", STABILIZER_CAP, n));
            }
            Ok(QuantumState::Stabilizer(Tableau::zero(n)))
        }
    }
}

/// Circuit H(2i), T(2i), CX(2i→2i+1) on every adjacent pair, producing
/// `(|00⟩ + e^{iπ/4}|11⟩)/√2` per pair.
pub fn bell_phase_pairs_circuit(n: usize) -> Result<CircuitSeq> {
    if n % 2 != 0 {
        return Err(SimError::Argument(format!(
            "bell-phase pairs need an even qubit count, got {n}"
        )));
    }
    let mut c = CircuitSeq::new(n);
    for i in (0..n).step_by(2) {
        c.push(Gate::H(i))?;
        c.push(Gate::T(i))?;
        c.push(Gate::CX {
            control: i,
            target: i + 1,
        })?;
    }
    Ok(c)
}

pub fn prepare_bell_phase_pairs(
    n: usize,
    backend: Backend,
    config: &EngineConfig,
) -> Result<QuantumState> {
    if backend == Backend::Stabilizer {
        return Err(SimError::UnsupportedGate {
            gate: "T".into(),
            backend: "stabilizer",
        });
    }
    let circuit = bell_phase_pairs_circuit(n)?;
    let mut state = prepare_zero(n, backend, config)?;
    state.apply_circuit(&circuit)?;
    Ok(state)
}

impl QuantumState {
    pub fn n(&self) -> usize {
        match self {
            QuantumState::Dense(s) => s.n(),
            QuantumState::Factored(s) => s.n(),
            QuantumState::Stabilizer(t) => t.n(),
        }
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            QuantumState::Dense(_) => "dense",
            QuantumState::Factored(_) => "factored",
            QuantumState::Stabilizer(_) => "stabilizer",
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n() {
            return Err(SimError::dim(self.n(), n));
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_n(p.n())?;
        match self {
            QuantumState::Dense(s) => s.apply_pauli(p),
            QuantumState::Factored(s) => s.apply_pauli(p),
            QuantumState::Stabilizer(t) => t.apply_pauli(p),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n())?;
        match self {
            QuantumState::Dense(s) => {
                s.apply_gate(gate);
                Ok(())
            }
            QuantumState::Factored(s) => s.apply_gate(gate),
            QuantumState::Stabilizer(t) => t.apply_gate(gate),
        }
    }

    /// Applies gates in order. On the stabilizer backend the whole circuit is
    /// checked for non-Clifford gates before anything is applied.
    pub fn apply_circuit(&mut self, circuit: &CircuitSeq) -> Result<()> {
        self.check_n(circuit.n())?;
        if let QuantumState::Stabilizer(_) = self {
            if let Some(g) = circuit.gates().iter().find(|g| !g.is_clifford()) {
                return Err(SimError::UnsupportedGate {
                    gate: g.to_string(),
                    backend: "stabilizer",
                });
            }
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        self.check_n(p.n())?;
        match self {
            QuantumState::Dense(s) => s.expectation_pauli(p),
            QuantumState::Factored(s) => s.expectation_pauli(p),
            QuantumState::Stabilizer(t) => t.expectation_pauli(p),
        }
    }

    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        self.check_n(o.n())?;
        o.terms()
            .iter()
            .map(|(coef, p)| Ok(coef * self.expectation_pauli(p)?))
            .sum()
    }

    pub fn sample_pauli_eigenvalue<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        rng: &mut R,
    ) -> Result<i8> {
        self.check_n(p.n())?;
        match self {
            QuantumState::Dense(s) => s.sample_pauli_eigenvalue(p, rng),
            QuantumState::Factored(s) => s.sample_pauli_eigenvalue(p, rng),
            QuantumState::Stabilizer(t) => t.measure_pauli(p, rng),
        }
    }

    pub fn sample_bitstring<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitString {
        match self {
            QuantumState::Dense(s) => s.sample_bitstring(rng),
            QuantumState::Factored(s) => s.sample_bitstring(rng),
            QuantumState::Stabilizer(t) => t.sample_bitstring(rng),
        }
    }

    /// Dense amplitudes, when the representation has them.
    pub fn to_statevector(&self) -> Result<StateVector> {
        match self {
            QuantumState::Dense(s) => Ok(s.clone()),
            QuantumState::Factored(s) => s.to_dense(),
            QuantumState::Stabilizer(_) => Err(SimError::Argument(
                "stabilizer states carry no amplitudes".into(),
            )),
        }
    }
}
