//! Ancilla-based baseline: encode `√p_i` on `⌈log₂ m⌉` ancillas, apply each
//! `U_i` to the target controlled on ancilla pattern `i`, and read `O ⊗ I`.

use serde::{Deserialize, Serialize};

use crate::channels::{RandomUnitaryChannel, Unitary};
use crate::engine::{CircuitSeq, EngineConfig, Gate, Observable, StateVector};
use crate::error::{Result, SimError};

/// Largest number of multiplexed branches accepted by [`build_dilated`].
pub const MAX_BRANCHES: usize = 64;

pub fn ancilla_count(m: u64) -> usize {
    if m <= 1 {
        0
    } else {
        (64 - (m - 1).leading_zeros()) as usize
    }
}

/// Binary tree of uniformly controlled RY rotations taking `|0…0⟩` to
/// `Σ_i √p_i |i⟩`, with ancilla `j` holding bit `j` of `i`.
pub fn build_state_prep(probs: &[f64]) -> Result<CircuitSeq> {
    let m = probs.len();
    if m == 0 {
        return Err(SimError::Argument("state prep needs at least one probability".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(SimError::Argument(format!("invalid probability {p}")));
    }
    let k = ancilla_count(m as u64);
    let mut weights = probs.to_vec();
    weights.resize(1 << k, 0.0);
    let mut c = CircuitSeq::new(k);
    // qubit k-1 (most significant) first, then each lower bit conditioned on
    // all the bits above it
    for target in (0..k).rev() {
        let controls: Vec<usize> = (target + 1..k).collect();
        let angles: Vec<f64> = (0..1usize << controls.len())
            .map(|hi| {
                let block = 1usize << target;
                let start = hi << (target + 1);
                let w0: f64 = weights[start..start + block].iter().sum();
                let w1: f64 = weights[start + block..start + 2 * block].iter().sum();
                2.0 * w1.sqrt().atan2(w0.sqrt())
            })
            .collect();
        if controls.is_empty() {
            c.push(Gate::RY {
                qubit: target,
                theta: angles[0],
            })?;
        } else {
            c.push(Gate::MultiplexedRy {
                controls,
                target,
                angles,
            })?;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilatedCircuit {
    pub n_target: usize,
    pub n_ancilla: usize,
    /// Acts on ancilla-local qubits `0..n_ancilla`.
    pub prep: CircuitSeq,
    /// `(ancilla pattern, U_i on the target)`.
    pub multiplexer: Vec<(usize, Unitary)>,
}

impl DilatedCircuit {
    pub fn total_qubits(&self) -> usize {
        self.n_target + self.n_ancilla
    }
}

pub fn build_dilated(channel: &RandomUnitaryChannel, n_target: usize) -> Result<DilatedCircuit> {
    if channel.n() != n_target {
        return Err(SimError::dim(n_target, channel.n()));
    }
    let e = channel.enumerate_explicit(MAX_BRANCHES)?;
    let prep = build_state_prep(e.probs())?;
    Ok(DilatedCircuit {
        n_target,
        n_ancilla: prep.n(),
        prep,
        multiplexer: e.unitaries().iter().cloned().enumerate().collect(),
    })
}

/// Pure dilated state: target prep, ancilla prep, then the controlled blocks.
/// Targets are qubits `0..n_target`, ancillas follow.
pub fn dilated_state(
    d: &DilatedCircuit,
    prep_target: &CircuitSeq,
    config: &EngineConfig,
) -> Result<StateVector> {
    if prep_target.n() != d.n_target {
        return Err(SimError::dim(d.n_target, prep_target.n()));
    }
    let total = d.total_qubits();
    if total > config.dense_cap {
        return Err(SimError::capacity("dense qubits", config.dense_cap, total));
    }
    let mut psi = StateVector::zero(total);
    for g in prep_target.gates() {
        psi.apply_gate(g);
    }
    for g in d.prep.shifted(d.n_target, total)?.gates() {
        psi.apply_gate(g);
    }
    let ancillas: Vec<usize> = (d.n_target..total).collect();
    for (pattern, u) in &d.multiplexer {
        for g in u.to_circuit().gates() {
            psi.apply_matrix(&g.qubits(), &g.matrix(), &ancillas, *pattern);
        }
    }
    Ok(psi)
}

/// `⟨Ψ| O ⊗ I_anc |Ψ⟩`, which equals `⟨O⟩` on the channel output.
pub fn run_dilated_expectation(
    d: &DilatedCircuit,
    prep_target: &CircuitSeq,
    observable: &Observable,
    config: &EngineConfig,
) -> Result<f64> {
    if observable.n() != d.n_target {
        return Err(SimError::dim(d.n_target, observable.n()));
    }
    let psi = dilated_state(d, prep_target, config)?;
    let total = d.total_qubits();
    observable
        .terms()
        .iter()
        .map(|(coef, p)| Ok(coef * psi.expectation_pauli(&p.embed(total, 0)?)?))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub qubits: u64,
    /// Multiplexed segments; the depth is at least this.
    pub depth_lower_bound: u64,
    pub circuits: u64,
    pub controlled_op_count: u64,
    pub controls_per_op: u64,
}

/// Per-shot sampling needs only the target register and one short circuit
/// per distinct draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridResources {
    pub qubits: u64,
    pub depth: u64,
    pub circuits: u64,
}

pub fn resource_estimate(n: usize, m: u64) -> Result<ResourceEstimate> {
    if m == 0 {
        return Err(SimError::Argument("channel needs at least one term".into()));
    }
    let a = ancilla_count(m) as u64;
    Ok(ResourceEstimate {
        qubits: n as u64 + a,
        depth_lower_bound: m,
        circuits: 1,
        controlled_op_count: m,
        controls_per_op: a,
    })
}

pub fn hybrid_resources(n: usize, m: u64, n_shots: u64) -> HybridResources {
    HybridResources {
        qubits: n as u64,
        depth: 1,
        circuits: m.min(n_shots),
    }
}
