//! Random-unitary channels: `E(ρ) = Σ_i p_i U_i ρ U_i†`.

mod spec;

pub use spec::{parse_channel_spec, to_channel_spec, ChannelSpec, GateSpec, OpSpec, TermSpec};

use std::fmt;

use rand::Rng;

use crate::engine::{
    is_unitary, CMatrix, CircuitSeq, EngineConfig, Gate, QuantumState, StateVector,
    MAX_DENSE_GATE_QUBITS,
};
use crate::error::{Result, SimError};
use crate::pauli::{sample_nonidentity_uniform, PauliString, MAX_INDEXED_QUBITS};

/// Tolerance on `Σ p_i = 1` for programmatically built channels.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Default term limit for [`RandomUnitaryChannel::enumerate_explicit`].
pub const DEFAULT_ENUMERATION_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Unitary {
    Pauli(PauliString),
    Circuit(CircuitSeq),
    /// Matrix on all `n` qubits of the channel (`n <= 3`).
    Dense(CMatrix),
}

impl Unitary {
    pub fn n(&self) -> usize {
        match self {
            Unitary::Pauli(p) => p.n(),
            Unitary::Circuit(c) => c.n(),
            Unitary::Dense(m) => m.nrows().trailing_zeros() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Unitary::Pauli(_) => Ok(()),
            Unitary::Circuit(c) => c.gates().iter().try_for_each(|g| g.validate(c.n())),
            Unitary::Dense(m) => {
                if m.nrows() != m.ncols() || !m.nrows().is_power_of_two() {
                    return Err(SimError::Validation(format!(
                        "dense unitary must be square with power-of-two size, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if self.n() > MAX_DENSE_GATE_QUBITS {
                    return Err(SimError::Validation(format!(
                        "dense unitary on {} qubits exceeds the {MAX_DENSE_GATE_QUBITS}-qubit limit",
                        self.n()
                    )));
                }
                if !is_unitary(m, crate::engine::UNITARY_TOL) {
                    return Err(SimError::Validation("matrix is not unitary".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_clifford(&self) -> bool {
        match self {
            Unitary::Pauli(_) => true,
            Unitary::Circuit(c) => c.is_clifford(),
            Unitary::Dense(_) => false,
        }
    }

    pub fn to_circuit(&self) -> CircuitSeq {
        match self {
            Unitary::Pauli(p) => CircuitSeq::from_pauli(p),
            Unitary::Circuit(c) => c.clone(),
            Unitary::Dense(m) => {
                let n = self.n();
                let mut c = CircuitSeq::new(n);
                if n > 0 {
                    c.push(Gate::Dense {
                        targets: (0..n).collect(),
                        matrix: m.clone(),
                    })
                    .expect("validated dense unitary");
                }
                c
            }
        }
    }

    /// `next ∘ self`: apply `self`, then `next`.
    pub fn then(&self, next: &Unitary) -> Result<Unitary> {
        let mut c = self.to_circuit();
        c.extend(&next.to_circuit())?;
        Ok(Unitary::Circuit(c))
    }

    /// Apply to a state, using the Pauli fast path when possible.
    pub fn apply(&self, state: &mut QuantumState) -> Result<()> {
        match self {
            Unitary::Pauli(p) => state.apply_pauli(p),
            _ => state.apply_circuit(&self.to_circuit()),
        }
    }

    /// Full `2^n × 2^n` matrix, built column by column on the dense engine.
    pub fn to_matrix(&self, config: &EngineConfig) -> Result<CMatrix> {
        if let Unitary::Dense(m) = self {
            return Ok(m.clone());
        }
        let n = self.n();
        if n > config.dense_cap {
            return Err(SimError::capacity("dense qubits", config.dense_cap, n));
        }
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut amps = vec![crate::engine::c(0.0, 0.0); dim];
            amps[col] = crate::engine::c(1.0, 0.0);
            let mut s = QuantumState::Dense(StateVector::from_amplitudes(amps)?);
            self.apply(&mut s)?;
            let QuantumState::Dense(out) = s else {
                unreachable!()
            };
            for (row, a) in out.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unitary::Pauli(p) => write!(f, "{p}"),
            Unitary::Circuit(c) => {
                let names: Vec<String> = c.gates().iter().map(|g| g.to_string()).collect();
                write!(f, "[{}]", names.join(" "))
            }
            Unitary::Dense(m) => write!(f, "dense{}x{}", m.nrows(), m.ncols()),
        }
    }
}

/// Finite list of `(p_i, U_i)` with a precomputed cumulative table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitChannel {
    n: usize,
    probs: Vec<f64>,
    unitaries: Vec<Unitary>,
    cdf: Vec<f64>,
}

impl ExplicitChannel {
    fn build(n: usize, probs: Vec<f64>, unitaries: Vec<Unitary>) -> ExplicitChannel {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        ExplicitChannel {
            n,
            probs,
            unitaries,
            cdf,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn unitaries(&self) -> &[Unitary] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &Unitary)> {
        self.probs.iter().copied().zip(&self.unitaries)
    }

    /// Categorical draw; returns the term index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("non-empty channel");
        let u = rng.random::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx < self.probs.len() {
            return idx;
        }
        // u landed on the rounding sliver past the last partial sum
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RandomUnitaryChannel {
    Explicit(ExplicitChannel),
    /// Identity with weight `1 - p`, each non-identity Pauli `p / (4^n - 1)`.
    Depolarizing { n: usize, p: f64 },
    /// Steps in application order: `steps[0]` acts first.
    Composed { n: usize, steps: Vec<RandomUnitaryChannel> },
}

/// Identity of a sampled operator, used to group shots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DrawKey {
    /// Term index of an explicit channel.
    Term(usize),
    /// Canonical text form of a sampled Pauli.
    Pauli(String),
    /// Never grouped with any other draw.
    Unique,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub unitary: Unitary,
    pub key: DrawKey,
}

impl RandomUnitaryChannel {
    /// Validated explicit channel; probabilities must sum to 1 within 1e−12.
    pub fn explicit(probs: Vec<f64>, unitaries: Vec<Unitary>) -> Result<RandomUnitaryChannel> {
        Self::explicit_with_tolerance(probs, unitaries, PROB_SUM_TOL)
    }

    pub(crate) fn explicit_with_tolerance(
        probs: Vec<f64>,
        unitaries: Vec<Unitary>,
        tol: f64,
    ) -> Result<RandomUnitaryChannel> {
        if probs.is_empty() {
            return Err(SimError::Validation("channel has no terms".into()));
        }
        if probs.len() != unitaries.len() {
            return Err(SimError::Validation(format!(
                "{} probabilities for {} unitaries",
                probs.len(),
                unitaries.len()
            )));
        }
        let n = unitaries[0].n();
        for (i, (p, u)) in probs.iter().zip(&unitaries).enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(SimError::Validation(format!(
                    "term {i} has negative or non-finite probability {p}"
                )));
            }
            if u.n() != n {
                return Err(SimError::Validation(format!(
                    "term {i} acts on {} qubits, expected {n}",
                    u.n()
                )));
            }
            u.validate()
                .map_err(|e| SimError::Validation(format!("term {i}: {e}")))?;
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(SimError::Validation(format!("probabilities sum to {sum}")));
        }
        let probs = if sum != 1.0 {
            probs.iter().map(|p| p / sum).collect()
        } else {
            probs
        };
        Ok(RandomUnitaryChannel::Explicit(ExplicitChannel::build(
            n, probs, unitaries,
        )))
    }

    /// A single unitary applied with certainty.
    pub fn unitary(u: Unitary) -> Result<RandomUnitaryChannel> {
        Self::explicit(vec![1.0], vec![u])
    }

    pub fn identity(n: usize) -> RandomUnitaryChannel {
        RandomUnitaryChannel::Explicit(ExplicitChannel::build(
            n,
            vec![1.0],
            vec![Unitary::Pauli(PauliString::identity(n))],
        ))
    }

    pub fn depolarizing(n: usize, p: f64) -> Result<RandomUnitaryChannel> {
        if n == 0 || n > MAX_INDEXED_QUBITS {
            return Err(SimError::capacity("depolarizing qubits", MAX_INDEXED_QUBITS, n));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::Argument(format!(
                "depolarizing strength {p} outside [0, 1]"
            )));
        }
        Ok(RandomUnitaryChannel::Depolarizing { n, p })
    }

    /// `a ∘ b`: `b` acts first, then `a`.
    pub fn compose(a: &RandomUnitaryChannel, b: &RandomUnitaryChannel) -> Result<RandomUnitaryChannel> {
        if a.n() != b.n() {
            return Err(SimError::dim(a.n(), b.n()));
        }
        let mut steps = b.clone().into_steps();
        steps.extend(a.clone().into_steps());
        Ok(RandomUnitaryChannel::Composed { n: a.n(), steps })
    }

    /// The channel applied `k` times in a row (`k >= 1`).
    pub fn repeated(step: &RandomUnitaryChannel, k: usize) -> Result<RandomUnitaryChannel> {
        if k == 0 {
            return Ok(RandomUnitaryChannel::identity(step.n()));
        }
        let mut steps = Vec::new();
        for _ in 0..k {
            steps.extend(step.clone().into_steps());
        }
        Ok(RandomUnitaryChannel::Composed { n: step.n(), steps })
    }

    fn into_steps(self) -> Vec<RandomUnitaryChannel> {
        match self {
            RandomUnitaryChannel::Composed { steps, .. } => steps,
            other => vec![other],
        }
    }

    pub fn n(&self) -> usize {
        match self {
            RandomUnitaryChannel::Explicit(e) => e.n,
            RandomUnitaryChannel::Depolarizing { n, .. } => *n,
            RandomUnitaryChannel::Composed { n, .. } => *n,
        }
    }

    /// Number of terms a full enumeration would produce, saturating.
    pub fn term_count(&self) -> u128 {
        match self {
            RandomUnitaryChannel::Explicit(e) => e.len() as u128,
            RandomUnitaryChannel::Depolarizing { n, .. } => {
                if *n >= 63 {
                    u128::MAX
                } else {
                    1u128 << (2 * n)
                }
            }
            RandomUnitaryChannel::Composed { steps, .. } => steps
                .iter()
                .fold(1u128, |acc, s| acc.saturating_mul(s.term_count())),
        }
    }

    /// Whether every operator this channel can draw is Clifford.
    pub fn is_clifford(&self) -> bool {
        match self {
            RandomUnitaryChannel::Explicit(e) => e.unitaries.iter().all(Unitary::is_clifford),
            RandomUnitaryChannel::Depolarizing { .. } => true,
            RandomUnitaryChannel::Composed { steps, .. } => steps.iter().all(Self::is_clifford),
        }
    }

    /// One draw `U_i ~ {p_i}`. Constant time per draw for depolarizing
    /// channels; a composed channel yields the concatenated circuit of one
    /// draw per step.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Draw> {
        match self {
            RandomUnitaryChannel::Explicit(e) => {
                let i = e.sample_index(rng);
                Ok(Draw {
                    unitary: e.unitaries[i].clone(),
                    key: DrawKey::Term(i),
                })
            }
            RandomUnitaryChannel::Depolarizing { n, p } => {
                let pauli = if rng.random::<f64>() < 1.0 - p {
                    PauliString::identity(*n)
                } else {
                    sample_nonidentity_uniform(*n, rng)?
                };
                Ok(Draw {
                    key: DrawKey::Pauli(pauli.to_string()),
                    unitary: Unitary::Pauli(pauli),
                })
            }
            RandomUnitaryChannel::Composed { n, steps } => {
                let mut circuit = CircuitSeq::new(*n);
                for step in steps {
                    circuit.extend(&step.sample(rng)?.unitary.to_circuit())?;
                }
                Ok(Draw {
                    unitary: Unitary::Circuit(circuit),
                    key: DrawKey::Unique,
                })
            }
        }
    }

    pub fn sample_operator<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Unitary> {
        Ok(self.sample(rng)?.unitary)
    }

    /// Like [`sample_operator`](Self::sample_operator) but keeps one entry per
    /// step of a composed channel instead of concatenating them.
    pub fn sample_sequence<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Unitary>> {
        match self {
            RandomUnitaryChannel::Composed { steps, .. } => steps
                .iter()
                .map(|s| s.sample_operator(rng))
                .collect(),
            other => Ok(vec![other.sample_operator(rng)?]),
        }
    }

    /// Full `(p_i, U_i)` list; fails when it would exceed `cap` terms.
    pub fn enumerate_explicit(&self, cap: usize) -> Result<ExplicitChannel> {
        let count = self.term_count();
        if count > cap as u128 {
            return Err(SimError::capacity(
                "enumerated channel terms",
                cap,
                usize::try_from(count).unwrap_or(usize::MAX),
            ));
        }
        match self {
            RandomUnitaryChannel::Explicit(e) => Ok(e.clone()),
            RandomUnitaryChannel::Depolarizing { n, p } => {
                let m = 1u64 << (2 * n);
                let each = p / (m - 1) as f64;
                let mut probs = Vec::with_capacity(m as usize);
                let mut unitaries = Vec::with_capacity(m as usize);
                for k in 0..m {
                    probs.push(if k == 0 { 1.0 - p } else { each });
                    unitaries.push(Unitary::Pauli(PauliString::from_index(*n, k)?));
                }
                Ok(ExplicitChannel::build(*n, probs, unitaries))
            }
            RandomUnitaryChannel::Composed { n, steps } => {
                let mut probs = vec![1.0];
                let mut unitaries = vec![Unitary::Circuit(CircuitSeq::new(*n))];
                for step in steps {
                    let e = step.enumerate_explicit(cap)?;
                    let mut next_p = Vec::with_capacity(probs.len() * e.len());
                    let mut next_u = Vec::with_capacity(probs.len() * e.len());
                    for (pa, ua) in probs.iter().zip(&unitaries) {
                        for (pb, ub) in e.terms() {
                            next_p.push(pa * pb);
                            next_u.push(ua.then(ub)?);
                        }
                    }
                    probs = next_p;
                    unitaries = next_u;
                }
                Ok(ExplicitChannel::build(*n, probs, unitaries))
            }
        }
    }
}
