//! Per-shot sampling estimator `Ê = (1/N) Σ_i ŝ_i Tr[O U_i ρ U_i†]`.
//!
//! Shot `k` draws its operator and its measurement outcome from the stream
//! `seeder.rng(k)`, so a report depends only on the seed, never on how many
//! threads ran it.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{DrawKey, RandomUnitaryChannel, Unitary, DEFAULT_ENUMERATION_CAP};
use crate::engine::{
    bell_phase_pairs_circuit, prepare_zero, Backend, CircuitSeq, EngineConfig, Observable,
    QuantumState, StateVector,
};
use crate::error::{Result, SimError};
use crate::oracles::{self, DensityMatrix};
use crate::pauli::{apply_to_basis, BitString, Pauli, PauliString};
use crate::rng::ShotSeeder;

#[derive(Debug, Clone, PartialEq)]
pub enum Prep {
    Zero,
    /// `(|00⟩ + e^{iπ/4}|11⟩)/√2` on every pair `(2i, 2i+1)`.
    BellPhasePairs,
    Circuit(CircuitSeq),
}

impl Prep {
    pub fn circuit(&self, n: usize) -> Result<CircuitSeq> {
        match self {
            Prep::Zero => Ok(CircuitSeq::new(n)),
            Prep::BellPhasePairs => bell_phase_pairs_circuit(n),
            Prep::Circuit(c) => {
                if c.n() != n {
                    return Err(SimError::dim(n, c.n()));
                }
                Ok(c.clone())
            }
        }
    }

    fn is_clifford(&self) -> bool {
        match self {
            Prep::Zero => true,
            Prep::BellPhasePairs => false,
            Prep::Circuit(c) => c.is_clifford(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One eigenvalue sample per shot.
    #[default]
    Shot,
    /// Exact `Tr[O U ρ U†]` per distinct sampled operator.
    ExactSubcircuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    /// Basis-state shortcut for `|0^n⟩` with Pauli draws, otherwise dense,
    /// stabilizer or two-qubit registers depending on size and gates.
    #[default]
    Auto,
    Fixed(Backend),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateConfig {
    pub mode: Mode,
    pub backend: BackendChoice,
    pub engine: EngineConfig,
    /// Independent classical flip probability for every measured bit.
    pub readout_flip: f64,
}

impl EstimateConfig {
    /// Factor `(1 − 2 p_flip)^w` that readout flips put on `⟨O⟩` for a Pauli
    /// of weight `w`.
    pub fn readout_damping(&self, observable: &PauliString) -> f64 {
        (1.0 - 2.0 * self.readout_flip).powi(observable.weight() as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedDraw {
    pub unitary: Unitary,
    pub key: DrawKey,
    pub count: u64,
}

/// Shots grouped by sampled operator, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotPlan {
    pub draws: Vec<PlannedDraw>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawSummary {
    pub operator: String,
    pub shots: u64,
    pub mean_outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: f64,
    pub n_shots: u64,
    /// Plug-in value of the per-shot variance law divided by `N`.
    pub predicted_variance: f64,
    /// Sample variance of the per-shot values divided by `N`.
    pub empirical_variance: f64,
    pub per_draw: Vec<DrawSummary>,
    pub seed: u64,
}

fn group<T>(items: Vec<(DrawKey, Unitary, T)>) -> Vec<(PlannedDraw, Vec<T>)> {
    let mut index: HashMap<DrawKey, usize> = HashMap::new();
    let mut out: Vec<(PlannedDraw, Vec<T>)> = Vec::new();
    for (key, unitary, v) in items {
        let slot = if key == DrawKey::Unique {
            None
        } else {
            index.get(&key).copied()
        };
        match slot {
            Some(i) => {
                out[i].0.count += 1;
                out[i].1.push(v);
            }
            None => {
                if key != DrawKey::Unique {
                    index.insert(key.clone(), out.len());
                }
                out.push((
                    PlannedDraw {
                        unitary,
                        key,
                        count: 1,
                    },
                    vec![v],
                ));
            }
        }
    }
    out
}

/// `N` independent draws from `channel`, grouped by operator identity.
pub fn allocate_shots(
    channel: &RandomUnitaryChannel,
    n_shots: u64,
    seeder: &ShotSeeder,
) -> Result<ShotPlan> {
    if n_shots == 0 {
        return Err(SimError::Argument("need at least one shot".into()));
    }
    let draws = (0..n_shots)
        .into_par_iter()
        .map(|k| {
            let d = channel.sample(&mut seeder.rng(k))?;
            Ok((d.key, d.unitary, ()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShotPlan {
        draws: group(draws).into_iter().map(|(d, _)| d).collect(),
        total: n_shots,
    })
}

fn draws_only_paulis(channel: &RandomUnitaryChannel) -> bool {
    match channel {
        RandomUnitaryChannel::Depolarizing { .. } => true,
        RandomUnitaryChannel::Explicit(e) => {
            e.unitaries().iter().all(|u| matches!(u, Unitary::Pauli(_)))
        }
        RandomUnitaryChannel::Composed { .. } => false,
    }
}

enum Runner {
    /// `|0^n⟩` with Pauli draws: track the basis state only.
    Basis,
    State(QuantumState),
}

fn choose_runner(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    config: &EstimateConfig,
) -> Result<Runner> {
    let n = channel.n();
    let backend = match config.backend {
        BackendChoice::Fixed(b) => b,
        BackendChoice::Auto => {
            if *prep == Prep::Zero && draws_only_paulis(channel) {
                return Ok(Runner::Basis);
            }
            if n <= config.engine.dense_cap {
                Backend::Dense
            } else if prep.is_clifford() && channel.is_clifford() {
                Backend::Stabilizer
            } else if *prep == Prep::BellPhasePairs && draws_only_paulis(channel) {
                Backend::Factored { block: 2 }
            } else {
                return Err(SimError::capacity(
                    "dense qubits",
                    config.engine.dense_cap,
                    n,
                ));
            }
        }
    };
    let mut state = prepare_zero(n, backend, &config.engine)?;
    state.apply_circuit(&prep.circuit(n)?)?;
    Ok(Runner::State(state))
}

fn basis_expectation(o: &PauliString, bits: &BitString) -> f64 {
    if !o.is_diagonal() {
        return 0.0;
    }
    let odd = (0..o.n()).filter(|&q| o.get(q) != Pauli::I && bits.0[q]).count() % 2;
    if odd == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Outcome of measuring Pauli `o` on `|bits⟩`.
fn basis_outcome<R: Rng + ?Sized>(o: &PauliString, bits: &BitString, rng: &mut R) -> i8 {
    if !o.is_diagonal() {
        return if rng.random::<bool>() { 1 } else { -1 };
    }
    basis_expectation(o, bits) as i8
}

fn summarize(groups: Vec<(PlannedDraw, Vec<f64>)>, n_shots: u64, predicted: f64, seed: u64) -> EstimateReport {
    let n = n_shots as f64;
    let values: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let mean = values.iter().sum::<f64>() / n;
    let empirical = if n_shots > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n
    } else {
        0.0
    };
    let per_draw = groups
        .into_iter()
        .map(|(d, v)| DrawSummary {
            operator: d.unitary.to_string(),
            shots: d.count,
            mean_outcome: v.iter().sum::<f64>() / v.len() as f64,
        })
        .collect();
    EstimateReport {
        mean,
        n_shots,
        predicted_variance: predicted.max(0.0),
        empirical_variance: empirical,
        per_draw,
        seed,
    }
}

/// Unbiased estimate of `⟨O⟩` on `E(ρ)` from `n_shots` shots.
pub fn estimate(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &PauliString,
    n_shots: u64,
    config: &EstimateConfig,
    seeder: &ShotSeeder,
) -> Result<EstimateReport> {
    let n = channel.n();
    if observable.n() != n {
        return Err(SimError::dim(n, observable.n()));
    }
    if n_shots == 0 {
        return Err(SimError::Argument("need at least one shot".into()));
    }
    if !(0.0..=1.0).contains(&config.readout_flip) {
        return Err(SimError::Argument(format!(
            "readout flip probability {} outside [0, 1]",
            config.readout_flip
        )));
    }
    let runner = choose_runner(channel, prep, config)?;
    let weight = observable.weight();
    let zeros = BitString::zeros(n);

    match config.mode {
        Mode::Shot => {
            let shots = (0..n_shots)
                .into_par_iter()
                .map(|k| {
                    let mut rng = seeder.rng(k);
                    let d = channel.sample(&mut rng)?;
                    let outcome = if observable.is_identity() {
                        1
                    } else {
                        match &runner {
                            Runner::Basis => {
                                let Unitary::Pauli(p) = &d.unitary else {
                                    unreachable!("basis runner only sees Pauli draws")
                                };
                                let (bits, _) = apply_to_basis(p, &zeros)?;
                                basis_outcome(observable, &bits, &mut rng)
                            }
                            Runner::State(base) => {
                                let mut s = base.clone();
                                d.unitary.apply(&mut s)?;
                                s.sample_pauli_eigenvalue(observable, &mut rng)?
                            }
                        }
                    };
                    let flips = if config.readout_flip > 0.0 {
                        (0..weight)
                            .filter(|_| rng.random_bool(config.readout_flip))
                            .count()
                    } else {
                        0
                    };
                    let outcome = if flips % 2 == 1 { -outcome } else { outcome };
                    Ok((d.key, d.unitary, outcome as f64))
                })
                .collect::<Result<Vec<_>>>()?;
            let groups = group(shots);
            let mean = groups.iter().flat_map(|(_, v)| v).sum::<f64>() / n_shots as f64;
            // ⟨O²⟩ = 1 for a Pauli string
            let predicted = (1.0 - mean * mean) / n_shots as f64;
            Ok(summarize(groups, n_shots, predicted, seeder.master()))
        }
        Mode::ExactSubcircuit => {
            let plan = allocate_shots(channel, n_shots, seeder)?;
            let values = plan
                .draws
                .par_iter()
                .map(|d| match &runner {
                    Runner::Basis => {
                        let Unitary::Pauli(p) = &d.unitary else {
                            unreachable!("basis runner only sees Pauli draws")
                        };
                        Ok(basis_expectation(observable, &apply_to_basis(p, &zeros)?.0))
                    }
                    Runner::State(base) => {
                        let mut s = base.clone();
                        d.unitary.apply(&mut s)?;
                        s.expectation_pauli(observable)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let damping = config.readout_damping(observable);
            let values: Vec<f64> = values.into_iter().map(|e| e * damping).collect();
            let nf = n_shots as f64;
            let mean: f64 = plan
                .draws
                .iter()
                .zip(&values)
                .map(|(d, e)| d.count as f64 / nf * e)
                .sum();
            let second: f64 = plan
                .draws
                .iter()
                .zip(&values)
                .map(|(d, e)| d.count as f64 / nf * e * e)
                .sum();
            let groups = plan
                .draws
                .into_iter()
                .zip(values)
                .map(|(d, e)| {
                    let c = d.count as usize;
                    (d, vec![e; c])
                })
                .collect();
            Ok(summarize(groups, n_shots, (second - mean * mean) / nf, seeder.master()))
        }
    }
}

/// `‖O|ψ⟩‖²` and `⟨ψ|O|ψ⟩` on the dense engine.
fn dense_moments(psi: &StateVector, o: &Observable) -> Result<(f64, f64)> {
    let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); psi.amplitudes().len()];
    for (coef, p) in o.terms() {
        let mut t = psi.clone();
        t.apply_pauli(p)?;
        for (a, b) in acc.iter_mut().zip(t.amplitudes()) {
            *a += b * coef;
        }
    }
    let first: f64 = psi
        .amplitudes()
        .iter()
        .zip(&acc)
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    let second: f64 = acc.iter().map(|a| a.norm_sqr()).sum();
    Ok((first, second))
}

/// `(p_i, ⟨O⟩_i, ⟨O²⟩_i)` for every branch `U_i|ψ⟩`, run on the dense engine.
fn branch_moments(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &Observable,
    n_shots: u64,
    engine: &EngineConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    let n = channel.n();
    if observable.n() != n {
        return Err(SimError::dim(n, observable.n()));
    }
    if n_shots == 0 {
        return Err(SimError::Argument("need at least one shot".into()));
    }
    let e = channel.enumerate_explicit(DEFAULT_ENUMERATION_CAP)?;
    let mut base = prepare_zero(n, Backend::Dense, engine)?;
    base.apply_circuit(&prep.circuit(n)?)?;
    e.terms()
        .map(|(p, u)| {
            let mut s = base.clone();
            u.apply(&mut s)?;
            let (m1, m2) = dense_moments(&s.to_statevector()?, observable)?;
            Ok((p, m1, m2))
        })
        .collect()
}

/// `Σ_i p_i Tr[O U_i ρ U_i†]` over every term of the channel.
pub fn exact_subcircuit_enumerated(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &Observable,
    engine: &EngineConfig,
) -> Result<f64> {
    let b = branch_moments(channel, prep, observable, 1, engine)?;
    Ok(b.iter().map(|(p, m1, _)| p * m1).sum())
}

/// `(1/N)(Σ_i p_i ⟨O²⟩_i − ⟨O⟩²)`, the variance of shot mode.
pub fn predicted_variance_hybrid(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &Observable,
    n_shots: u64,
    engine: &EngineConfig,
) -> Result<f64> {
    let b = branch_moments(channel, prep, observable, n_shots, engine)?;
    let mean: f64 = b.iter().map(|(p, m1, _)| p * m1).sum();
    let second: f64 = b.iter().map(|(p, _, m2)| p * m2).sum();
    Ok(((second - mean * mean) / n_shots as f64).max(0.0))
}

/// `(1/N)(Σ_i p_i ⟨O⟩_i² − ⟨O⟩²)`, the variance of exact-subcircuit mode,
/// where only the operator draw is random.
pub fn predicted_variance_exact_mode(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &Observable,
    n_shots: u64,
    engine: &EngineConfig,
) -> Result<f64> {
    let b = branch_moments(channel, prep, observable, n_shots, engine)?;
    let mean: f64 = b.iter().map(|(p, m1, _)| p * m1).sum();
    let second: f64 = b.iter().map(|(p, m1, _)| p * m1 * m1).sum();
    Ok(((second - mean * mean) / n_shots as f64).max(0.0))
}

/// `(1/N)(⟨O²⟩ − ⟨O⟩²)` on the mixed state `E(ρ)` from the density-matrix
/// oracle.
pub fn predicted_variance_stinespring(
    channel: &RandomUnitaryChannel,
    prep: &Prep,
    observable: &Observable,
    n_shots: u64,
) -> Result<f64> {
    let n = channel.n();
    if observable.n() != n {
        return Err(SimError::dim(n, observable.n()));
    }
    if n_shots == 0 {
        return Err(SimError::Argument("need at least one shot".into()));
    }
    let u = oracles::unitary_matrix(&Unitary::Circuit(prep.circuit(n)?))?;
    let rho = DensityMatrix::zero(n)?.conjugate(&u)?;
    let out = oracles::apply_channel_exact(&rho, channel, DEFAULT_ENUMERATION_CAP)?;
    let o = oracles::observable_matrix(observable)?;
    let mean = out.expectation_matrix(&o)?;
    let second = out.expectation_matrix(&(&o * &o))?;
    Ok(((second - mean * mean) / n_shots as f64).max(0.0))
}

/// Mean squared difference.
pub fn mse(measured: &[f64], analytic: &[f64]) -> Result<f64> {
    if measured.len() != analytic.len() {
        return Err(SimError::Argument(format!(
            "{} measured values for {} analytic values",
            measured.len(),
            analytic.len()
        )));
    }
    if measured.is_empty() {
        return Err(SimError::Argument("mse of empty vectors".into()));
    }
    Ok(measured
        .iter()
        .zip(analytic)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / measured.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn pauli_channel(terms: &[(f64, &str)]) -> RandomUnitaryChannel {
        RandomUnitaryChannel::explicit(
            terms.iter().map(|t| t.0).collect(),
            terms.iter().map(|t| Unitary::Pauli(ps(t.1))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_plan() {
        let plan = allocate_shots(&pauli_channel(&[(1.0, "I")]), 100, &ShotSeeder::new(1, "t")).unwrap();
        assert_eq!(plan.draws.len(), 1);
        assert_eq!(plan.draws[0].count, 100);
        assert_eq!(plan.draws[0].unitary.to_string(), "I");
    }

    #[test]
    fn identity_channel_is_exact_in_both_modes() {
        let ch = RandomUnitaryChannel::identity(1);
        for mode in [Mode::Shot, Mode::ExactSubcircuit] {
            for backend in [
                BackendChoice::Auto,
                BackendChoice::Fixed(Backend::Dense),
                BackendChoice::Fixed(Backend::Stabilizer),
            ] {
                let cfg = EstimateConfig {
                    mode,
                    backend,
                    ..Default::default()
                };
                let r = estimate(&ch, &Prep::Zero, &ps("Z"), 37, &cfg, &ShotSeeder::new(3, "id")).unwrap();
                assert_eq!(r.mean, 1.0);
                assert_eq!(r.predicted_variance, 0.0);
            }
        }
    }

    #[test]
    fn variance_formulas_agree_on_small_examples() {
        let ch = pauli_channel(&[(0.5, "I"), (0.5, "X")]);
        let z = Observable::from(ps("Z"));
        let cfg = EngineConfig::default();
        let h = predicted_variance_hybrid(&ch, &Prep::Zero, &z, 10, &cfg).unwrap();
        let s = predicted_variance_stinespring(&ch, &Prep::Zero, &z, 10).unwrap();
        assert!((h - 0.1).abs() < 1e-15);
        assert!((s - 0.1).abs() < 1e-15);
        let id = RandomUnitaryChannel::identity(1);
        assert_eq!(predicted_variance_hybrid(&id, &Prep::Zero, &z, 10, &cfg).unwrap(), 0.0);

        let p = 0.3;
        let l = 4.0 / 3.0 * p;
        let dep = RandomUnitaryChannel::depolarizing(1, p).unwrap();
        let s = predicted_variance_stinespring(&dep, &Prep::Zero, &z, 1).unwrap();
        assert!((s - (1.0 - (1.0 - l) * (1.0 - l))).abs() < 1e-12);
    }

    #[test]
    fn stinespring_zero_on_eigenstate() {
        let ch = RandomUnitaryChannel::identity(2);
        let o = Observable::from(ps("ZZ"));
        assert!(predicted_variance_stinespring(&ch, &Prep::Zero, &o, 5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        let a = vec![0.5; 27];
        let b: Vec<f64> = a.iter().map(|v| v + 0.1).collect();
        assert!((mse(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        assert!(mse(&[1.0], &[]).is_err());
    }

    #[test]
    fn report_does_not_depend_on_threads() {
        let ch = RandomUnitaryChannel::depolarizing(3, 0.4).unwrap();
        let cfg = EstimateConfig {
            backend: BackendChoice::Fixed(Backend::Dense),
            ..Default::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(&ch, &Prep::Zero, &ps("ZXI"), 500, &cfg, &ShotSeeder::new(9, "det")))
                .unwrap()
        };
        assert_eq!(run(1), run(4));
    }
}
