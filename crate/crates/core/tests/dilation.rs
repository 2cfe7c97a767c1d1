mod common;

use mixsim::ancilla::{
    ancilla_count, build_dilated, build_state_prep, dilated_state, resource_estimate,
    run_dilated_expectation, MAX_BRANCHES,
};
use mixsim::channels::{RandomUnitaryChannel, Unitary, DEFAULT_ENUMERATION_CAP};
use mixsim::engine::{CircuitSeq, EngineConfig, Observable, StateVector};
use mixsim::oracles::{apply_channel_exact, unitary_matrix, DensityMatrix};
use rand::Rng;

#[test]
fn dilation_reproduces_channel_output() {
    let mut rng = common::rng(31);
    let engine = EngineConfig::default();
    let mut cases: Vec<RandomUnitaryChannel> = (1..=3)
        .map(|n| RandomUnitaryChannel::depolarizing(n, 0.5).unwrap())
        .collect();
    for m in [1, 2, 3, 5, 8, 17, 33, 64] {
        for n in 1..=3 {
            cases.push(common::random_channel(n, m, &mut rng));
        }
    }
    for ch in &cases {
        let n = ch.n();
        let d = build_dilated(ch, n).unwrap();
        assert!(d.multiplexer.len() <= MAX_BRANCHES);
        let prep = common::random_prep(n, &mut rng);
        let u = unitary_matrix(&Unitary::Circuit(prep.clone())).unwrap();
        let rho = DensityMatrix::zero(n).unwrap().conjugate(&u).unwrap();
        let out = apply_channel_exact(&rho, ch, DEFAULT_ENUMERATION_CAP).unwrap();
        for _ in 0..4 {
            let o = Observable::from(common::random_pauli(n, &mut rng));
            let a = run_dilated_expectation(&d, &prep, &o, &engine).unwrap();
            let b = out.expectation(&o).unwrap();
            assert!((a - b).abs() < 1e-9, "n={n} m={}: {a} vs {b}", d.multiplexer.len());
        }
        let psi = dilated_state(&d, &prep, &engine).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn state_prep_encodes_amplitudes() {
    let mut rng = common::rng(2);
    for m in 1..=64usize {
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let c = build_state_prep(&probs).unwrap();
        let k = ancilla_count(m as u64);
        assert_eq!(c.n(), k);
        let mut psi = StateVector::zero(k);
        for g in c.gates() {
            psi.apply_gate(g);
        }
        let got = psi.probabilities();
        for i in 0..1 << k {
            let want = probs.get(i).copied().unwrap_or(0.0);
            assert!((got[i] - want).abs() < 1e-10, "m={m} i={i}");
        }
        for a in psi.amplitudes() {
            assert!(a.re >= -1e-12 && a.im.abs() < 1e-12);
        }
    }
}

#[test]
fn resource_counts() {
    for n in 1..=10usize {
        for m in [1u64, 2, 3, 4, 5, 16, 17, 64, 256, 1 << 20] {
            let r = resource_estimate(n, m).unwrap();
            let log = (m as f64).log2().ceil() as u64;
            assert_eq!(r.qubits, n as u64 + log);
            assert_eq!(r.depth_lower_bound, m);
            assert_eq!(r.circuits, 1);
            assert_eq!(r.controlled_op_count, m);
        }
    }
    assert!(resource_estimate(1, 0).is_err());
}

#[test]
fn single_term_needs_no_ancilla() {
    let ch = RandomUnitaryChannel::identity(2);
    let d = build_dilated(&ch, 2).unwrap();
    assert_eq!(d.n_ancilla, 0);
    let o = Observable::from("ZZ".parse::<mixsim::pauli::PauliString>().unwrap());
    let v = run_dilated_expectation(&d, &CircuitSeq::new(2), &o, &EngineConfig::default()).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
}
