use mixsim::engine::{
    prepare_zero, Backend, CircuitSeq, EngineConfig, FactoredState, Gate, QuantumState, StateVector,
};
use mixsim::pauli::{Pauli, PauliString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_clifford(n: usize, len: usize, rng: &mut ChaCha8Rng) -> CircuitSeq {
    let mut c = CircuitSeq::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let g = match rng.random_range(0..6) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::X(q),
            3 => Gate::Y(q),
            4 => Gate::Z(q),
            _ if n > 1 => {
                let mut t = rng.random_range(0..n - 1);
                if t >= q {
                    t += 1;
                }
                Gate::CX { control: q, target: t }
            }
            _ => Gate::H(q),
        };
        c.push(g).unwrap();
    }
    c
}

fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let ps: Vec<Pauli> = (0..n)
        .map(|_| Pauli::from_code(rng.random_range(0..4)).unwrap())
        .collect();
    PauliString::from_paulis(&ps)
}

fn run(n: usize, backend: Backend, c: &CircuitSeq) -> QuantumState {
    let mut s = prepare_zero(n, backend, &EngineConfig::default()).unwrap();
    s.apply_circuit(c).unwrap();
    s
}

#[test]
fn stabilizer_matches_dense_on_clifford_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=10 {
        for _ in 0..20 {
            let c = random_clifford(n, 6 * n, &mut rng);
            let tab = run(n, Backend::Stabilizer, &c);
            let dense = run(n, Backend::Dense, &c);
            let probes: Vec<PauliString> = if n <= 4 {
                (0..1u64 << (2 * n)).map(|k| PauliString::from_index(n, k).unwrap()).collect()
            } else {
                (0..200).map(|_| random_pauli(n, &mut rng)).collect()
            };
            for p in &probes {
                let a = tab.expectation_pauli(p).unwrap();
                let b = dense.expectation_pauli(p).unwrap();
                assert!(a == 0.0 || a == 1.0 || a == -1.0, "tableau value {a}");
                assert!((a - b).abs() < 1e-10, "n={n} {p}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn stabilizer_stays_consistent_and_samples_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=8 {
        let c = random_clifford(n, 40, &mut rng);
        let QuantumState::Stabilizer(t) = run(n, Backend::Stabilizer, &c) else {
            unreachable!()
        };
        assert!(t.is_consistent());
        let probs = match run(n, Backend::Dense, &c) {
            QuantumState::Dense(psi) => psi.probabilities(),
            _ => unreachable!(),
        };
        for _ in 0..50 {
            let mut s = t.clone();
            let bits = s.sample_bitstring(&mut rng);
            assert!(probs[bits.to_index() as usize] > 1e-9);
        }
    }
}

fn random_blocked(n: usize, block: usize, len: usize, rng: &mut ChaCha8Rng) -> CircuitSeq {
    let mut c = CircuitSeq::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let start = q / block * block;
        let end = (start + block).min(n);
        let theta = rng.random_range(-3.0..3.0);
        let g = match rng.random_range(0..7) {
            0 => Gate::H(q),
            1 => Gate::T(q),
            2 => Gate::RX { qubit: q, theta },
            3 => Gate::RY { qubit: q, theta },
            4 => Gate::RZ { qubit: q, theta },
            _ if end - start > 1 => {
                let mut t = rng.random_range(start..end - 1);
                if t >= q {
                    t += 1;
                }
                if rng.random_bool(0.5) {
                    Gate::CX { control: q, target: t }
                } else {
                    Gate::RZZ { a: q, b: t, theta }
                }
            }
            _ => Gate::S(q),
        };
        c.push(g).unwrap();
    }
    c
}

#[test]
fn factored_matches_dense_on_partition_respecting_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=10 {
        for block in [1, 2, 3] {
            let c = random_blocked(n, block, 8 * n, &mut rng);
            let f = run(n, Backend::Factored { block }, &c);
            let QuantumState::Factored(fs) = &f else { unreachable!() };
            assert_eq!(fs.registers().len(), n.div_ceil(block));
            let dense = run(n, Backend::Dense, &c);
            let a = fs.to_dense().unwrap();
            let b = dense.to_statevector().unwrap();
            let err: f64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "n={n} block={block}: amplitude error {err}");
            for _ in 0..30 {
                let p = random_pauli(n, &mut rng);
                let x = f.expectation_pauli(&p).unwrap();
                let y = dense.expectation_pauli(&p).unwrap();
                assert!((x - y).abs() < 1e-10, "n={n} {p}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn factored_merges_registers_when_gates_cross() {
    let mut f = FactoredState::zero(4, 2, 20).unwrap();
    f.apply_gate(&Gate::H(1)).unwrap();
    f.apply_gate(&Gate::CX { control: 1, target: 2 }).unwrap();
    assert_eq!(f.registers().len(), 1);
    assert_eq!(f.registers()[0].qubits.len(), 4);
    let mut d = StateVector::zero(4);
    d.apply_gate(&Gate::H(1));
    d.apply_gate(&Gate::CX { control: 1, target: 2 });
    let zz = PauliString::from_paulis(&[Pauli::I, Pauli::Z, Pauli::Z, Pauli::I]);
    assert!((f.expectation_pauli(&zz).unwrap() - 1.0).abs() < 1e-12);
    assert!((d.expectation_pauli(&zz).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn stabilizer_rejects_non_clifford_gates() {
    let mut s = prepare_zero(2, Backend::Stabilizer, &EngineConfig::default()).unwrap();
    assert!(s.apply_gate(&Gate::T(0)).is_err());
    assert!(s
        .apply_gate(&Gate::RY { qubit: 1, theta: 0.3 })
        .is_err());
}
