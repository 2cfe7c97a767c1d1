use mixsim::channels::{parse_channel_spec, to_channel_spec, RandomUnitaryChannel, Unitary};
use mixsim::engine::{CircuitSeq, Gate, StateVector};
use mixsim::oracles::pauli_matrix;
use mixsim::pauli::{apply_to_basis, BitString, Pauli, PauliString};
use num_complex::Complex64;
use proptest::prelude::*;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n)
        .prop_map(|codes| PauliString::from_paulis(&codes.iter().map(|&c| Pauli::from_code(c).unwrap()).collect::<Vec<_>>()))
}

fn triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
    (1usize..70).prop_flat_map(|n| (pauli_string(n), pauli_string(n), pauli_string(n)))
}

fn pair_small() -> impl Strategy<Value = (PauliString, PauliString)> {
    (1usize..5).prop_flat_map(|n| (pauli_string(n), pauli_string(n)))
}

proptest! {
    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let ab = a.mul(&b).unwrap();
        let left = ab.pauli.mul(&c).unwrap();
        let bc = b.mul(&c).unwrap();
        let right = a.mul(&bc.pauli).unwrap();
        prop_assert_eq!(&left.pauli, &right.pauli);
        let lp = (ab.phase.exponent() + left.phase.exponent()) % 4;
        let rp = (bc.phase.exponent() + right.phase.exponent()) % 4;
        prop_assert_eq!(lp, rp);
    }

    #[test]
    fn product_matches_matrices((a, b) in pair_small()) {
        let ab = a.mul(&b).unwrap();
        let lhs = pauli_matrix(&a).unwrap() * pauli_matrix(&b).unwrap();
        let rhs = pauli_matrix(&ab.pauli).unwrap() * ab.phase.to_complex();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn commutation_matches_product_phases((a, b, _) in triple()) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert_eq!(&ab.pauli, &ba.pauli);
        let same = ab.phase == ba.phase;
        prop_assert_eq!(a.commutes_with(&b).unwrap(), same);
    }

    #[test]
    fn self_product_is_identity((a, _, _) in triple()) {
        let aa = a.mul(&a).unwrap();
        prop_assert!(aa.pauli.is_identity());
        prop_assert_eq!(aa.phase.exponent(), 0);
    }

    #[test]
    fn text_round_trip((a, _, _) in triple()) {
        let back: PauliString = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn index_round_trip(n in 1usize..=31, seed in any::<u64>()) {
        let k = seed % (1u64 << (2 * n));
        let p = PauliString::from_index(n, k).unwrap();
        prop_assert_eq!(p.to_index().unwrap(), k);
    }

    #[test]
    fn basis_action_matches_matrix((p, _) in pair_small(), bits in any::<u64>()) {
        let n = p.n();
        let b = BitString::from_index(n, bits % (1 << n));
        let (out, phase) = apply_to_basis(&p, &b).unwrap();
        let m = pauli_matrix(&p).unwrap();
        let col = b.to_index() as usize;
        let row = out.to_index() as usize;
        prop_assert!((m[(row, col)] - phase.to_complex()).norm() < 1e-12);
        let rest: f64 = (0..1 << n).filter(|&r| r != row).map(|r| m[(r, col)].norm()).sum();
        prop_assert!(rest < 1e-12);
    }

    #[test]
    fn statevector_pauli_matches_matrix((p, _) in pair_small(), amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
        let n = p.n();
        let v: Vec<Complex64> = amps.iter().take(1 << n).map(|&(re, im)| Complex64::new(re, im)).collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let v: Vec<Complex64> = v.into_iter().map(|a| a / norm).collect();
        let mut psi = StateVector::from_amplitudes(v.clone()).unwrap();
        psi.apply_pauli(&p).unwrap();
        let expect = pauli_matrix(&p).unwrap() * nalgebra::DVector::from_vec(v);
        let err: f64 = psi.amplitudes().iter().zip(expect.iter()).map(|(a, b)| (a - b).norm()).sum();
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn channel_spec_round_trip(
        n in 1usize..=3,
        weights in prop::collection::vec(0.01f64..1.0, 1..6),
        codes in prop::collection::vec(any::<u64>(), 6),
        theta in -3.0f64..3.0,
    ) {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let unitaries: Vec<Unitary> = probs
            .iter()
            .enumerate()
            .map(|(i, _)| {
                if i % 2 == 0 {
                    Unitary::Pauli(PauliString::from_index(n, codes[i] % (1 << (2 * n))).unwrap())
                } else {
                    let mut c = CircuitSeq::new(n);
                    c.push(Gate::H(0)).unwrap();
                    c.push(Gate::RY { qubit: n - 1, theta }).unwrap();
                    Unitary::Circuit(c)
                }
            })
            .collect();
        let ch = RandomUnitaryChannel::explicit(probs, unitaries).unwrap();
        let text = to_channel_spec(&ch, 64).unwrap();
        let back = parse_channel_spec(&text).unwrap();
        let a = ch.enumerate_explicit(64).unwrap();
        let b = back.enumerate_explicit(64).unwrap();
        prop_assert_eq!(a.unitaries(), b.unitaries());
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_parser_never_panics(s in "\\PC{0,40}") {
        let _ = s.parse::<PauliString>();
    }

    #[test]
    fn channel_file_parser_never_panics(s in "\\PC{0,80}") {
        let _ = parse_channel_spec(&s);
    }
}
