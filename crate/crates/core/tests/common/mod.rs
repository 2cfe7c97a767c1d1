#![allow(dead_code)]

use mixsim::channels::{RandomUnitaryChannel, Unitary};
use mixsim::engine::{CMatrix, CircuitSeq, Gate};
use mixsim::pauli::PauliString;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-ish unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_dense(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let d = 1 << n;
    let m = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    m.qr().q()
}

pub fn random_circuit(n: usize, len: usize, rng: &mut ChaCha8Rng) -> CircuitSeq {
    let mut c = CircuitSeq::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let theta = rng.random_range(-3.0..3.0);
        let g = match rng.random_range(0..8) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::T(q),
            3 => Gate::RX { qubit: q, theta },
            4 => Gate::RY { qubit: q, theta },
            5 => Gate::RZ { qubit: q, theta },
            _ if n > 1 => {
                let mut t = rng.random_range(0..n - 1);
                if t >= q {
                    t += 1;
                }
                if rng.random_bool(0.5) {
                    Gate::CX { control: q, target: t }
                } else {
                    Gate::RZZ { a: q, b: t, theta }
                }
            }
            _ => Gate::Y(q),
        };
        c.push(g).unwrap();
    }
    c
}

pub fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    PauliString::from_index(n, rng.random_range(0..1u64 << (2 * n))).unwrap()
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Unitary {
    match rng.random_range(0..3) {
        0 => Unitary::Pauli(random_pauli(n, rng)),
        1 => Unitary::Circuit(random_circuit(n, 3 * n + 2, rng)),
        _ => Unitary::Dense(random_dense(n, rng)),
    }
}

/// Explicit channel with `m` random terms on `n` qubits.
pub fn random_channel(n: usize, m: usize, rng: &mut ChaCha8Rng) -> RandomUnitaryChannel {
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let us = (0..m).map(|_| random_unitary(n, rng)).collect();
    RandomUnitaryChannel::explicit(probs, us).unwrap()
}

/// Random state preparation circuit.
pub fn random_prep(n: usize, rng: &mut ChaCha8Rng) -> CircuitSeq {
    random_circuit(n, 2 * n + 1, rng)
}
