use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::pauli::PauliString;

/// Tolerance for unitarity checks on user-supplied matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest dense gate accepted, in qubits.
pub const MAX_DENSE_GATE_QUBITS: usize = 3;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    T(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CX { control: usize, target: usize },
    RX { qubit: usize, theta: f64 },
    RY { qubit: usize, theta: f64 },
    RZ { qubit: usize, theta: f64 },
    /// `exp(-i θ/2 Z⊗Z)`.
    RZZ { a: usize, b: usize, theta: f64 },
    /// Arbitrary unitary; matrix index bit `j` corresponds to `targets[j]`.
    Dense { targets: Vec<usize>, matrix: CMatrix },
    /// Uniformly controlled RY: `angles[k]` is used when the controls read
    /// `k` (bit `j` of `k` is `controls[j]`).
    MultiplexedRy {
        controls: Vec<usize>,
        target: usize,
        angles: Vec<f64>,
    },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::T(_) => "T",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::CX { .. } => "CX",
            Gate::RX { .. } => "RX",
            Gate::RY { .. } => "RY",
            Gate::RZ { .. } => "RZ",
            Gate::RZZ { .. } => "RZZ",
            Gate::Dense { .. } => "DENSE",
            Gate::MultiplexedRy { .. } => "MULTIPLEXED_RY",
        }
    }

    /// All qubits the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::T(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                vec![*q]
            }
            Gate::RX { qubit, .. } | Gate::RY { qubit, .. } | Gate::RZ { qubit, .. } => {
                vec![*qubit]
            }
            Gate::CX { control, target } => vec![*control, *target],
            Gate::RZZ { a, b, .. } => vec![*a, *b],
            Gate::Dense { targets, .. } => targets.clone(),
            Gate::MultiplexedRy {
                controls, target, ..
            } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
        }
    }

    /// Member of the tableau-simulable set {H, S, X, Y, Z, CX}.
    pub fn is_clifford(&self) -> bool {
        matches!(
            self,
            Gate::H(_) | Gate::S(_) | Gate::X(_) | Gate::Y(_) | Gate::Z(_) | Gate::CX { .. }
        )
    }

    /// Relabel every qubit index through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(*q)),
            Gate::S(q) => Gate::S(f(*q)),
            Gate::T(q) => Gate::T(f(*q)),
            Gate::X(q) => Gate::X(f(*q)),
            Gate::Y(q) => Gate::Y(f(*q)),
            Gate::Z(q) => Gate::Z(f(*q)),
            Gate::CX { control, target } => Gate::CX {
                control: f(*control),
                target: f(*target),
            },
            Gate::RX { qubit, theta } => Gate::RX {
                qubit: f(*qubit),
                theta: *theta,
            },
            Gate::RY { qubit, theta } => Gate::RY {
                qubit: f(*qubit),
                theta: *theta,
            },
            Gate::RZ { qubit, theta } => Gate::RZ {
                qubit: f(*qubit),
                theta: *theta,
            },
            Gate::RZZ { a, b, theta } => Gate::RZZ {
                a: f(*a),
                b: f(*b),
                theta: *theta,
            },
            Gate::Dense { targets, matrix } => Gate::Dense {
                targets: targets.iter().map(|&q| f(q)).collect(),
                matrix: matrix.clone(),
            },
            Gate::MultiplexedRy {
                controls,
                target,
                angles,
            } => Gate::MultiplexedRy {
                controls: controls.iter().map(|&q| f(q)).collect(),
                target: f(*target),
                angles: angles.clone(),
            },
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n {
                return Err(SimError::Validation(format!(
                    "{} targets qubit {q} but the circuit has {n} qubits",
                    self.name()
                )));
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::Validation(format!(
                    "{} repeats qubit {q}",
                    self.name()
                )));
            }
        }
        match self {
            Gate::Dense { targets, matrix } => {
                let k = targets.len();
                if k == 0 || k > MAX_DENSE_GATE_QUBITS {
                    return Err(SimError::Validation(format!(
                        "dense gate acts on {k} qubits; 1..={MAX_DENSE_GATE_QUBITS} allowed"
                    )));
                }
                let dim = 1 << k;
                if matrix.nrows() != dim || matrix.ncols() != dim {
                    return Err(SimError::Validation(format!(
                        "dense gate on {k} qubits needs a {dim}x{dim} matrix, got {}x{}",
                        matrix.nrows(),
                        matrix.ncols()
                    )));
                }
                if !is_unitary(matrix, UNITARY_TOL) {
                    return Err(SimError::Validation("dense gate matrix is not unitary".into()));
                }
            }
            Gate::MultiplexedRy {
                controls, angles, ..
            } => {
                if angles.len() != 1 << controls.len() {
                    return Err(SimError::Validation(format!(
                        "multiplexed RY with {} controls needs {} angles, got {}",
                        controls.len(),
                        1usize << controls.len(),
                        angles.len()
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Matrix for fixed-arity gates, ordered like [`Gate::qubits`].
    pub fn matrix(&self) -> CMatrix {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match self {
            Gate::H(_) => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            Gate::S(_) => CMatrix::from_row_slice(2, 2, &[one, z, z, c(0.0, 1.0)]),
            Gate::T(_) => CMatrix::from_row_slice(
                2,
                2,
                &[one, z, z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            ),
            Gate::X(_) => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            Gate::Y(_) => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            Gate::Z(_) => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
            Gate::CX { .. } => {
                // bit 0 = control, bit 1 = target
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = one;
                m[(2, 2)] = one;
                m[(3, 1)] = one;
                m[(1, 3)] = one;
                m
            }
            Gate::RX { theta, .. } => {
                let (s, co) = (theta / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
            }
            Gate::RY { theta, .. } => ry_matrix(*theta),
            Gate::RZ { theta, .. } => {
                let ph = Complex64::from_polar(1.0, -theta / 2.0);
                CMatrix::from_row_slice(2, 2, &[ph, z, z, ph.conj()])
            }
            Gate::RZZ { theta, .. } => {
                let ph = Complex64::from_polar(1.0, -theta / 2.0);
                CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    ph,
                    ph.conj(),
                    ph.conj(),
                    ph,
                ]))
            }
            Gate::Dense { matrix, .. } => matrix.clone(),
            Gate::MultiplexedRy {
                controls, angles, ..
            } => {
                // Block-diagonal over control patterns; the target is the
                // last qubit, i.e. the most significant index bit.
                let k = controls.len();
                let dim = 1 << (k + 1);
                let mut m = CMatrix::zeros(dim, dim);
                for (pattern, &theta) in angles.iter().enumerate() {
                    let r = ry_matrix(theta);
                    for a in 0..2 {
                        for b in 0..2 {
                            m[(pattern | (a << k), pattern | (b << k))] = r[(a, b)];
                        }
                    }
                }
                m
            }
        }
    }
}

pub(crate) fn ry_matrix(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let prod = m.adjoint() * m;
    let id = CMatrix::identity(m.nrows(), m.ncols());
    (prod - id).iter().all(|e| e.norm() <= tol)
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name(), self.qubits())
    }
}

/// Ordered gate list over `n` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitSeq {
    n: usize,
    gates: Vec<Gate>,
}

impl CircuitSeq {
    pub fn new(n: usize) -> CircuitSeq {
        CircuitSeq {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<CircuitSeq> {
        let mut c = CircuitSeq::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    /// Append `other`, which must act on the same register.
    pub fn extend(&mut self, other: &CircuitSeq) -> Result<()> {
        if other.n != self.n {
            return Err(SimError::dim(self.n, other.n));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Copy of this circuit relocated onto qubits `offset..offset+n` of a
    /// `n_total`-qubit register.
    pub fn shifted(&self, offset: usize, n_total: usize) -> Result<CircuitSeq> {
        if offset + self.n > n_total {
            return Err(SimError::dim(n_total, offset + self.n));
        }
        Ok(CircuitSeq {
            n: n_total,
            gates: self.gates.iter().map(|g| g.remap(|q| q + offset)).collect(),
        })
    }

    /// Gates realizing a Pauli string exactly (including its phase).
    pub fn from_pauli(p: &PauliString) -> CircuitSeq {
        use crate::pauli::Pauli;
        let gates = p
            .iter()
            .enumerate()
            .filter_map(|(q, pl)| match pl {
                Pauli::I => None,
                Pauli::X => Some(Gate::X(q)),
                Pauli::Y => Some(Gate::Y(q)),
                Pauli::Z => Some(Gate::Z(q)),
            })
            .collect();
        CircuitSeq { n: p.n(), gates }
    }
}

/// Real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Observable> {
        let first = terms
            .first()
            .ok_or_else(|| SimError::Argument("observable needs at least one term".into()))?;
        let n = first.1.n();
        for (coef, p) in &terms {
            if p.n() != n {
                return Err(SimError::dim(n, p.n()));
            }
            if !coef.is_finite() {
                return Err(SimError::Argument("non-finite observable coefficient".into()));
            }
        }
        Ok(Observable { terms })
    }

    pub fn n(&self) -> usize {
        self.terms[0].1.n()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// The Pauli string when this is a single unit-weight term.
    pub fn as_single_pauli(&self) -> Option<&PauliString> {
        match self.terms.as_slice() {
            [(coef, p)] if *coef == 1.0 => Some(p),
            _ => None,
        }
    }

    /// Sum of `|coefficient|`, an upper bound on `|⟨O⟩|`.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// `Tr[O] / 2^n`, the weight on the identity string.
    pub fn identity_weight(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| p.is_identity())
            .map(|(c, _)| c)
            .sum()
    }
}

impl From<PauliString> for Observable {
    fn from(p: PauliString) -> Observable {
        Observable {
            terms: vec![(1.0, p)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_gates_are_unitary() {
        let gates = [
            Gate::H(0),
            Gate::S(0),
            Gate::T(0),
            Gate::X(0),
            Gate::Y(0),
            Gate::Z(0),
            Gate::CX {
                control: 0,
                target: 1,
            },
            Gate::RX {
                qubit: 0,
                theta: 0.3,
            },
            Gate::RY {
                qubit: 0,
                theta: -1.1,
            },
            Gate::RZ {
                qubit: 0,
                theta: 2.0,
            },
            Gate::RZZ {
                a: 0,
                b: 1,
                theta: 0.7,
            },
            Gate::MultiplexedRy {
                controls: vec![1, 2],
                target: 0,
                angles: vec![0.1, 0.2, 0.3, 0.4],
            },
        ];
        for g in gates {
            assert!(is_unitary(&g.matrix(), 1e-12), "{g}");
        }
    }

    #[test]
    fn validation_catches_bad_gates() {
        assert!(Gate::CX {
            control: 1,
            target: 1
        }
        .validate(2)
        .is_err());
        assert!(Gate::H(3).validate(3).is_err());
        let nonunitary = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(Gate::Dense {
            targets: vec![0],
            matrix: nonunitary
        }
        .validate(1)
        .is_err());
        assert!(Gate::MultiplexedRy {
            controls: vec![1],
            target: 0,
            angles: vec![0.0]
        }
        .validate(2)
        .is_err());
    }

    #[test]
    fn shifted_circuit_relabels() {
        let c = CircuitSeq::from_gates(
            2,
            vec![Gate::CX {
                control: 0,
                target: 1,
            }],
        )
        .unwrap();
        let s = c.shifted(3, 5).unwrap();
        assert_eq!(
            s.gates()[0],
            Gate::CX {
                control: 3,
                target: 4
            }
        );
        assert!(c.shifted(4, 5).is_err());
    }

    #[test]
    fn observable_requires_matching_terms() {
        let a: PauliString = "XI".parse().unwrap();
        let b: PauliString = "Z".parse().unwrap();
        assert!(Observable::new(vec![(1.0, a), (0.5, b)]).is_err());
        assert!(Observable::new(vec![]).is_err());
    }
}
