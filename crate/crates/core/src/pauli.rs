//! Exact algebra of n-qubit Pauli strings.
//!
//! A string is stored as two bit-packed masks, `x` and `z`, with the usual
//! symplectic encoding `I = (0,0)`, `X = (1,0)`, `Y = (1,1)`, `Z = (0,1)`.
//! Note that `(1,1)` denotes the Hermitian `Y`, not `XZ`; the product rule in
//! [`PauliString::mul`] accounts for that. Phases are kept as a power of `i`
//! so products never accumulate floating-point error.
//!
//! Textual form is one character per qubit, leftmost character = qubit 0
//! (`"XIZY"` is X on qubit 0, Y on qubit 3).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SimError};

/// Largest qubit count for which `4^n - 1` fits in a `u64` index.
pub const MAX_INDEXED_QUBITS: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Base-4 digit: I=0, X=1, Y=2, Z=3.
    pub fn code(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Pauli> {
        match code {
            0 => Some(Pauli::I),
            1 => Some(Pauli::X),
            2 => Some(Pauli::Y),
            3 => Some(Pauli::Z),
            _ => None,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A fourth root of unity, stored as the exponent `k` in `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Phase exponent (mod 4) of the product `P(x1,z1) * P(x2,z2)` summed over
/// all qubits of one 64-bit word.
#[inline]
pub(crate) fn product_phase_word(x1: u64, z1: u64, x2: u64, z2: u64) -> i64 {
    // +i cases: XY, YZ, ZX;  -i cases: XZ, YX, ZY.
    let a_x = x1 & !z1;
    let a_y = x1 & z1;
    let a_z = !x1 & z1;
    let b_x = x2 & !z2;
    let b_y = x2 & z2;
    let b_z = !x2 & z2;
    let pos = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
    let neg = (a_x & b_z) | (a_y & b_x) | (a_z & b_y);
    pos.count_ones() as i64 - neg.count_ones() as i64
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub pauli: PauliString,
}

impl PauliString {
    /// The all-identity string on `n` qubits.
    pub fn identity(n: usize) -> PauliString {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    pub fn from_paulis(paulis: &[Pauli]) -> PauliString {
        let mut p = PauliString::identity(paulis.len());
        for (j, &q) in paulis.iter().enumerate() {
            p.set(j, q);
        }
        p
    }

    /// A string with `pauli` on `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> PauliString {
        let mut p = PauliString::identity(n);
        p.set(qubit, pauli);
        p
    }

    pub(crate) fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>) -> PauliString {
        debug_assert_eq!(x.len(), words_for(n));
        PauliString { n, x, z }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (w, b) = (qubit / 64, qubit % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (w, b) = (qubit / 64, qubit % 64);
        let (xb, zb) = pauli.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn iter(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(|j| self.get(j))
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// True when the string contains only I and Z.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// `(x, z)` masks as single words; callers guarantee `n <= 64`.
    pub(crate) fn masks(&self) -> (u64, u64) {
        debug_assert!(self.n <= 64);
        (self.x[0], self.z[0])
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones() as usize)
            .sum()
    }

    fn check_same_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(SimError::dim(self.n, other.n));
        }
        Ok(())
    }

    /// Exact product `self · other` with its global phase.
    pub fn mul(&self, other: &PauliString) -> Result<PhasedPauli> {
        self.check_same_n(other)?;
        let mut k = 0i64;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            k += product_phase_word(self.x[w], self.z[w], other.x[w], other.z[w]);
            x.push(self.x[w] ^ other.x[w]);
            z.push(self.z[w] ^ other.z[w]);
        }
        Ok(PhasedPauli {
            phase: Phase::from_exponent(k),
            pauli: PauliString { n: self.n, x, z },
        })
    }

    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        self.check_same_n(other)?;
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        Ok(parity == 0)
    }

    /// Decode the little-endian base-4 index `k` (digit j selects qubit j).
    pub fn from_index(n: usize, mut k: u64) -> Result<PauliString> {
        if n == 0 || n > MAX_INDEXED_QUBITS {
            return Err(SimError::capacity("indexed Pauli qubits", MAX_INDEXED_QUBITS, n));
        }
        if k >= 1u64 << (2 * n) {
            return Err(SimError::Argument(format!(
                "Pauli index {k} out of range for {n} qubits"
            )));
        }
        let mut p = PauliString::identity(n);
        for j in 0..n {
            p.set(j, Pauli::from_code((k & 3) as u8).unwrap());
            k >>= 2;
        }
        Ok(p)
    }

    pub fn to_index(&self) -> Result<u64> {
        if self.n > MAX_INDEXED_QUBITS {
            return Err(SimError::capacity(
                "indexed Pauli qubits",
                MAX_INDEXED_QUBITS,
                self.n,
            ));
        }
        Ok(self
            .iter()
            .enumerate()
            .map(|(j, p)| (p.code() as u64) << (2 * j))
            .sum())
    }

    /// Sub-string on the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut p = PauliString::identity(qubits.len());
        for (local, &q) in qubits.iter().enumerate() {
            p.set(local, self.get(q));
        }
        p
    }

    /// Embed into a larger register, placing qubit j at `offset + j`.
    pub fn embed(&self, n_total: usize, offset: usize) -> Result<PauliString> {
        if offset + self.n > n_total {
            return Err(SimError::dim(n_total, offset + self.n));
        }
        let mut p = PauliString::identity(n_total);
        for (j, q) in self.iter().enumerate() {
            p.set(offset + j, q);
        }
        Ok(p)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString(\"{self}\")")
    }
}

impl FromStr for PauliString {
    type Err = SimError;

    fn from_str(s: &str) -> Result<PauliString> {
        if s.is_empty() {
            return Err(SimError::Parse {
                line: 1,
                column: 1,
                message: "empty Pauli string".into(),
            });
        }
        let paulis = s
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Pauli::from_char(c).ok_or_else(|| SimError::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("invalid Pauli character {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_paulis(&paulis))
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.phase, self.pauli)
    }
}

/// A computational-basis label, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> BitString {
        BitString(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Integer index with qubit 0 as the least significant bit.
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | ((b as u64) << j))
    }

    pub fn from_index(n: usize, index: u64) -> BitString {
        BitString((0..n).map(|j| (index >> j) & 1 == 1).collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = SimError;

    fn from_str(s: &str) -> Result<BitString> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(SimError::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("invalid bit {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// `p|bits⟩ = phase·|bits'⟩`.
pub fn apply_to_basis(p: &PauliString, bits: &BitString) -> Result<(BitString, Phase)> {
    if bits.len() != p.n() {
        return Err(SimError::dim(p.n(), bits.len()));
    }
    let mut k = 0i64;
    let out = bits
        .0
        .iter()
        .zip(p.iter())
        .map(|(&b, q)| match q {
            Pauli::I => b,
            Pauli::X => !b,
            Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                k += if b { 3 } else { 1 };
                !b
            }
            Pauli::Z => {
                if b {
                    k += 2;
                }
                b
            }
        })
        .collect();
    Ok((BitString(out), Phase::from_exponent(k)))
}

/// Sign `s` with `noise · observable · noise† = s · observable`.
pub fn conjugate_sign(observable: &PauliString, noise: &PauliString) -> Result<i8> {
    Ok(if observable.commutes_with(noise)? { 1 } else { -1 })
}

/// Uniform draw over the `4^n - 1` non-identity strings, rejection-free.
pub fn sample_nonidentity_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PauliString> {
    if n == 0 || n > MAX_INDEXED_QUBITS {
        return Err(SimError::capacity("indexed Pauli qubits", MAX_INDEXED_QUBITS, n));
    }
    let max = (1u64 << (2 * n)) - 1;
    let k = rng.random_range(1..=max);
    PauliString::from_index(n, k)
}
