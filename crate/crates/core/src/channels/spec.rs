//! JSON channel-spec files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "terms": [
//!     { "p": 0.5, "op": "II" },
//!     { "p": 0.25, "op": { "gates": [ { "gate": "H", "qubits": [0] },
//!                                      { "gate": "CX", "qubits": [0, 1] } ] } },
//!     { "p": 0.25, "op": { "matrix": [ [[0,0],[1,0],[0,0],[0,0]],
//!                                      [[1,0],[0,0],[0,0],[0,0]],
//!                                      [[0,0],[0,0],[0,0],[1,0]],
//!                                      [[0,0],[0,0],[1,0],[0,0]] ] } }
//!   ]
//! }
//! ```
//!
//! `op` is a Pauli text form (leftmost character = qubit 0), a gate list, or
//! a row-major complex matrix of `[re, im]` pairs on all `n` qubits. Gate
//! names: `H S T X Y Z CX RX RY RZ RZZ DENSE`; rotations take `theta`
//! (radians), `CX` takes `[control, target]`, `DENSE` takes a `matrix`.
//! Unknown fields are rejected everywhere.

use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{RandomUnitaryChannel, Unitary};
use crate::engine::{CMatrix, CircuitSeq, Gate};
use crate::error::{Result, SimError};
use crate::pauli::PauliString;

/// Hand-written files only need to sum to 1 within this tolerance; they are
/// renormalized afterwards.
pub const SPEC_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub n: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub p: f64,
    pub op: OpSpec,
}

pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq)]
pub enum OpSpec {
    Pauli(String),
    Gates(Vec<GateSpec>),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

impl<'de> Deserialize<'de> for OpSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<OpSpec, D::Error> {
        struct OpVisitor;

        impl<'de> Visitor<'de> for OpVisitor {
            type Value = OpSpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a Pauli string, {\"gates\": [...]} or {\"matrix\": [...]}")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<OpSpec, E> {
                Ok(OpSpec::Pauli(v.to_owned()))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<OpSpec, A::Error> {
                const FIELDS: &[&str] = &["gates", "matrix"];
                let key: String = map
                    .next_key()?
                    .ok_or_else(|| de::Error::custom("empty op object"))?;
                let op = match key.as_str() {
                    "gates" => OpSpec::Gates(map.next_value()?),
                    "matrix" => OpSpec::Matrix(map.next_value()?),
                    other => return Err(de::Error::unknown_field(other, FIELDS)),
                };
                if let Some(extra) = map.next_key::<String>()? {
                    return Err(de::Error::custom(format!(
                        "op object must have exactly one field, found extra `{extra}`"
                    )));
                }
                Ok(op)
            }
        }

        d.deserialize_any(OpVisitor)
    }
}

impl Serialize for OpSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OpSpec::Pauli(p) => s.serialize_str(p),
            OpSpec::Gates(g) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("gates", g)?;
                m.end()
            }
            OpSpec::Matrix(mat) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("matrix", mat)?;
                m.end()
            }
        }
    }
}

fn matrix_from_spec(rows: &MatrixSpec) -> Result<CMatrix> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(SimError::Validation("matrix must be square and non-empty".into()));
    }
    let flat: Vec<_> = rows
        .iter()
        .flatten()
        .map(|[re, im]| crate::engine::c(*re, *im))
        .collect();
    if flat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SimError::Validation("matrix has non-finite entries".into()));
    }
    Ok(CMatrix::from_row_slice(dim, dim, &flat))
}

fn matrix_to_spec(m: &CMatrix) -> MatrixSpec {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl GateSpec {
    pub fn to_gate(&self) -> Result<Gate> {
        let arity = |k: usize| -> Result<()> {
            if self.qubits.len() != k {
                return Err(SimError::Validation(format!(
                    "gate {} takes {k} qubit(s), got {}",
                    self.gate,
                    self.qubits.len()
                )));
            }
            Ok(())
        };
        let theta = || -> Result<f64> {
            match self.theta {
                Some(t) if t.is_finite() => Ok(t),
                Some(_) => Err(SimError::Validation(format!("gate {}: non-finite theta", self.gate))),
                None => Err(SimError::Validation(format!("gate {} needs theta", self.gate))),
            }
        };
        let name = self.gate.to_ascii_uppercase();
        let takes_theta = matches!(name.as_str(), "RX" | "RY" | "RZ" | "RZZ");
        if self.theta.is_some() && !takes_theta {
            return Err(SimError::Validation(format!("gate {} takes no theta", self.gate)));
        }
        if self.matrix.is_some() && name != "DENSE" {
            return Err(SimError::Validation(format!("gate {} takes no matrix", self.gate)));
        }
        let q = &self.qubits;
        let g = match name.as_str() {
            "H" | "S" | "T" | "X" | "Y" | "Z" => {
                arity(1)?;
                match name.as_str() {
                    "H" => Gate::H(q[0]),
                    "S" => Gate::S(q[0]),
                    "T" => Gate::T(q[0]),
                    "X" => Gate::X(q[0]),
                    "Y" => Gate::Y(q[0]),
                    _ => Gate::Z(q[0]),
                }
            }
            "CX" => {
                arity(2)?;
                Gate::CX {
                    control: q[0],
                    target: q[1],
                }
            }
            "RX" | "RY" | "RZ" => {
                arity(1)?;
                let (qubit, theta) = (q[0], theta()?);
                match name.as_str() {
                    "RX" => Gate::RX { qubit, theta },
                    "RY" => Gate::RY { qubit, theta },
                    _ => Gate::RZ { qubit, theta },
                }
            }
            "RZZ" => {
                arity(2)?;
                Gate::RZZ {
                    a: q[0],
                    b: q[1],
                    theta: theta()?,
                }
            }
            "DENSE" => {
                let m = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| SimError::Validation("DENSE gate needs a matrix".into()))?;
                Gate::Dense {
                    targets: q.clone(),
                    matrix: matrix_from_spec(m)?,
                }
            }
            _ => {
                return Err(SimError::Validation(format!("unknown gate `{}`", self.gate)));
            }
        };
        Ok(g)
    }

    pub fn from_gate(g: &Gate) -> Result<GateSpec> {
        let (theta, matrix) = match g {
            Gate::RX { theta, .. }
            | Gate::RY { theta, .. }
            | Gate::RZ { theta, .. }
            | Gate::RZZ { theta, .. } => (Some(*theta), None),
            Gate::Dense { matrix, .. } => (None, Some(matrix_to_spec(matrix))),
            Gate::MultiplexedRy { .. } => {
                return Err(SimError::Argument(
                    "multiplexed RY has no channel-spec form".into(),
                ))
            }
            _ => (None, None),
        };
        Ok(GateSpec {
            gate: g.name().to_owned(),
            qubits: g.qubits(),
            theta,
            matrix,
        })
    }
}

fn parse_error(e: serde_json::Error) -> SimError {
    SimError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<RandomUnitaryChannel> {
        if self.n == 0 {
            return Err(SimError::Validation("n must be at least 1".into()));
        }
        if self.terms.is_empty() {
            return Err(SimError::Validation("channel has no terms".into()));
        }
        let mut probs = Vec::with_capacity(self.terms.len());
        let mut unitaries = Vec::with_capacity(self.terms.len());
        for (i, term) in self.terms.iter().enumerate() {
            let ctx = |e: SimError| SimError::Validation(format!("term {i}: {}", strip(&e)));
            if !term.p.is_finite() || term.p < 0.0 {
                return Err(SimError::Validation(format!(
                    "term {i}: negative or non-finite probability {}",
                    term.p
                )));
            }
            let u = match &term.op {
                OpSpec::Pauli(s) => {
                    let p: PauliString = s.parse().map_err(ctx)?;
                    if p.n() != self.n {
                        return Err(SimError::Validation(format!(
                            "term {i}: Pauli {s:?} has {} qubits, expected {}",
                            p.n(),
                            self.n
                        )));
                    }
                    Unitary::Pauli(p)
                }
                OpSpec::Gates(gates) => {
                    let mut c = CircuitSeq::new(self.n);
                    for g in gates {
                        c.push(g.to_gate().map_err(ctx)?).map_err(ctx)?;
                    }
                    Unitary::Circuit(c)
                }
                OpSpec::Matrix(m) => {
                    let m = matrix_from_spec(m).map_err(ctx)?;
                    if m.nrows() != 1 << self.n.min(16) || self.n > 16 {
                        return Err(SimError::Validation(format!(
                            "term {i}: matrix is {0}x{0}, expected {1}x{1}",
                            m.nrows(),
                            1u64 << self.n.min(63)
                        )));
                    }
                    let u = Unitary::Dense(m);
                    u.validate().map_err(ctx)?;
                    u
                }
            };
            probs.push(term.p);
            unitaries.push(u);
        }
        RandomUnitaryChannel::explicit_with_tolerance(probs, unitaries, SPEC_SUM_TOL)
    }
}

fn strip(e: &SimError) -> String {
    match e {
        SimError::Validation(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Parse and validate a channel-spec document.
pub fn parse_channel_spec(text: &str) -> Result<RandomUnitaryChannel> {
    let spec: ChannelSpec = serde_json::from_str(text).map_err(parse_error)?;
    spec.to_channel()
}

/// Serialize an enumerable channel; composed channels are enumerated first.
pub fn to_channel_spec(channel: &RandomUnitaryChannel, cap: usize) -> Result<String> {
    let e = channel.enumerate_explicit(cap)?;
    let terms = e
        .terms()
        .map(|(p, u)| {
            let op = match u {
                Unitary::Pauli(ps) => OpSpec::Pauli(ps.to_string()),
                Unitary::Circuit(c) => OpSpec::Gates(
                    c.gates()
                        .iter()
                        .map(GateSpec::from_gate)
                        .collect::<Result<_>>()?,
                ),
                Unitary::Dense(m) => OpSpec::Matrix(matrix_to_spec(m)),
            };
            Ok(TermSpec { p, op })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = ChannelSpec { n: e.n(), terms };
    serde_json::to_string_pretty(&spec).map_err(|e| SimError::Argument(e.to_string()))
}
