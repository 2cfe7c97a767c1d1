//! Two-qubit transverse-field Ising model `H = −J Z₁Z₂ − h (X₁ + X₂)` with a
//! depolarizing channel after every propagator step.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{apply_channel_exact, lambda, DensityMatrix};
use crate::channels::RandomUnitaryChannel;
use crate::engine::CMatrix;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimParams {
    pub j: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub p: f64,
}

impl TfimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Argument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SimError::Argument(format!("p = {} outside [0, 1]", self.p)));
        }
        if !self.j.is_finite() || !self.h.is_finite() {
            return Err(SimError::Argument("J and h must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    /// Indexed by basis state `b0 + 2 b1`.
    pub comp_basis: Vec<[f64; 4]>,
    /// Indexed by eigenstate, ascending energy.
    pub eigen_basis: Vec<[f64; 4]>,
}

impl PopulationSeries {
    /// Population of eigenstate `k` over time.
    pub fn eigen_curve(&self, k: usize) -> Vec<f64> {
        self.eigen_basis.iter().map(|row| row[k]).collect()
    }

    pub fn comp_curve(&self, k: usize) -> Vec<f64> {
        self.comp_basis.iter().map(|row| row[k]).collect()
    }
}

/// Real symmetric Hamiltonian in the little-endian basis `b0 + 2 b1`.
pub fn tfim_hamiltonian(j: f64, h: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..4usize {
        let parity = ((i & 1) ^ (i >> 1)) as f64;
        m[(i, i)] = -j * (1.0 - 2.0 * parity);
        m[(i ^ 1, i)] -= h;
        m[(i ^ 2, i)] -= h;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfimEigenbasis {
    /// Ascending.
    pub energies: [f64; 4],
    /// Column `k` is the eigenvector of `energies[k]`.
    pub vectors: DMatrix<f64>,
}

/// Eigenvectors sorted by ascending energy, each scaled so its
/// largest-magnitude component (first one on ties) is positive.
pub fn tfim_eigenbasis(j: f64, h: f64) -> TfimEigenbasis {
    let eig = SymmetricEigen::new(tfim_hamiltonian(j, h));
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(4, 4);
    let mut energies = [0.0; 4];
    for (k, &src) in order.iter().enumerate() {
        energies[k] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lead = col
            .iter()
            .find(|v| v.abs() >= max - 1e-12)
            .copied()
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(k, &(col * sign));
    }
    TfimEigenbasis { energies, vectors }
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

impl TfimEigenbasis {
    /// `V†`: maps eigenstate `k` to basis state `|k⟩` for readout.
    pub fn readout_rotation(&self) -> CMatrix {
        complexify(&self.vectors).adjoint()
    }
}

/// `exp(−i H dt)` from the spectral decomposition of `H`.
pub fn tfim_propagator(j: f64, h: f64, dt: f64) -> CMatrix {
    let basis = tfim_eigenbasis(j, h);
    let v = complexify(&basis.vectors);
    let phases = nalgebra::DVector::from_iterator(
        4,
        basis
            .energies
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * dt)),
    );
    &v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Per step: propagate, then apply the 16-term two-qubit depolarizing sum.
/// Point `k` of the series is the state after `k` steps (`k = 0..=steps`).
pub fn tfim_exact_evolve(params: &TfimParams, initial: &DensityMatrix) -> Result<PopulationSeries> {
    params.validate()?;
    if initial.n() != 2 {
        return Err(SimError::dim(2, initial.n()));
    }
    let u = tfim_propagator(params.j, params.h, params.dt);
    let v = complexify(&tfim_eigenbasis(params.j, params.h).vectors);
    let noise = RandomUnitaryChannel::depolarizing(2, params.p)?;
    let mut series = PopulationSeries {
        times: Vec::with_capacity(params.steps + 1),
        comp_basis: Vec::with_capacity(params.steps + 1),
        eigen_basis: Vec::with_capacity(params.steps + 1),
    };
    let mut rho = initial.clone();
    for k in 0..=params.steps {
        if k > 0 {
            rho = apply_channel_exact(&rho.conjugate(&u)?, &noise, 16)?;
        }
        let eig = v.adjoint() * rho.matrix() * &v;
        let d = rho.diagonal();
        series.times.push(k as f64 * params.dt);
        series.comp_basis.push([d[0], d[1], d[2], d[3]]);
        series
            .eigen_basis
            .push([eig[(0, 0)].re, eig[(1, 1)].re, eig[(2, 2)].re, eig[(3, 3)].re]);
    }
    Ok(series)
}

/// Time constant of the traceless part, which shrinks by `1 − λ` per step:
/// `T1 = −dt / ln(1 − λ)`.
pub fn predicted_decay_time(dt: f64, p: f64, n: usize) -> Result<f64> {
    let l = lambda(n, p)?;
    if !(l > 0.0 && l < 1.0) {
        return Err(SimError::Domain(format!(
            "decay time needs 0 < λ < 1, got λ = {l}"
        )));
    }
    if !(dt > 0.0) {
        return Err(SimError::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok(-dt / (1.0 - l).ln())
}
