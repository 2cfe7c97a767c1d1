//! Experiment configurations. Every field is validated before a run starts
//! and the whole struct is echoed into the report.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use mixsim::engine::{Backend, DEFAULT_DENSE_CAP};
use mixsim::estimator::{BackendChoice, Mode};
use mixsim::oracles::TfimParams;
use mixsim::pauli::MAX_INDEXED_QUBITS;
use mixsim::{Result, SimError};

/// Default step duration for the TFIM run. The step length is a free
/// parameter; decay times scale linearly with it.
pub const DEFAULT_TFIM_DT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Zero,
    BellPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    #[default]
    Auto,
    Stabilizer,
    Dense,
    Factored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    #[default]
    Shot,
    ExactSubcircuit,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Shot => Mode::Shot,
            ModeArg::ExactSubcircuit => Mode::ExactSubcircuit,
        }
    }
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(SimError::Validation(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(SimError::Validation("shots must be at least 1".into()));
    }
    Ok(())
}

fn check_range(n_min: usize, n_max: usize, limit: usize) -> Result<()> {
    if n_min == 0 || n_min > n_max {
        return Err(SimError::Validation(format!(
            "qubit range {n_min}..{n_max} is empty or starts at 0"
        )));
    }
    if n_max > limit {
        return Err(SimError::Capacity {
            what: "qubits",
            limit,
            requested: n_max,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub p: f64,
    pub shots: u64,
    pub state: StateKind,
    pub backend: BackendArg,
    pub p_flip: f64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_range(self.n_min, self.n_max, MAX_INDEXED_QUBITS)?;
        check_prob("p", self.p)?;
        check_prob("p_flip", self.p_flip)?;
        check_shots(self.shots)?;
        if self.state == StateKind::BellPairs {
            if self.backend == BackendArg::Stabilizer {
                return Err(SimError::Validation(
                    "bell-pairs prep contains T gates; the stabilizer backend cannot run it".into(),
                ));
            }
            if self.qubit_counts().is_empty() {
                return Err(SimError::Validation(format!(
                    "bell-pairs needs an even qubit count in {}..{}",
                    self.n_min, self.n_max
                )));
            }
        }
        if self.backend == BackendArg::Dense && self.n_max > DEFAULT_DENSE_CAP {
            return Err(SimError::Capacity {
                what: "dense qubits",
                limit: DEFAULT_DENSE_CAP,
                requested: self.n_max,
            });
        }
        Ok(())
    }

    /// Qubit counts visited; bell-pairs runs skip odd counts.
    pub fn qubit_counts(&self) -> Vec<usize> {
        (self.n_min..=self.n_max)
            .filter(|n| self.state == StateKind::Zero || n % 2 == 0)
            .collect()
    }

    pub fn backend_choice(&self) -> BackendChoice {
        let block = match self.state {
            StateKind::Zero => 1,
            StateKind::BellPairs => 2,
        };
        match (self.backend, self.state) {
            (BackendArg::Auto, StateKind::Zero) => BackendChoice::Auto,
            (BackendArg::Auto, StateKind::BellPairs) | (BackendArg::Factored, _) => {
                BackendChoice::Fixed(Backend::Factored { block })
            }
            (BackendArg::Stabilizer, _) => BackendChoice::Fixed(Backend::Stabilizer),
            (BackendArg::Dense, _) => BackendChoice::Fixed(Backend::Dense),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingConfig {
    pub n: usize,
    pub p: f64,
    pub shots: u64,
    pub p_flip: f64,
    pub backend: BackendArg,
    pub seed: u64,
}

impl HammingConfig {
    pub fn validate(&self) -> Result<()> {
        check_range(self.n, self.n, MAX_INDEXED_QUBITS)?;
        check_prob("p", self.p)?;
        check_prob("p_flip", self.p_flip)?;
        check_shots(self.shots)?;
        if matches!(self.backend, BackendArg::Dense) && self.n > DEFAULT_DENSE_CAP {
            return Err(SimError::Capacity {
                what: "dense qubits",
                limit: DEFAULT_DENSE_CAP,
                requested: self.n,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfimConfig {
    pub j: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub p: f64,
    pub shots: u64,
    pub seed: u64,
}

impl TfimConfig {
    pub fn params(&self) -> TfimParams {
        TfimParams {
            j: self.j,
            h: self.h,
            dt: self.dt,
            steps: self.steps,
            p: self.p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_shots(self.shots)?;
        self.params()
            .validate()
            .map_err(|e| SimError::Validation(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub p: f64,
    pub shots: u64,
    /// Channel-spec file used instead of the depolarizing channel.
    pub channel: Option<String>,
    pub seed: u64,
}

impl AncillaConfig {
    pub fn validate(&self) -> Result<()> {
        check_range(self.n_min, self.n_max, 3)?;
        check_prob("p", self.p)?;
        check_shots(self.shots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceConfig {
    pub channel: String,
    pub observable: String,
    pub shots: u64,
    pub runs: u64,
    pub mode: ModeArg,
    pub seed: u64,
}

impl VarianceConfig {
    pub fn validate(&self) -> Result<()> {
        check_shots(self.shots)?;
        if self.runs < 2 {
            return Err(SimError::Validation("runs must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    DepolarizingSweep(SweepConfig),
    Hamming(HammingConfig),
    Tfim(TfimConfig),
    AncillaCompare(AncillaConfig),
    VarianceCheck(VarianceConfig),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::DepolarizingSweep(c) => c.validate(),
            ExperimentConfig::Hamming(c) => c.validate(),
            ExperimentConfig::Tfim(c) => c.validate(),
            ExperimentConfig::AncillaCompare(c) => c.validate(),
            ExperimentConfig::VarianceCheck(c) => c.validate(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::DepolarizingSweep(c) => c.seed,
            ExperimentConfig::Hamming(c) => c.seed,
            ExperimentConfig::Tfim(c) => c.seed,
            ExperimentConfig::AncillaCompare(c) => c.seed,
            ExperimentConfig::VarianceCheck(c) => c.seed,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentConfig::DepolarizingSweep(_) => "depolarizing-sweep",
            ExperimentConfig::Hamming(_) => "hamming",
            ExperimentConfig::Tfim(_) => "tfim",
            ExperimentConfig::AncillaCompare(_) => "ancilla-compare",
            ExperimentConfig::VarianceCheck(_) => "variance-check",
        }
    }
}
