use serde::{Deserialize, Serialize};

use mixsim::channels::{parse_channel_spec, DEFAULT_ENUMERATION_CAP};
use mixsim::engine::{EngineConfig, Observable};
use mixsim::estimator::{
    estimate, predicted_variance_exact_mode, predicted_variance_hybrid,
    predicted_variance_stinespring, EstimateConfig, Mode, Prep,
};
use mixsim::oracles::{apply_channel_exact, DensityMatrix};
use mixsim::pauli::PauliString;
use mixsim::rng::ShotSeeder;
use mixsim::{Result, SimError};

use super::{fmt, timed, Outcome};
use crate::config::VarianceConfig;
use crate::report::CsvTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceResults {
    pub estimates: Vec<f64>,
    pub mean_of_estimates: f64,
    /// Sample variance of the per-run estimates.
    pub empirical_variance: f64,
    /// Prediction for the selected mode.
    pub predicted_variance: f64,
    pub relative_error: f64,
    /// `(mean − exact) / √(predicted / runs)`.
    pub bias_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceOracle {
    pub exact: f64,
    pub hybrid_variance: f64,
    pub stinespring_variance: f64,
    pub exact_mode_variance: f64,
}

pub fn run_variance_check(config: &VarianceConfig) -> Result<Outcome> {
    config.validate()?;
    let text = std::fs::read_to_string(&config.channel).map_err(|e| {
        SimError::Validation(format!("cannot read channel file {}: {e}", config.channel))
    })?;
    let channel = parse_channel_spec(&text)?;
    let pauli: PauliString = config.observable.parse()?;
    if pauli.n() != channel.n() {
        return Err(SimError::Validation(format!(
            "observable {} has {} qubits, channel has {}",
            config.observable,
            pauli.n(),
            channel.n()
        )));
    }
    let n = channel.n();
    let o = Observable::from(pauli.clone());
    let engine = EngineConfig::default();
    let oracle = VarianceOracle {
        exact: apply_channel_exact(&DensityMatrix::zero(n)?, &channel, DEFAULT_ENUMERATION_CAP)?
            .expectation(&o)?,
        hybrid_variance: predicted_variance_hybrid(&channel, &Prep::Zero, &o, config.shots, &engine)?,
        stinespring_variance: predicted_variance_stinespring(&channel, &Prep::Zero, &o, config.shots)?,
        exact_mode_variance: predicted_variance_exact_mode(
            &channel,
            &Prep::Zero,
            &o,
            config.shots,
            &engine,
        )?,
    };
    let mode: Mode = config.mode.into();
    let est_cfg = EstimateConfig {
        mode,
        ..Default::default()
    };
    let root = ShotSeeder::new(config.seed, "variance-check");
    let mut timings = Vec::new();
    let estimates = timed(
        "runs".to_string(),
        config.shots * config.runs,
        &mut timings,
        || {
            (0..config.runs)
                .map(|r| {
                    let seeder = root.child(&format!("run={r}"));
                    Ok(estimate(&channel, &Prep::Zero, &pauli, config.shots, &est_cfg, &seeder)?.mean)
                })
                .collect::<Result<Vec<f64>>>()
        },
    )?;
    let runs = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / runs;
    let empirical = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1.0);
    let predicted = match mode {
        Mode::Shot => oracle.hybrid_variance,
        Mode::ExactSubcircuit => oracle.exact_mode_variance,
    };
    let relative_error = if predicted > 0.0 {
        (empirical - predicted).abs() / predicted
    } else {
        empirical
    };
    let bias_z = if predicted > 0.0 {
        (mean - oracle.exact) / (predicted / runs).sqrt()
    } else {
        0.0
    };
    let mut csv = CsvTable::new(vec!["run", "estimate"]);
    for (r, e) in estimates.iter().enumerate() {
        csv.push([r.to_string(), fmt(*e)]);
    }
    let results = VarianceResults {
        estimates,
        mean_of_estimates: mean,
        empirical_variance: empirical,
        predicted_variance: predicted,
        relative_error,
        bias_z,
    };
    Ok(Outcome::new(&results, &oracle, timings, csv))
}
