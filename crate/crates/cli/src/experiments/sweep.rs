use serde::{Deserialize, Serialize};

use mixsim::channels::RandomUnitaryChannel;
use mixsim::engine::EngineConfig;
use mixsim::estimator::{estimate, mse, EstimateConfig, Mode, Prep};
use mixsim::oracles::{bell_phase_xx_expectation, zero_state_z_expectation};
use mixsim::pauli::{Pauli, PauliString};
use mixsim::rng::ShotSeeder;
use mixsim::Result;

use super::{fmt, timed, Outcome};
use crate::config::{StateKind, SweepConfig};
use crate::report::CsvTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub observable: String,
    pub estimate: f64,
    pub predicted_variance: f64,
    pub empirical_variance: f64,
    pub distinct_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub shots: u64,
    pub observables: Vec<ObservableEstimate>,
    /// Value every estimate in this point targets.
    pub analytic: f64,
    pub mse: f64,
    /// `9 (1 − analytic²) / N`, three standard deviations squared.
    pub mse_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOracle {
    pub n: usize,
    /// Noise-free readout.
    pub ideal: f64,
    /// Including the `(1 − 2 p_flip)^w` readout damping.
    pub with_readout: f64,
}

fn observables(n: usize, state: StateKind) -> Vec<(String, PauliString)> {
    match state {
        StateKind::Zero => (0..n)
            .map(|i| (format!("Z{i}"), PauliString::single(n, i, Pauli::Z)))
            .collect(),
        StateKind::BellPairs => (0..n)
            .step_by(2)
            .map(|i| {
                let mut p = PauliString::identity(n);
                p.set(i, Pauli::X);
                p.set(i + 1, Pauli::X);
                (format!("X{}X{}", i, i + 1), p)
            })
            .collect(),
    }
}

pub fn run_depolarizing_sweep(config: &SweepConfig) -> Result<Outcome> {
    config.validate()?;
    let root = ShotSeeder::new(config.seed, "depolarizing-sweep");
    let est_cfg = EstimateConfig {
        mode: Mode::Shot,
        backend: config.backend_choice(),
        engine: EngineConfig::default(),
        readout_flip: config.p_flip,
    };
    let (prep, weight) = match config.state {
        StateKind::Zero => (Prep::Zero, 1),
        StateKind::BellPairs => (Prep::BellPhasePairs, 2),
    };
    let damping = (1.0 - 2.0 * config.p_flip).powi(weight);

    let mut points = Vec::new();
    let mut oracle = Vec::new();
    let mut timings = Vec::new();
    let mut csv = CsvTable::new(vec![
        "n",
        "observable",
        "estimate",
        "analytic",
        "predicted_variance",
        "empirical_variance",
    ]);
    for n in config.qubit_counts() {
        let channel = RandomUnitaryChannel::depolarizing(n, config.p)?;
        let ideal = match config.state {
            StateKind::Zero => zero_state_z_expectation(n, config.p)?,
            StateKind::BellPairs => bell_phase_xx_expectation(n, config.p)?,
        };
        let analytic = ideal * damping;
        oracle.push(SweepOracle {
            n,
            ideal,
            with_readout: analytic,
        });
        let obs = observables(n, config.state);
        let total_shots = config.shots * obs.len() as u64;
        let estimates = timed(format!("n={n}"), total_shots, &mut timings, || {
            obs.iter()
                .map(|(label, o)| {
                    let seeder = root.child(&format!("n={n}/{label}"));
                    let r = estimate(&channel, &prep, o, config.shots, &est_cfg, &seeder)?;
                    Ok(ObservableEstimate {
                        observable: label.clone(),
                        estimate: r.mean,
                        predicted_variance: r.predicted_variance,
                        empirical_variance: r.empirical_variance,
                        distinct_draws: r.per_draw.len(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let measured: Vec<f64> = estimates.iter().map(|e| e.estimate).collect();
        let err = mse(&measured, &vec![analytic; measured.len()])?;
        for e in &estimates {
            csv.push([
                n.to_string(),
                e.observable.clone(),
                fmt(e.estimate),
                fmt(analytic),
                fmt(e.predicted_variance),
                fmt(e.empirical_variance),
            ]);
        }
        points.push(SweepPoint {
            n,
            shots: config.shots,
            observables: estimates,
            analytic,
            mse: err,
            mse_bound: 9.0 * (1.0 - analytic * analytic) / config.shots as f64,
        });
    }
    Ok(Outcome::new(&points, &oracle, timings, csv))
}
