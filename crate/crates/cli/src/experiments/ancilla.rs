use serde::{Deserialize, Serialize};

use mixsim::ancilla::{
    build_dilated, hybrid_resources, resource_estimate, run_dilated_expectation, HybridResources,
    ResourceEstimate,
};
use mixsim::channels::{parse_channel_spec, RandomUnitaryChannel, DEFAULT_ENUMERATION_CAP};
use mixsim::engine::{CircuitSeq, EngineConfig, Observable};
use mixsim::estimator::{estimate, EstimateConfig, Prep};
use mixsim::oracles::{apply_channel_exact, zero_state_z_expectation, DensityMatrix};
use mixsim::pauli::{Pauli, PauliString};
use mixsim::rng::ShotSeeder;
use mixsim::{Result, SimError};

use super::{fmt, timed, Outcome};
use crate::config::AncillaConfig;
use crate::report::CsvTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableComparison {
    pub observable: String,
    pub dilated: f64,
    pub hybrid: f64,
    pub hybrid_predicted_variance: f64,
    /// Density-matrix value of the channel output.
    pub exact: f64,
    /// Closed form, for depolarizing runs.
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaPoint {
    pub n: usize,
    pub terms: u64,
    pub ancilla_resources: ResourceEstimate,
    pub hybrid_resources: HybridResources,
    pub observables: Vec<ObservableComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaResults {
    pub points: Vec<AncillaPoint>,
}

fn load_channel(path: &str) -> Result<RandomUnitaryChannel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Validation(format!("cannot read channel file {path}: {e}")))?;
    parse_channel_spec(&text)
}

fn compare_point(
    channel: &RandomUnitaryChannel,
    depolarizing_p: Option<f64>,
    config: &AncillaConfig,
    seeder: &ShotSeeder,
) -> Result<AncillaPoint> {
    let n = channel.n();
    let engine = EngineConfig::default();
    let dilated = build_dilated(channel, n)?;
    let m = dilated.multiplexer.len() as u64;
    let out = apply_channel_exact(&DensityMatrix::zero(n)?, channel, DEFAULT_ENUMERATION_CAP)?;
    let observables = (0..n)
        .map(|i| {
            let p = PauliString::single(n, i, Pauli::Z);
            let o = Observable::from(p.clone());
            let r = estimate(
                channel,
                &Prep::Zero,
                &p,
                config.shots,
                &EstimateConfig::default(),
                &seeder.child(&format!("Z{i}")),
            )?;
            Ok(ObservableComparison {
                observable: format!("Z{i}"),
                dilated: run_dilated_expectation(&dilated, &CircuitSeq::new(n), &o, &engine)?,
                hybrid: r.mean,
                hybrid_predicted_variance: r.predicted_variance,
                exact: out.expectation(&o)?,
                analytic: depolarizing_p
                    .map(|p| zero_state_z_expectation(n, p))
                    .transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AncillaPoint {
        n,
        terms: m,
        ancilla_resources: resource_estimate(n, m)?,
        hybrid_resources: hybrid_resources(n, m, config.shots),
        observables,
    })
}

pub fn run_ancilla_compare(config: &AncillaConfig) -> Result<Outcome> {
    config.validate()?;
    let root = ShotSeeder::new(config.seed, "ancilla-compare");
    let mut timings = Vec::new();
    let mut points = Vec::new();
    if let Some(path) = &config.channel {
        let channel = load_channel(path)?;
        if channel.n() > 3 {
            return Err(SimError::Capacity {
                what: "ancilla-compare target qubits",
                limit: 3,
                requested: channel.n(),
            });
        }
        let n = channel.n();
        points.push(timed(format!("n={n}"), config.shots * n as u64, &mut timings, || {
            compare_point(&channel, None, config, &root.child("file"))
        })?);
    } else {
        for n in config.n_min..=config.n_max {
            let channel = RandomUnitaryChannel::depolarizing(n, config.p)?;
            points.push(timed(format!("n={n}"), config.shots * n as u64, &mut timings, || {
                compare_point(&channel, Some(config.p), config, &root.child(&format!("n={n}")))
            })?);
        }
    }

    let oracle: Vec<_> = points
        .iter()
        .map(|pt| {
            serde_json::json!({
                "n": pt.n,
                "exact": pt.observables.iter().map(|o| o.exact).collect::<Vec<_>>(),
                "analytic": pt.observables.iter().map(|o| o.analytic).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut csv = CsvTable::new(vec![
        "n",
        "observable",
        "dilated",
        "hybrid",
        "exact",
        "ancilla_qubits",
        "hybrid_qubits",
        "segments",
    ]);
    for pt in &points {
        for o in &pt.observables {
            csv.push([
                pt.n.to_string(),
                o.observable.clone(),
                fmt(o.dilated),
                fmt(o.hybrid),
                fmt(o.exact),
                pt.ancilla_resources.qubits.to_string(),
                pt.hybrid_resources.qubits.to_string(),
                pt.ancilla_resources.depth_lower_bound.to_string(),
            ]);
        }
    }
    Ok(Outcome::new(&AncillaResults { points }, &oracle, timings, csv))
}
