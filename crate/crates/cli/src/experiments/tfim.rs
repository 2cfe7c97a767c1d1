use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mixsim::channels::RandomUnitaryChannel;
use mixsim::engine::{Gate, StateVector};
use mixsim::oracles::{
    fit_decay_time, predicted_decay_time, tfim_eigenbasis, tfim_exact_evolve, tfim_propagator,
    DensityMatrix, PopulationSeries,
};
use mixsim::rng::ShotSeeder;
use mixsim::Result;

use super::{fmt, timed, Outcome};
use crate::config::TfimConfig;
use crate::report::CsvTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub eigenstate: usize,
    pub t1: Option<f64>,
    pub stderr: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfimResults {
    pub shots: u64,
    /// Sampled populations, same layout as the oracle series.
    pub sampled: PopulationSeries,
    pub fits: Vec<CurveFit>,
    /// Inverse-variance weighted mean of the successful curve fits.
    pub t1: Option<f64>,
    pub t1_stderr: Option<f64>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfimOracle {
    pub exact: PopulationSeries,
    pub energies: [f64; 4],
    pub predicted_t1: Option<f64>,
    /// Fit of the exact ground-state curve.
    pub exact_fit_t1: Option<f64>,
}

fn fit_curves(series: &PopulationSeries) -> Vec<CurveFit> {
    (0..4)
        .map(|k| match fit_decay_time(&series.times, &series.eigen_curve(k)) {
            Ok(f) => CurveFit {
                eigenstate: k,
                t1: Some(f.t1),
                stderr: Some(f.stderr),
                error: None,
            },
            Err(e) => CurveFit {
                eigenstate: k,
                t1: None,
                stderr: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

fn combine(fits: &[CurveFit]) -> std::result::Result<(f64, f64), String> {
    let ok: Vec<(f64, f64)> = fits
        .iter()
        .filter_map(|f| Some((f.t1?, f.stderr?)))
        .filter(|(t, s)| t.is_finite() && *s > 0.0 && s.is_finite())
        .collect();
    if ok.is_empty() {
        return Err("no eigenstate curve produced a usable fit".into());
    }
    let wsum: f64 = ok.iter().map(|(_, s)| 1.0 / (s * s)).sum();
    let mean = ok.iter().map(|(t, s)| t / (s * s)).sum::<f64>() / wsum;
    Ok((mean, wsum.sqrt().recip()))
}

/// Population histogram after `k` noisy steps, optionally rotated into the
/// eigenbasis before readout.
fn sample_point(
    k: usize,
    shots: u64,
    propagator: &Gate,
    rotation: Option<&Gate>,
    noise: &RandomUnitaryChannel,
    seeder: &ShotSeeder,
) -> Result<[f64; 4]> {
    let outcomes = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = seeder.rng(shot);
            let mut psi = StateVector::zero(2);
            for _ in 0..k {
                psi.apply_gate(propagator);
                let p = match noise.sample_operator(&mut rng)? {
                    mixsim::channels::Unitary::Pauli(p) => p,
                    _ => unreachable!("depolarizing draws are Paulis"),
                };
                psi.apply_pauli(&p)?;
            }
            if let Some(r) = rotation {
                psi.apply_gate(r);
            }
            Ok(psi.sample_bitstring(&mut rng).to_index() as usize)
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut pops = [0.0; 4];
    for o in outcomes {
        pops[o] += 1.0;
    }
    for v in &mut pops {
        *v /= shots as f64;
    }
    Ok(pops)
}

pub fn run_tfim(config: &TfimConfig) -> Result<Outcome> {
    config.validate()?;
    let params = config.params();
    let exact = tfim_exact_evolve(&params, &DensityMatrix::zero(2)?)?;
    let basis = tfim_eigenbasis(config.j, config.h);
    let propagator = Gate::Dense {
        targets: vec![0, 1],
        matrix: tfim_propagator(config.j, config.h, config.dt),
    };
    let rotation = Gate::Dense {
        targets: vec![0, 1],
        matrix: basis.readout_rotation(),
    };
    let noise = RandomUnitaryChannel::depolarizing(2, config.p)?;
    let root = ShotSeeder::new(config.seed, "tfim");

    let mut timings = Vec::new();
    let mut sampled = PopulationSeries {
        times: exact.times.clone(),
        comp_basis: Vec::new(),
        eigen_basis: Vec::new(),
    };
    for k in 0..=config.steps {
        let (comp, eig) = timed(format!("k={k}"), 2 * config.shots, &mut timings, || {
            let comp = sample_point(
                k,
                config.shots,
                &propagator,
                None,
                &noise,
                &root.child(&format!("comp/k={k}")),
            )?;
            let eig = sample_point(
                k,
                config.shots,
                &propagator,
                Some(&rotation),
                &noise,
                &root.child(&format!("eigen/k={k}")),
            )?;
            Ok::<_, mixsim::SimError>((comp, eig))
        })?;
        sampled.comp_basis.push(comp);
        sampled.eigen_basis.push(eig);
    }

    let fits = fit_curves(&sampled);
    let (t1, t1_stderr, fit_error) = match combine(&fits) {
        Ok((t, s)) => (Some(t), Some(s), None),
        Err(e) => (None, None, Some(e)),
    };
    let oracle = TfimOracle {
        energies: basis.energies,
        predicted_t1: predicted_decay_time(config.dt, config.p, 2).ok(),
        exact_fit_t1: fit_decay_time(&exact.times, &exact.eigen_curve(0))
            .ok()
            .map(|f| f.t1),
        exact,
    };

    let mut csv = CsvTable::new(vec!["time", "basis", "index", "sampled", "oracle"]);
    for (i, t) in sampled.times.iter().enumerate() {
        for (name, s, o) in [
            ("computational", &sampled.comp_basis, &oracle.exact.comp_basis),
            ("eigen", &sampled.eigen_basis, &oracle.exact.eigen_basis),
        ] {
            for j in 0..4 {
                csv.push([fmt(*t), name.to_string(), j.to_string(), fmt(s[i][j]), fmt(o[i][j])]);
            }
        }
    }
    let results = TfimResults {
        shots: config.shots,
        sampled,
        fits,
        t1,
        t1_stderr,
        fit_error,
    };
    Ok(Outcome::new(&results, &oracle, timings, csv))
}
