use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mixsim::channels::{RandomUnitaryChannel, Unitary};
use mixsim::engine::{prepare_zero, Backend, EngineConfig};
use mixsim::oracles::hamming_distribution;
use mixsim::pauli::{apply_to_basis, BitString};
use mixsim::rng::ShotSeeder;
use mixsim::Result;

use super::{fmt, timed, Outcome};
use crate::config::{BackendArg, HammingConfig};
use crate::report::CsvTable;

/// Flip each bit independently with probability `p_flip`.
pub fn inject_readout_flips<R: Rng + ?Sized>(bits: &BitString, p_flip: f64, rng: &mut R) -> BitString {
    BitString(bits.0.iter().map(|&b| b ^ rng.random_bool(p_flip)).collect())
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingResults {
    pub n: usize,
    pub shots: u64,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// Distance to the oracle that includes readout flips.
    pub tv_readout: f64,
    /// Distance to the flip-free oracle.
    pub tv_ideal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingOracle {
    pub ideal: Vec<f64>,
    pub readout: Vec<f64>,
}

pub fn run_hamming(config: &HammingConfig) -> Result<Outcome> {
    config.validate()?;
    let n = config.n;
    let channel = RandomUnitaryChannel::depolarizing(n, config.p)?;
    let seeder = ShotSeeder::new(config.seed, "hamming");
    let engine = EngineConfig::default();
    let backend = match config.backend {
        BackendArg::Auto => None,
        BackendArg::Stabilizer => Some(Backend::Stabilizer),
        BackendArg::Dense => Some(Backend::Dense),
        BackendArg::Factored => Some(Backend::Factored { block: 1 }),
    };
    // fail on capacity before spawning shots
    if let Some(b) = backend {
        prepare_zero(n, b, &engine)?;
    }
    let zeros = BitString::zeros(n);

    let mut timings = Vec::new();
    let weights = timed(format!("n={n}"), config.shots, &mut timings, || {
        (0..config.shots)
            .into_par_iter()
            .map(|k| {
                let mut rng = seeder.rng(k);
                let draw = channel.sample(&mut rng)?;
                let Unitary::Pauli(p) = &draw.unitary else {
                    unreachable!("depolarizing draws are Paulis")
                };
                let bits = match backend {
                    None => apply_to_basis(p, &zeros)?.0,
                    Some(b) => {
                        let mut s = prepare_zero(n, b, &engine)?;
                        s.apply_pauli(p)?;
                        s.sample_bitstring(&mut rng)
                    }
                };
                Ok(inject_readout_flips(&bits, config.p_flip, &mut rng).hamming_weight())
            })
            .collect::<Result<Vec<usize>>>()
    })?;

    let mut counts = vec![0u64; n + 1];
    for w in weights {
        counts[w] += 1;
    }
    let frequencies: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / config.shots as f64)
        .collect();
    let oracle = HammingOracle {
        ideal: hamming_distribution(n, config.p, 0.0)?,
        readout: hamming_distribution(n, config.p, config.p_flip)?,
    };
    let mut csv = CsvTable::new(vec!["weight", "count", "frequency", "oracle_ideal", "oracle_readout"]);
    for w in 0..=n {
        csv.push([
            w.to_string(),
            counts[w].to_string(),
            fmt(frequencies[w]),
            fmt(oracle.ideal[w]),
            fmt(oracle.readout[w]),
        ]);
    }
    let results = HammingResults {
        n,
        shots: config.shots,
        tv_readout: total_variation(&frequencies, &oracle.readout),
        tv_ideal: total_variation(&frequencies, &oracle.ideal),
        counts,
        frequencies,
    };
    Ok(Outcome::new(&results, &oracle, timings, csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_extremes() {
        let bits: BitString = "0110".parse().unwrap();
        let mut rng = ShotSeeder::new(1, "flip").rng(0);
        assert_eq!(inject_readout_flips(&bits, 0.0, &mut rng), bits);
        assert_eq!(
            inject_readout_flips(&bits, 1.0, &mut rng),
            "1001".parse::<BitString>().unwrap()
        );
    }

    #[test]
    fn flip_rate() {
        let p = 0.047;
        let trials = 100_000u64;
        let seeder = ShotSeeder::new(5, "flip-rate");
        let mut rng = seeder.rng(0);
        let zero = BitString::zeros(1);
        let flips = (0..trials)
            .filter(|_| inject_readout_flips(&zero, p, &mut rng).0[0])
            .count() as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((flips / trials as f64 - p).abs() < 4.0 * se);
    }
}
