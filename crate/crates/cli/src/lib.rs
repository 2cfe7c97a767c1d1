//! Experiment drivers behind the `sim` binary.
//!
//! Each experiment takes a validated config and returns a [`RunReport`] with
//! the estimates, the matching exact or analytic references, and timings.

pub mod config;
pub mod experiments;
pub mod report;

use std::time::Instant;

use mixsim::{Result, SimError};

pub use config::ExperimentConfig;
pub use experiments::inject_readout_flips;
pub use report::{CsvTable, RunReport, Timing};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub fn exit_code(e: &SimError) -> i32 {
    if e.is_capacity() {
        EXIT_CAPACITY
    } else {
        EXIT_VALIDATION
    }
}

pub fn run(config: &ExperimentConfig) -> Result<(RunReport, CsvTable)> {
    config.validate()?;
    let start = Instant::now();
    let out = match config {
        ExperimentConfig::DepolarizingSweep(c) => experiments::run_depolarizing_sweep(c)?,
        ExperimentConfig::Hamming(c) => experiments::run_hamming(c)?,
        ExperimentConfig::Tfim(c) => experiments::run_tfim(c)?,
        ExperimentConfig::AncillaCompare(c) => experiments::run_ancilla_compare(c)?,
        ExperimentConfig::VarianceCheck(c) => experiments::run_variance_check(c)?,
    };
    let report = RunReport {
        config: config.clone(),
        results: out.results,
        oracle: out.oracle,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            points: out.points,
        },
        version: mixsim::VERSION.to_string(),
        seed: config.seed(),
    };
    Ok((report, out.csv))
}
