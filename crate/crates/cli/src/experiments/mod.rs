mod ancilla;
mod hamming;
mod sweep;
mod tfim;
mod variance;

pub use ancilla::{run_ancilla_compare, AncillaPoint, AncillaResults, ObservableComparison};
pub use hamming::{inject_readout_flips, run_hamming, total_variation, HammingOracle, HammingResults};
pub use sweep::{run_depolarizing_sweep, ObservableEstimate, SweepOracle, SweepPoint};
pub use tfim::{run_tfim, CurveFit, TfimOracle, TfimResults};
pub use variance::{run_variance_check, VarianceResults};

use std::time::Instant;

use serde::Serialize;

use crate::report::{CsvTable, PointTiming};

/// What an experiment hands back before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: serde_json::Value,
    pub oracle: serde_json::Value,
    pub points: Vec<PointTiming>,
    pub csv: CsvTable,
}

impl Outcome {
    fn new<R: Serialize, O: Serialize>(
        results: &R,
        oracle: &O,
        points: Vec<PointTiming>,
        csv: CsvTable,
    ) -> Outcome {
        Outcome {
            results: serde_json::to_value(results).expect("plain data"),
            oracle: serde_json::to_value(oracle).expect("plain data"),
            points,
            csv,
        }
    }
}

fn timed<T>(
    label: String,
    shots: u64,
    points: &mut Vec<PointTiming>,
    f: impl FnOnce() -> T,
) -> T {
    let start = Instant::now();
    let out = f();
    points.push(PointTiming {
        label,
        seconds: start.elapsed().as_secs_f64(),
        shots,
    });
    out
}

fn fmt(v: f64) -> String {
    format!("{v}")
}
