use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixsim::SimError;
use mixsim_cli::config::{
    AncillaConfig, BackendArg, HammingConfig, ModeArg, StateKind, SweepConfig, TfimConfig,
    VarianceConfig, DEFAULT_TFIM_DT,
};
use mixsim_cli::{exit_code, run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sim", version, about = "Per-shot sampling simulation of random-unitary channels")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional flat CSV of the plotted series.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-qubit Z (or pairwise XX) expectations under n-qubit depolarizing noise.
    Depolarizing {
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 27)]
        n_max: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, value_enum, default_value_t = StateKind::Zero)]
        state: StateKind,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
        #[arg(long, default_value_t = 0.0)]
        p_flip: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Hamming-weight histogram of depolarized |0^n> with readout flips.
    Hamming {
        #[arg(long, default_value_t = 27)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0.047)]
        p_flip: f64,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
        #[command(flatten)]
        output: Output,
    },
    /// Two-qubit transverse-field Ising model with depolarizing noise per step.
    Tfim {
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        #[arg(long = "h", default_value_t = 1.0)]
        h: f64,
        /// Step duration; free parameter, decay times scale with it.
        #[arg(long, default_value_t = DEFAULT_TFIM_DT)]
        dt: f64,
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Ancilla-dilated evaluation against per-shot sampling and exact values.
    AncillaCompare {
        /// Qubit count or inclusive range such as `1..3`.
        #[arg(long, default_value = "1..3", value_parser = parse_range)]
        n: (usize, usize),
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        /// Channel-spec JSON file to use instead of the depolarizing channel.
        #[arg(long)]
        channel: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Spread of the estimator over repeated seeded runs against its predicted variance.
    VarianceCheck {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        observable: String,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 400)]
        runs: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Shot)]
        mode: ModeArg,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

fn into_config(command: Command) -> (ExperimentConfig, Output) {
    match command {
        Command::Depolarizing {
            n_min,
            n_max,
            p,
            shots,
            state,
            backend,
            p_flip,
            output,
        } => (
            ExperimentConfig::DepolarizingSweep(SweepConfig {
                n_min,
                n_max,
                p,
                shots,
                state,
                backend,
                p_flip,
                seed: output.seed,
            }),
            output,
        ),
        Command::Hamming {
            n,
            p,
            shots,
            p_flip,
            backend,
            output,
        } => (
            ExperimentConfig::Hamming(HammingConfig {
                n,
                p,
                shots,
                p_flip,
                backend,
                seed: output.seed,
            }),
            output,
        ),
        Command::Tfim {
            j,
            h,
            dt,
            steps,
            p,
            shots,
            output,
        } => (
            ExperimentConfig::Tfim(TfimConfig {
                j,
                h,
                dt,
                steps,
                p,
                shots,
                seed: output.seed,
            }),
            output,
        ),
        Command::AncillaCompare {
            n,
            p,
            shots,
            channel,
            output,
        } => (
            ExperimentConfig::AncillaCompare(AncillaConfig {
                n_min: n.0,
                n_max: n.1,
                p,
                shots,
                channel,
                seed: output.seed,
            }),
            output,
        ),
        Command::VarianceCheck {
            channel,
            observable,
            shots,
            runs,
            mode,
            output,
        } => (
            ExperimentConfig::VarianceCheck(VarianceConfig {
                channel,
                observable,
                shots,
                runs,
                mode,
                seed: output.seed,
            }),
            output,
        ),
    }
}

fn fail(e: &SimError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let (config, output) = into_config(cli.command);
    let (report, csv) = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match &output.out {
        Some(path) => {
            if let Err(e) = report.write_json(path) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{}", report.to_json()),
    }
    if let Some(path) = &output.csv {
        if let Err(e) = csv.write(path) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
