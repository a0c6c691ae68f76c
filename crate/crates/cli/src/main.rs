//! `beampage`: analytic model, verification, simulation and sweeps from the
//! command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use beampage::experiments::{compare_file, run_experiment, ExperimentFile, ExperimentSpec, Mode, Overrides, Profile};
use beampage::{ExperimentError, SchemeKind};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "beampage", version, about = "Paging in directional multi-beam cellular systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the activation model over a parameter grid.
    Analytic(RunArgs),
    /// Compare the activation model against Monte Carlo.
    Verify(RunArgs),
    /// Simulate one scheme (or the configured schemes) at the base config.
    Simulate(RunArgs),
    /// Simulate every scheme across a sweep axis.
    Sweep(RunArgs),
    /// Resource and PAR reductions from a results CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// desk (10,000 cycles) or paper (100,000 cycles).
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// e.g. legacy, madp, mfep-ad, mfep-dli, mfep-md:4/2/0
    #[arg(long)]
    scheme: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// results.csv written by `simulate` or `sweep`.
    results: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run_mode(mode: Mode, args: RunArgs) -> Result<(), ExperimentError> {
    let overrides = Overrides {
        seed: args.seed,
        profile: args.profile.as_deref().map(str::parse::<Profile>).transpose()?,
        scheme: args.scheme.as_deref().map(str::parse::<SchemeKind>).transpose()?,
        jobs: args.jobs,
    };
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::load(path, mode)?,
        None => ExperimentSpec::from_file(ExperimentFile::default(), mode),
    };
    spec.apply(&overrides);
    let report = run_experiment(&spec, &args.out)?;
    print!("{}", report.summary);
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Analytic(a) => run_mode(Mode::Analytic, a),
        Command::Verify(a) => run_mode(Mode::Verify, a),
        Command::Simulate(a) => run_mode(Mode::Simulate, a),
        Command::Sweep(a) => run_mode(Mode::Sweep, a),
        Command::Compare(a) => compare_file(&a.results, &a.out).map(|report| {
            print!("{}", report.summary);
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
