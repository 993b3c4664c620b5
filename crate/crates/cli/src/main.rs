//! `dualbuck`: run scenarios, shoot-through calculations and modulation
//! sweeps from the command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod plot;
mod summary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualbuck::control::Case;
use dualbuck::engine::{EngineError, Fidelity};

#[derive(Debug, Parser)]
#[command(name = "dualbuck", version, about = "Dual-buck back-to-back converter simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario (or a batch) and write CSV, summary and plots.
    Simulate(SimulateArgs),
    /// Shoot-through current of one leg and the time it takes to reach a limit.
    ShootThrough(ShootThroughArgs),
    /// Open-loop sweep of the offset modulator and carrier comparators.
    ModulationDemo(ModulationArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    /// Machine and grid converters only; the grid side holds the DC link.
    #[value(name = "no_hess", alias = "a")]
    NoHess,
    /// Battery on the DC leg, no supercapacitor.
    #[value(name = "battery_only", alias = "b")]
    BatteryOnly,
    /// Battery and supercapacitor.
    #[value(name = "full_hess", alias = "c")]
    FullHess,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::NoHess => Case::NoHess,
            CaseArg::BatteryOnly => Case::BatteryOnly,
            CaseArg::FullHess => Case::FullHess,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FidelityArg {
    Averaged,
    Switched,
}

impl From<FidelityArg> for Fidelity {
    fn from(f: FidelityArg) -> Self {
        match f {
            FidelityArg::Averaged => Fidelity::Averaged,
            FidelityArg::Switched => Fidelity::Switched,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file; built-in defaults are used when omitted.
    #[arg(long, conflicts_with = "batch")]
    scenario: Option<PathBuf>,
    /// Run several scenario files concurrently, one output directory each.
    #[arg(long, num_args = 1..)]
    batch: Vec<PathBuf>,
    /// Storage configuration; overrides the scenario file.
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long, value_enum)]
    fidelity: Option<FidelityArg>,
    /// Wind-noise seed; overrides the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated time in seconds; overrides the scenario file.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print the resolved scenario as TOML and exit without simulating.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Debug, Args)]
struct ShootThroughArgs {
    /// DC-link voltage [V].
    #[arg(long, default_value_t = 2000.0)]
    vdc: f64,
    /// Total path resistance [Ω].
    #[arg(long, default_value_t = 0.02)]
    req: f64,
    /// Total path inductance [H].
    #[arg(long, default_value_t = 100e-6)]
    leq: f64,
    /// Current flowing when the fault starts [A].
    #[arg(long, default_value_t = 0.0)]
    i0: f64,
    /// Protection current limit [A].
    #[arg(long, default_value_t = 100.0)]
    limit: f64,
    /// End of the printed table [s]; five time constants when omitted.
    #[arg(long)]
    tmax: Option<f64>,
    /// Rows of the printed table.
    #[arg(long, default_value_t = 21)]
    points: usize,
}

#[derive(Debug, Args)]
struct ModulationArgs {
    /// Upper-output modulation index.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Lower-output modulation index.
    #[arg(long, default_value_t = 0.5)]
    ml: f64,
    /// Upper-output frequency [Hz].
    #[arg(long, default_value_t = 60.0)]
    fu: f64,
    /// Lower-output frequency [Hz].
    #[arg(long, default_value_t = 20.0)]
    fl: f64,
    #[arg(long, value_enum, default_value = "on")]
    offsets: Switch,
    /// Sweep length in periods of the slower reference.
    #[arg(long, default_value_t = 1.0)]
    periods: f64,
    #[arg(long, default_value_t = 5e3)]
    carrier_hz: f64,
    /// Sample step [s].
    #[arg(long, default_value_t = 1e-6)]
    dt: f64,
    /// CSV of references and gate states.
    #[arg(long, default_value = "modulation.csv")]
    out: PathBuf,
}

/// Exit status for an error: 2 for numeric failures of the engine, 1 for
/// everything the user can fix in the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err.chain().any(|e| {
        matches!(e.downcast_ref::<EngineError>(), Some(EngineError::Divergence { .. } | EngineError::Modulation { .. }))
    });
    if numeric {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::ShootThrough(args) => commands::shoot_through(args),
        Command::ModulationDemo(args) => commands::modulation_demo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
