//! `puncture`: experiment driver writing self-describing CSV.
//!
//! Exit status: 0 on success, 2 on a configuration error, 3 when `validate`
//! finds a failing check, 1 on I/O errors.

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use puncture_core::simulator::{Execution, Scheme};

use config::{CommandDefaults, ExperimentConfig, MapperPolicy, Mode, Overrides, Pair};
use error::CliError;

#[derive(Parser)]
#[command(name = "puncture", version, about = "Similarity-aware puncturing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// eMBB loss relative to the punctured symbols against the search size K.
    LossVsK,
    /// eMBB SER against SNR (pair mode) or transmit power (cell mode).
    SerSweep,
    /// eMBB block reliability per target and user in the cell.
    Reliability,
    /// URLLC SER against SNR or transmit power.
    Urllc,
    /// Analytic-versus-simulation checks; exits 3 on any failure.
    Validate,
    /// Search timing against K with a linear fit.
    Bench,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::LossVsK => "loss-vs-k",
            Command::SerSweep => "ser-sweep",
            Command::Reliability => "reliability",
            Command::Urllc => "urllc",
            Command::Validate => "validate",
            Command::Bench => "bench",
        }
    }

    fn defaults(self, mode: Mode) -> CommandDefaults {
        let grid = |hi: i32| (0..=hi / 5).map(|k| f64::from(5 * k)).collect();
        let cell = mode == Mode::Cell || matches!(self, Command::Reliability);
        CommandDefaults {
            trials: match self {
                Command::LossVsK => 20_000,
                Command::Bench => 300,
                _ if cell => 200,
                _ => 500,
            },
            power_grid: if cell { grid(40) } else { grid(45) },
            needs_seed: !matches!(self, Command::Validate),
        }
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[derive(Args)]
struct Flags {
    /// Flat TOML config file; flags and environment variables override it.
    #[arg(long, global = true, env = "PUNCTURE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "PUNCTURE_SEED")]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent).
    #[arg(long, global = true, env = "PUNCTURE_OUT")]
    out: Option<PathBuf>,
    /// Trial budget: sTTIs per point (pair), coherence windows (cell),
    /// blocks per K (loss-vs-k) or repetitions (bench).
    #[arg(long, global = true, env = "PUNCTURE_TRIALS")]
    trials: Option<u64>,
    /// SNR grid in dB (pair mode) or power grid in dBm (cell mode).
    #[arg(
        long,
        global = true,
        env = "PUNCTURE_POWER_GRID",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    power_grid: Option<Vec<f64>>,
    #[arg(long, global = true, env = "PUNCTURE_K_GRID", value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    /// Search windows K for the sweeps.
    #[arg(long, global = true, env = "PUNCTURE_WINDOWS")]
    windows: Option<usize>,
    /// urllc, srm, esrm or adaptive (cell only).
    #[arg(long, global = true, env = "PUNCTURE_MAPPER", value_delimiter = ',', value_parser = parse::<MapperPolicy>)]
    mapper: Option<Vec<MapperPolicy>>,
    /// Modulation pairs written n-m.
    #[arg(long, global = true, env = "PUNCTURE_PAIR", value_delimiter = ',', value_parser = parse::<Pair>)]
    pair: Option<Vec<Pair>>,
    #[arg(long, global = true, env = "PUNCTURE_LAMBDA", value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, global = true, env = "PUNCTURE_ZETA", value_delimiter = ',')]
    zeta: Option<Vec<usize>>,
    /// proposed or baseline.
    #[arg(long, global = true, env = "PUNCTURE_SCHEME", value_parser = parse::<Scheme>)]
    scheme: Option<Scheme>,
    /// pair or cell.
    #[arg(long, global = true, env = "PUNCTURE_MODE", value_parser = parse::<Mode>)]
    mode: Option<Mode>,
    /// Block SER targets for reliability.
    #[arg(long, global = true, env = "PUNCTURE_TARGETS", value_delimiter = ',')]
    targets: Option<Vec<f64>>,
    /// parallel or sequential.
    #[arg(long, global = true, env = "PUNCTURE_EXECUTION", value_parser = parse::<Execution>)]
    execution: Option<Execution>,
}

impl Flags {
    fn overrides(self) -> Overrides {
        Overrides {
            seed: self.seed,
            mode: self.mode,
            scheme: self.scheme,
            mapper: self.mapper,
            pairs: self.pair,
            lambda: self.lambda,
            zeta: self.zeta,
            windows: self.windows,
            k_grid: self.k_grid,
            power_grid: self.power_grid,
            trials: self.trials,
            targets: self.targets,
            execution: self.execution,
            out: self.out,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(cli.flags.overrides());
    let defaults = cli.command.defaults(cfg.mode);
    let cfg = cfg.resolve(defaults)?;
    let table = match cli.command {
        Command::LossVsK => commands::loss_vs_k(&cfg)?,
        Command::SerSweep => commands::ser_sweep(&cfg)?,
        Command::Reliability => commands::reliability(&cfg)?,
        Command::Urllc => commands::urllc(&cfg)?,
        Command::Bench => commands::bench(&cfg)?,
        Command::Validate => {
            let (table, failed) = validate::run(cfg.execution)?;
            output::write(&table, cli.command.name(), &cfg)?;
            return if failed > 0 {
                Err(CliError::Validation(failed))
            } else {
                Ok(())
            };
        }
    };
    output::write(&table, cli.command.name(), &cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("puncture: {e}");
            e.exit_code()
        }
    }
}
