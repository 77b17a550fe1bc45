//! Library side of the `pairchain` command: argument definitions, config
//! file schema, result tables and the subcommands.

pub mod commands;
pub mod config;
pub mod figures;
pub mod fit;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pairchain", version, about = "Photon-pair source chain model: predict, simulate, sweep, fit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Experiment configuration (JSON).
    pub config: Option<PathBuf>,
    /// Built-in scenario instead of a config file (see `pairchain preset`).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Number of pump pulses.
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub pulses: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Disable detector dead time.
    #[arg(long)]
    pub no_dead_time: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analytic rates and CAR for one configuration.
    Predict {
        #[command(flatten)]
        input: Input,
        /// Write the CSV table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo photon counting.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one parameter over a grid.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        var: SweepVar,
        /// `lin:START:STOP:N`, `log:START:STOP:N` or a comma-separated list,
        /// in the variable's unit (cm, mW, dB or Hz).
        #[arg(long)]
        grid: String,
        /// Add Monte Carlo counts at every grid point.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        mc_args: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares fit of a rate dataset.
    Fit(fit::FitArgs),
    /// Plot-ready data for a figure of the reference measurements.
    Reproduce {
        #[arg(long, value_enum)]
        figure: figures::Figure,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in scenario as a config file, or list them.
    Preset { name: Option<String> },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Nonlinear waveguide length (cm).
    #[value(name = "l_si")]
    LSi,
    /// Passive waveguide length (cm).
    #[value(name = "l_siox")]
    LSiox,
    /// Pump peak power (mW).
    Pp,
    /// AWG insertion loss (dB).
    #[value(name = "awg_loss")]
    AwgLoss,
    /// Dark count rate of both detectors (Hz).
    Dark,
}

/// Marks failures that should exit with the numerical status.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct NumericalFailure(pub String);

pub fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<NumericalFailure>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<pairchain::Error>() {
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        }
        if let Some(config::ConfigError::Model(e)) = cause.downcast_ref::<config::ConfigError>() {
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        }
    }
    EXIT_USAGE
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Predict { input, out } => commands::predict(&input, out.as_deref()),
        Command::Simulate { input, mc, out } => commands::simulate(&input, &mc, out.as_deref()),
        Command::Sweep { input, var, grid, mc, mc_args, out } => {
            commands::sweep(&input, var, &grid, mc.then_some(&mc_args), out.as_deref())
        }
        Command::Fit(args) => fit::run(&args),
        Command::Reproduce { figure, out } => figures::run(figure, out.as_deref()),
        Command::Preset { name } => commands::preset(name.as_deref()),
    }
}
