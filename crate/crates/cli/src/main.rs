//! `dispersive`: evolve data, run scaling sweeps, check diagnostics and print
//! exponent tables.

mod config;
mod diagnostics;
mod evolve;
mod exponents;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use config::{CliError, Layer, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "dispersive", version, about = "Fractional Schrodinger propagator laboratory", args_override_self = true)]
struct Cli {
    /// JSON object of parameters; keys are flag names in snake_case.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a built-in datum and dump the frames.
    Evolve(evolve::EvolveArgs),
    /// Measure a norm ratio across lambda and fit its log-log slope.
    Sweep(sweep::SweepArgs),
    /// Run numerical self-checks against fixed thresholds.
    Diagnostics(diagnostics::DiagnosticsArgs),
    /// Print the critical exponents for given alpha, d, p.
    Exponents(exponents::ExponentsArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Evolve(_) => "evolve",
            Command::Sweep(_) => "sweep",
            Command::Diagnostics(_) => "diagnostics",
            Command::Exponents(_) => "exponents",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let name = cli.command.name();
    let result = Layer::load(cli.config.as_deref()).and_then(|layer| match cli.command {
        Command::Evolve(a) => evolve::run(a, layer),
        Command::Sweep(a) => sweep::run(a, layer),
        Command::Diagnostics(a) => diagnostics::run(a, layer),
        Command::Exponents(a) => exponents::run(a, layer),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError { code, message, usage }) => {
            eprintln!("error: {message}");
            if usage {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("{}", sub.render_usage());
                }
            }
            ExitCode::from(code as u8)
        }
    }
}
