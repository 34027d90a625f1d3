//! `mlfv`: solve, analyse and verify multilayer diffusion problems described
//! by a JSON config.

mod commands;
mod config;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Preset, Run};

#[derive(Parser)]
#[command(name = "mlfv", version, about = "Finite volume solver for multilayer diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// March to `t_end`, writing a profile per snapshot and run metadata.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Run forward Euler even when the step exceeds the predicted limit.
        #[arg(long)]
        allow_unstable: bool,
    },
    /// Write the steady-state profile.
    Steady {
        #[command(flatten)]
        io: Io,
    },
    /// Report the forward Euler step limits and spectral radii.
    Stability {
        #[command(flatten)]
        io: Io,
    },
    /// Grid convergence study against a fine-grid reference.
    Convergence {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "paper")]
        preset: Preset,
        #[arg(long)]
        allow_unstable: bool,
    },
}

fn entry(cli: Cli) -> Result<(), CliError> {
    let load = |io: Io| Run::load(&io.config, io.out);
    let files = match cli.command {
        Command::Solve { io, allow_unstable } => commands::solve(&load(io)?, allow_unstable)?,
        Command::Steady { io } => commands::steady(&load(io)?)?,
        Command::Stability { io } => {
            let (files, text) = commands::stability(&load(io)?)?;
            print!("{text}");
            files
        }
        Command::Convergence { io, preset, allow_unstable } => {
            let (files, text) = commands::convergence(&load(io)?, preset, allow_unstable)?;
            print!("{text}");
            files
        }
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match entry(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
