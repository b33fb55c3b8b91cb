mod args;
mod commands;
mod error;
mod svg;

use std::process::ExitCode;

use clap::Parser;
use replic::presets::PresetKind;

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    match cli.command {
        Command::Combine { p, gamma, method } => Ok(vec![commands::combine(&p, gamma, &method)?]),
        Command::CombineE { e, gamma, rule } => Ok(vec![commands::combine_e(&e, gamma, &rule)?]),
        Command::Power(a) => commands::experiment(PresetKind::Power, &a),
        Command::NullEcdf(a) => commands::experiment(PresetKind::NullEcdf, &a),
        Command::EcdfCurve(a) => commands::experiment(PresetKind::EcdfCurve, &a),
        Command::GammaSweep(a) => commands::experiment(PresetKind::GammaSweep, &a),
        Command::Patterns { conservative, out } => commands::patterns(conservative, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for line in lines {
                if line.ends_with('\n') {
                    print!("{line}");
                } else {
                    println!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
