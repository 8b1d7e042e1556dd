//! Command-line driver: `omma run | synth | adversarial | regret | metrics`.

use std::io::IsTerminal;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod commands;
mod error;
mod settings;

use args::Cli;

/// Prints a one-line diagnostic to stderr.
fn report(message: &str) {
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal();
    let label = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
    let line = message.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("; ");
    eprintln!("omma: {label}: {line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            report("missing subcommand; see `omma --help`");
            return ExitCode::from(2);
        }
        Err(e) => {
            // Keep only clap's first line; the usage block is noise here.
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            report(first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
