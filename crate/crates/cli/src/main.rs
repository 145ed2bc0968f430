//! `reflector-sim`: synthesize corridor RSS grids and run the coverage,
//! back-off, outage, scheduling and LiDAR experiments from the command
//! line, emitting plot-ready CSV or JSON plus a run manifest.

mod args;
mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    std::process::exit(0);
                }
                ErrorKind::InvalidSubcommand | ErrorKind::UnknownArgument => {
                    eprintln!("error: {}", first_line(&err));
                    std::process::exit(2);
                }
                _ => {
                    // Missing or malformed flag values.
                    eprintln!("error: {}", first_line(&err));
                    std::process::exit(3);
                }
            }
        }
    };
    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn first_line(err: &clap::Error) -> String {
    err.to_string()
        .lines()
        .next()
        .unwrap_or("invalid arguments")
        .trim_start_matches("error: ")
        .to_string()
}
