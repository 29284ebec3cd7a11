use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(g2c_cli::run(g2c_cli::Cli::parse()))
}
