use std::process::ExitCode;

use clap::Parser;
use explq_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(explq_cli::run(&cli))
}
