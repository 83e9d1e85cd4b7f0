use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    mereo::run(mereo::Cli::parse())
}
