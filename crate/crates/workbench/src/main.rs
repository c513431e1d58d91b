use std::process::ExitCode;

use clap::Parser;
use mrweb_workbench::cli::{run, Cli};

fn main() -> ExitCode {
    // Usage errors exit with 2 from inside clap.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
