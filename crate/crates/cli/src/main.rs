use std::process::ExitCode;

use clap::Parser;
use kcontact_cli::{env_out, exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli, env_out());
    if let Err(e) = &result {
        eprintln!("kcontact: {e}");
    }
    ExitCode::from(exit_code(&result))
}
