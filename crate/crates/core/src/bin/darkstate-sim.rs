use std::process::ExitCode;

use clap::Parser;
use darkstate::cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(output) => {
            if let Some(summary) = output.summary {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("darkstate-sim: error: {e}");
            ExitCode::FAILURE
        }
    }
}
