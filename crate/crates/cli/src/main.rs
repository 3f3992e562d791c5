use std::io;
use std::process::ExitCode;

use clap::Parser;

use entroscope_cli::{budget_from, run, Cli, BUDGET_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::var(BUDGET_ENV).ok();
    let result = budget_from(env.as_deref()).and_then(|budget| {
        let stdout = io::stdout();
        let stderr = io::stderr();
        run(cli, budget, &mut stdout.lock(), &mut stderr.lock())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
