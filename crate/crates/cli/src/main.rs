//! `ladderlab`: scenario-driven checks of ladder-operator identities.
//!
//! Exit codes: 0 every requested identity holds, 1 at least one fails (the
//! report is still written), 2 configuration error, 3 numerical failure.

mod args;
mod commands;
mod error;
mod report;
mod scenario;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::error::{EXIT_FAIL, EXIT_PASS};

fn main() -> ExitCode {
    // Usage errors exit with clap's code 2, which is also the config-error code.
    let cli = Cli::parse();
    let outcome = commands::run(&cli).and_then(|(report, settings)| {
        report.emit(settings.format, settings.out.as_deref())?;
        Ok(report.passed)
    });
    match outcome {
        Ok(passed) => ExitCode::from(if passed { EXIT_PASS } else { EXIT_FAIL }),
        Err(e) => {
            eprintln!("ladderlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
