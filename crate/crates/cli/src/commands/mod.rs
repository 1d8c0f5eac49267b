//! One function per subcommand. Each returns the report (passed or not) and
//! the settings that say where and how to write it.

mod ladder;
mod models;

use std::sync::Arc;

use ladderlab::DressedSpace;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::report::{Effective, Report};
use crate::scenario::{load, Check, Settings};

pub fn run(cli: &Cli) -> Result<(Report, Settings), CliError> {
    let g = &cli.global;
    let (mut report, settings) = match &cli.command {
        Command::Classify { scenario } => ladder::classify(&load(scenario)?, g)?,
        Command::Spectrum { scenario } => {
            let loaded = load(scenario)?;
            match models::graphene_spectrum(&loaded, g)? {
                Some(done) => done,
                None => ladder::spectrum(&loaded, g)?,
            }
        }
        Command::Bicoherent { scenario, z, n_terms } => ladder::bicoherent(&load(scenario)?, g, z, *n_terms)?,
        Command::QuonOsc { scenario, alpha, beta } => models::quon_osc(&load(scenario)?, g, *alpha, *beta)?,
        Command::Dgha { scenario, f, dressing } => {
            let loaded = scenario.as_deref().map(load).transpose()?;
            models::dgha(loaded.as_ref(), g, f.as_deref(), dressing.clone())?
        }
        Command::Graphene { scenario, vf, xi, ncut } => {
            let loaded = scenario.as_deref().map(load).transpose()?;
            models::graphene(loaded.as_ref(), g, *vf, *xi, *ncut)?
        }
        Command::ImportMatrix { file } => models::import_matrix(file, g)?,
    };
    if settings.timestamp {
        report.stamp();
    }
    Ok((report, settings))
}

fn effective(settings: &Settings, space: &Arc<DressedSpace>) -> Effective {
    Effective {
        tol: settings.tol,
        seed: settings.seed,
        dim: space.dim(),
        dressing: space.spec().clone(),
        cond_bound: space.cond_bound(),
    }
}

/// The requested suites, or `default` when none are listed. Suites the
/// command does not run are a configuration error.
fn suites(requested: &[Check], allowed: &[Check], default: &[Check], command: &str) -> Result<Vec<Check>, CliError> {
    if let Some(bad) = requested.iter().find(|c| !allowed.contains(c)) {
        return Err(CliError::config(format!("check {bad:?} is not available for `{command}`")));
    }
    Ok(if requested.is_empty() { default.to_vec() } else { requested.to_vec() })
}
