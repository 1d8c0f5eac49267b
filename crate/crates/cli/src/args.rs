use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ladderlab::{DressingSpec, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ladderlab", version, about = "Ladder-operator scenarios for non-self-adjoint Hamiltonians")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags override the matching scenario keys.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Base tolerance; checks scale it by the dressing's condition bound.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Space dimension, within [4, 512].
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Replaces the seed of a random dressing.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Adds a `generated_at` field (seconds since the Unix epoch).
    #[arg(long, global = true)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class, strong-class and power identities of the scenario's triple.
    Classify { scenario: PathBuf },
    /// Recursion energies against the eigensolver, plus the family checks.
    Spectrum { scenario: PathBuf },
    /// Bi-coherent states on a grid of z values.
    Bicoherent {
        scenario: PathBuf,
        /// `re` or `re,im`; repeatable. Replaces the scenario's grid.
        #[arg(long = "z", value_parser = parse_complex, allow_hyphen_values = true)]
        z: Vec<C64>,
        #[arg(long)]
        n_terms: Option<usize>,
    },
    /// Position/momentum oscillator built from a quon pair.
    QuonOsc {
        scenario: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha: Option<C64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Option<C64>,
    },
    /// Deformed generalized Heisenberg algebra from `f`.
    Dgha {
        scenario: Option<PathBuf>,
        /// Expression in `x`; replaces the scenario's `f`.
        #[arg(long)]
        f: Option<String>,
        /// `identity` or `random:<target_cond>` (seed from `--seed`, default 0).
        #[arg(long, value_parser = parse_dressing)]
        dressing: Option<DressingSpec>,
    },
    /// Two-mode Dirac Hamiltonian and its closed-form eigenvectors.
    Graphene {
        scenario: Option<PathBuf>,
        #[arg(long)]
        vf: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        ncut: Option<usize>,
    },
    /// Validates a matrix file and reports its spectrum.
    ImportMatrix { file: PathBuf },
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let z = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected `re` or `re,im`, got `{s}`")),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

pub fn parse_dressing(s: &str) -> Result<DressingSpec, String> {
    if s == "identity" {
        return Ok(DressingSpec::Identity);
    }
    match s.strip_prefix("random:") {
        Some(c) => {
            let target_cond = c.parse::<f64>().map_err(|e| format!("`{c}`: {e}"))?;
            Ok(DressingSpec::RandomSeeded { seed: 0, target_cond })
        }
        None => Err(format!("expected `identity` or `random:<target_cond>`, got `{s}`")),
    }
}
