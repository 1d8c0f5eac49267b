//! Failures that end a run without a verdict. A failed identity is not an
//! error: it produces a report and exit code 1.

use std::fmt;

use ladderlab::{BicoherentError, DghaError, EigError, GrapheneError, LadderError, QuonError, SpaceError};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad scenario, flags, files or model parameters.
    Config(String),
    /// The computation itself broke down.
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        CliError::Numerical(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::InverseCheck { .. } | SpaceError::SpaceMismatch | SpaceError::WindowTooLarge { .. } => {
                CliError::numerical(e)
            }
            _ => CliError::config(e),
        }
    }
}

impl From<EigError> for CliError {
    fn from(e: EigError) -> Self {
        CliError::numerical(e)
    }
}

impl From<LadderError> for CliError {
    fn from(e: LadderError) -> Self {
        match e {
            LadderError::Space(s) => s.into(),
            LadderError::NMaxTooLarge { .. } => CliError::config(e),
            _ => CliError::numerical(e),
        }
    }
}

impl From<BicoherentError> for CliError {
    fn from(e: BicoherentError) -> Self {
        match e {
            BicoherentError::Ladder(l) => l.into(),
            BicoherentError::TooManyTerms { .. } | BicoherentError::TooFewNorms(_) => CliError::config(e),
            _ => CliError::numerical(e),
        }
    }
}

impl From<QuonError> for CliError {
    fn from(e: QuonError) -> Self {
        match e {
            QuonError::Space(s) => s.into(),
            _ => CliError::config(e),
        }
    }
}

impl From<DghaError> for CliError {
    fn from(e: DghaError) -> Self {
        match e {
            DghaError::Space(s) => s.into(),
            DghaError::DimMismatch { .. } | DghaError::NotSpectral(_) => CliError::numerical(e),
            _ => CliError::config(e),
        }
    }
}

impl From<GrapheneError> for CliError {
    fn from(e: GrapheneError) -> Self {
        match e {
            GrapheneError::Space(s) => s.into(),
            GrapheneError::Eig(e) => e.into(),
            _ => CliError::config(e),
        }
    }
}
