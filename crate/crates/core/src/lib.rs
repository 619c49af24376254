//! Turaev-Viro invariants of closed 3-manifolds, by triangulation state sums and by
//! Hansen's formula for Seifert fiber spaces, with Hempel pair reports.

pub mod cli;
pub mod complex3;
pub mod cyclo;
pub mod hempel;
pub mod modp;
pub mod seifert;
pub mod statesum;
pub mod verify;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("level r={0} must be at least 3")]
    LevelTooSmall(i64),
    #[error("{what} argument {value} out of range for r={r}")]
    OutOfRange { what: &'static str, value: i64, r: u32 },
    #[error("s={s} is not coprime to r={r}")]
    NotCoprime { s: i64, r: i64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid triangulation: {0}")]
    Triangulation(String),
    #[error("inadmissible coloring: {0}")]
    Inadmissible(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LevelTooSmall(_) => "level_too_small",
            Error::OutOfRange { .. } => "out_of_range",
            Error::NotCoprime { .. } => "not_coprime",
            Error::Parse(_) => "parse",
            Error::Triangulation(_) => "triangulation",
            Error::Inadmissible(_) => "inadmissible",
            Error::Hypothesis(_) => "hypothesis",
            Error::Io(_) => "io",
        }
    }
}
