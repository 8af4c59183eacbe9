//! Error type shared across the crate.

use std::fmt;

/// Errors surfaced by the core routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or configuration value failed validation.
    InvalidParameter(String),
    /// Two sequences that must agree in length do not.
    LengthMismatch { expected: usize, got: usize },
    /// On-grid placement requires more beamspace cells than exist.
    ImpossiblePlacement { paths: usize, cells: usize },
    /// Beam selection found no admissible subset among the candidates.
    CandidateStarvation { needed: usize, available: usize },
    /// The communication MSE budget cannot be met even with zero sensing power.
    InfeasibleMseBudget { residual: f64, budget: f64 },
    /// A dense linear solve hit a numerically singular matrix.
    SingularMatrix,
    /// The alternating optimizer observed an increasing objective.
    NonMonotoneObjective {
        iteration: usize,
        previous: f64,
        current: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::ImpossiblePlacement { paths, cells } => write!(
                f,
                "cannot place {paths} paths on {cells} distinct beamspace cells"
            ),
            Error::CandidateStarvation { needed, available } => write!(
                f,
                "no admissible beam subset: need {needed} pairs with distinct \
                 indices among {available} candidates"
            ),
            Error::InfeasibleMseBudget { residual, budget } => write!(
                f,
                "communication MSE budget infeasible: residual {residual} exceeds budget {budget}"
            ),
            Error::SingularMatrix => write!(f, "singular matrix"),
            Error::NonMonotoneObjective {
                iteration,
                previous,
                current,
            } => write!(
                f,
                "objective increased at iteration {iteration}: {previous} -> {current}"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
