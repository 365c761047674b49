//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Unified error type for all inference operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid distribution or configuration parameter at construction.
    Parameter(String),
    /// Argument outside the mathematical domain of the operation.
    Domain(String),
    /// A quantity degenerated (zero variance, all mass underflowed, ...).
    Degenerate(String),
    /// Probability-calculus preconditions violated.
    Consistency(String),
    /// An operation that needs data received none.
    EmptyData,
    /// Posterior is improper for the given data (e.g. n < 2 with a flat joint prior).
    ImproperPosterior(String),
    /// Sampler could not find a finite-density starting point.
    Init(String),
    /// Gibbs sampling requested but a coordinate has no full conditional.
    MissingConditional(usize),
    /// A column that must be standardised has zero variance; carries the column name.
    ZeroVariance(String),
    /// Disallowed model specification (likelihood/link pairing etc.).
    Spec(String),
    /// Dimension mismatch between related objects.
    Dimension(String),
    /// Standardisation metadata does not match the parameter vector.
    MetaMismatch(String),
    /// Absolute continuity fails: q has zero mass where p has support.
    Support(String),
    /// Max-entropy dual optimisation diverged; constraints likely infeasible.
    Infeasible(String),
    /// Iterative solver exhausted its budget before reaching tolerance.
    Tolerance(String),
    /// Referenced act does not exist in the decision matrix.
    UnknownAct(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(m) => write!(f, "parameter error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Degenerate(m) => write!(f, "degenerate input: {m}"),
            Error::Consistency(m) => write!(f, "consistency error: {m}"),
            Error::EmptyData => write!(f, "empty data"),
            Error::ImproperPosterior(m) => write!(f, "improper posterior: {m}"),
            Error::Init(m) => write!(f, "initialisation error: {m}"),
            Error::MissingConditional(i) => {
                write!(f, "no full conditional for coordinate {i}")
            }
            Error::ZeroVariance(col) => write!(f, "zero variance in column '{col}'"),
            Error::Spec(m) => write!(f, "model specification error: {m}"),
            Error::Dimension(m) => write!(f, "dimension mismatch: {m}"),
            Error::MetaMismatch(m) => write!(f, "standardisation metadata mismatch: {m}"),
            Error::Support(m) => write!(f, "support error: {m}"),
            Error::Infeasible(m) => write!(f, "infeasible constraints: {m}"),
            Error::Tolerance(m) => write!(f, "tolerance not reached: {m}"),
            Error::UnknownAct(a) => write!(f, "unknown act '{a}'"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
