use thiserror::Error;

use crate::model::{CaseTag, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(ValidationReport),

    #[error("invalid preferences: {0}")]
    InvalidPreferences(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("case mismatch: solver for {expected} cannot handle instance classified as {found}")]
    CaseMismatch { expected: CaseTag, found: CaseTag },

    #[error("quadratic has no real root (discriminant {discriminant:e})")]
    NoRealRoot { discriminant: f64 },

    #[error("no admissible root among {roots:?}")]
    NoAdmissibleRoot { roots: Vec<f64> },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Riccati discriminant a2^2 - a1*a3 = {value:e} is negative")]
    ComplexA4 { value: f64 },

    #[error("integration step rejected at tau = {tau}: state left the finite range")]
    StepRejected { tau: f64 },

    #[error("sign hypothesis violated: {0}")]
    SignHypothesis(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("method-of-lines oracle became unstable at tau = {tau} (h <= 0 or non-finite)")]
    InstabilityDetected { tau: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("at gamma = {gamma}: {source}")]
    AtGamma { gamma: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short name of the variant, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "Validation",
            Error::InvalidPreferences(_) => "InvalidPreferences",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(_) => "Parse",
            Error::CaseMismatch { .. } => "CaseMismatch",
            Error::NoRealRoot { .. } => "NoRealRoot",
            Error::NoAdmissibleRoot { .. } => "NoAdmissibleRoot",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::ComplexA4 { .. } => "ComplexA4",
            Error::StepRejected { .. } => "StepRejected",
            Error::SignHypothesis(_) => "SignHypothesis",
            Error::Domain(_) => "DomainError",
            Error::InstabilityDetected { .. } => "InstabilityDetected",
            Error::GridMismatch(_) => "GridMismatch",
            Error::AtGamma { source, .. } => source.kind(),
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
