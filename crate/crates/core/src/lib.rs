//! Optimal consumption and investment under Heston stochastic volatility
//! with Epstein-Zin recursive preferences.
//!
//! The crate covers four problem cases (infinite/finite horizon, unit/general
//! elasticity of intertemporal substitution), a symbolic check of which
//! exponential-polynomial value-function guesses can solve the reduced HJB
//! equations, and independent verification oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod error;
pub mod exact;
pub mod finite;
pub mod infinite;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod quadratic;
pub mod solution;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    classify_case, validate_market, validate_preferences, CaseTag, Horizon, MarketParams, PreferenceParams,
    PreferenceRegion, ValidationReport,
};
