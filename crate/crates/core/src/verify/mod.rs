//! Independent checks of solver output: equation residuals, first-order
//! conditions, a method-of-lines PDE oracle and the admissibility bound.

mod admissibility;
mod aggregator;
mod foc;
mod oracle;
mod residual;

pub use admissibility::{admissibility_check, AdmissibilityReport};
pub use aggregator::aggregator_eval;
pub use foc::{foc_gradient_check, foc_random_checks, FocReport, FOC_TOL};
pub use oracle::{pde_oracle_finite_general, pde_oracle_finite_unit, OracleComparison, OracleMesh};
pub use residual::{
    default_nu_grid, exact_pde_residual, linearization_gap, reduced_pde_residual, PdeId, ResidualReport,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CaseTag, MarketParams, PreferenceParams};
use crate::solution::Solution;

/// Tolerance on the linearization gap at the expansion point.
pub const LINEARIZATION_TOL: f64 = 1e-10;

/// Default residual tolerance for a case.
pub fn default_residual_tol(case: CaseTag) -> f64 {
    match case {
        CaseTag::InfUnit | CaseTag::InfGeneral => 1e-10,
        CaseTag::LogUtility => 1e-10,
        CaseTag::FinUnit => 1e-8,
        CaseTag::FinGeneral => 1e-6,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub case: CaseTag,
    pub residual_tol: f64,
    pub residual: ResidualReport,
    /// Residual against the exact (not linearized) equation; general EIS only.
    pub exact_residual: Option<ResidualReport>,
    /// Exact minus linearized residual at `nu = theta`; general EIS only.
    pub linearization_gap_at_theta: Option<f64>,
    pub foc: Vec<FocReport>,
    pub admissibility: AdmissibilityReport,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Overrides [`default_residual_tol`].
    pub residual_tol: Option<f64>,
    pub foc_points: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            residual_tol: None,
            foc_points: 20,
            seed: 2024,
        }
    }
}

/// Residuals, first-order conditions and admissibility in one report.
/// For a case with log utility the tolerance of the matching unit case is used.
pub fn run_all(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let case = solution.case();
    let tol_case = match (case, solution) {
        (CaseTag::LogUtility, Solution::Finite(_)) => CaseTag::FinUnit,
        (c, _) => c,
    };
    let residual_tol = opts.residual_tol.unwrap_or(default_residual_tol(tol_case));
    let grid = default_nu_grid();
    let residual = reduced_pde_residual(solution, m, p, &grid)?;
    let exact_residual = exact_pde_residual(solution, m, p, &grid)?;
    let gap = case.is_general().then(|| linearization_gap(solution, m, p, m.theta));
    let foc = foc_random_checks(solution, m, p, opts.foc_points, opts.seed)?;
    let admissibility = admissibility_check(solution, m, p);

    let mut failures = Vec::new();
    if !(residual.max_rel <= residual_tol) {
        failures.push(format!(
            "reduced equation residual {:.3e} exceeds {:.1e}",
            residual.max_rel, residual_tol
        ));
    }
    if let Some(g) = gap {
        if !(g <= LINEARIZATION_TOL) {
            failures.push(format!(
                "linearization gap at theta {g:.3e} exceeds {LINEARIZATION_TOL:.0e}"
            ));
        }
    }
    let bad_foc = foc.iter().filter(|r| !r.passed).count();
    if bad_foc > 0 {
        failures.push(format!("{bad_foc} of {} first-order checks failed", foc.len()));
    }
    if !admissibility.weight_form_ok {
        failures.push(format!(
            "admissibility bound fails: {:.6} > {:.6}",
            admissibility.weight_form_lhs, admissibility.weight_form_rhs
        ));
    }
    Ok(VerifyReport {
        case,
        residual_tol,
        residual,
        exact_residual,
        linearization_gap_at_theta: gap,
        foc,
        admissibility,
        passed: failures.is_empty(),
        failures,
    })
}
