//! Case dispatch over the four solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{
    solve_general_eis_finite, solve_unit_eis_finite, strategy_finite, value_function_finite, CoefficientPath, TimeGrid,
};
use crate::infinite::{
    solve_general_eis, solve_unit_eis, strategy_infinite, value_function_infinite, AffineSolution, FixedPointOptions,
    LogLinearization, Strategy,
};
use crate::model::{classify_case, CaseTag, Horizon, MarketParams, PreferenceParams};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveOptions {
    pub fixed_point: FixedPointOptions,
    /// Time steps for finite horizons; `None` uses [`TimeGrid::default_for`].
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "horizon", rename_all = "lowercase")]
pub enum Solution {
    Infinite {
        solution: AffineSolution,
        linearization: Option<LogLinearization>,
    },
    Finite(CoefficientPath),
}

impl Solution {
    pub fn case(&self) -> CaseTag {
        match self {
            Solution::Infinite { solution, .. } => solution.case,
            Solution::Finite(path) => path.case,
        }
    }

    /// Strategy at calendar time `t` (ignored for infinite horizon).
    pub fn strategy(&self, m: &MarketParams, p: &PreferenceParams, t: f64, nu: f64) -> Result<Strategy> {
        match self {
            Solution::Infinite { solution, .. } => Ok(strategy_infinite(solution, m, p, nu)),
            Solution::Finite(path) => strategy_finite(path, t, m, p, nu),
        }
    }

    pub fn value(&self, p: &PreferenceParams, t: f64, x: f64, nu: f64) -> Result<f64> {
        match self {
            Solution::Infinite { solution, .. } => value_function_infinite(solution, p, x, nu),
            Solution::Finite(path) => value_function_finite(path, t, p, x, nu),
        }
    }

    pub fn as_path(&self) -> Option<&CoefficientPath> {
        match self {
            Solution::Finite(path) => Some(path),
            _ => None,
        }
    }

    pub fn as_affine(&self) -> Option<&AffineSolution> {
        match self {
            Solution::Infinite { solution, .. } => Some(solution),
            _ => None,
        }
    }
}

/// Whether an explicitly requested case accepts an instance classified as `found`.
fn accepts(requested: CaseTag, found: CaseTag, horizon: Horizon) -> bool {
    requested == found
        || (found == CaseTag::LogUtility
            && matches!(
                (requested, horizon),
                (CaseTag::InfUnit, Horizon::Infinite) | (CaseTag::FinUnit, Horizon::Finite(_))
            ))
}

/// Validates, classifies and solves. An explicit `requested` case must agree
/// with the classification (log utility is accepted by the unit-EIS case of
/// the same horizon).
pub fn solve(
    m: &MarketParams,
    p: &PreferenceParams,
    requested: Option<CaseTag>,
    opts: &SolveOptions,
) -> Result<Solution> {
    let found = classify_case(m, p)?;
    if let Some(req) = requested {
        if !accepts(req, found, p.horizon) {
            return Err(Error::CaseMismatch { expected: req, found });
        }
    }
    let grid = |t: f64| match opts.n_steps {
        Some(n) => TimeGrid::new(t, n),
        None => TimeGrid::default_for(t),
    };
    match (found, p.horizon) {
        (CaseTag::InfGeneral, _) => {
            let (solution, lin) = solve_general_eis(m, p, &opts.fixed_point)?;
            Ok(Solution::Infinite {
                solution,
                linearization: Some(lin),
            })
        }
        (_, Horizon::Infinite) => Ok(Solution::Infinite {
            solution: solve_unit_eis(m, p)?,
            linearization: None,
        }),
        (CaseTag::FinGeneral, Horizon::Finite(t)) => Ok(Solution::Finite(solve_general_eis_finite(m, p, &grid(t)?)?)),
        (_, Horizon::Finite(t)) => Ok(Solution::Finite(solve_unit_eis_finite(m, p, &grid(t)?)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatches_each_case() {
        let m = MarketParams::reference();
        let base = PreferenceParams::reference();
        let opts = SolveOptions::default();
        let fin = Horizon::Finite(10.0);
        let cases = [
            (base.with_phi(1.0), CaseTag::InfUnit),
            (base, CaseTag::InfGeneral),
            (base.with_phi(1.0).with_horizon(fin), CaseTag::FinUnit),
            (base.with_horizon(fin), CaseTag::FinGeneral),
            (base.with_phi(1.0).with_gamma(1.0), CaseTag::LogUtility),
        ];
        for (p, tag) in cases {
            assert_eq!(solve(&m, &p, None, &opts).unwrap().case(), tag);
        }
    }

    #[test]
    fn explicit_case_must_match() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference();
        let err = solve(&m, &p, Some(CaseTag::InfUnit), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CaseMismatch { .. }));
        let log = p.with_phi(1.0).with_gamma(1.0);
        assert!(solve(&m, &log, Some(CaseTag::InfUnit), &SolveOptions::default()).is_ok());
        assert!(solve(&m, &log, Some(CaseTag::FinUnit), &SolveOptions::default()).is_err());
    }
}
