//! Infinite-horizon solutions: closed form for unit EIS, log-linear fixed
//! point for general EIS.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CaseTag, MarketParams, PreferenceParams};
use crate::quadratic::QuadraticCoeffs;

/// Consumption rate, risky weight and the exposure `psi = pi * sqrt(nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub c_over_x: f64,
    pub pi: f64,
    pub psi: f64,
}

impl Strategy {
    pub(crate) fn new(c_over_x: f64, pi: f64, nu: f64) -> Self {
        Self {
            c_over_x,
            pi,
            psi: pi * nu.max(0.0).sqrt(),
        }
    }
}

/// `h(nu) = exp(A0 + A1 nu)` for the infinite-horizon cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSolution {
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    pub case: CaseTag,
    /// Coefficients of the quadratic the `A1` root was taken from.
    pub quadratic: QuadraticCoeffs,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLinearization {
    pub zeta1: f64,
    pub zeta2: f64,
    /// Log consumption-wealth ratio at the expansion point.
    pub mean_log_cw: f64,
    /// Variance level the expectation is evaluated at (default `theta`).
    pub expansion_nu: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Weight of the new iterate in the damped update.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Where the log consumption-wealth ratio is evaluated; `None` means the
    /// stationary mean `theta` of the variance process.
    pub expansion_nu: Option<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-12,
            max_iter: 500,
            expansion_nu: None,
        }
    }
}

/// `1 - gamma + rho^2 (1 - gamma)^2 / gamma`
pub fn risk_bracket(m: &MarketParams, p: &PreferenceParams) -> f64 {
    let omg = 1.0 - p.gamma;
    omg + m.rho * m.rho * omg * omg / p.gamma
}

/// `xi rho sigma (1 - gamma) / gamma`, the volatility-hedging cross term.
pub(crate) fn hedge_term(m: &MarketParams, p: &PreferenceParams) -> f64 {
    m.xi * m.rho * m.sigma * (1.0 - p.gamma) / p.gamma
}

/// Quadratic for `A1` in the unit-EIS case.
pub fn unit_quadratic(m: &MarketParams, p: &PreferenceParams) -> QuadraticCoeffs {
    QuadraticCoeffs::new(
        0.5 * m.sigma * m.sigma * risk_bracket(m, p),
        hedge_term(m, p) - p.beta - m.kappa,
        m.xi * m.xi / (2.0 * p.gamma),
    )
}

fn require_unit(p: &PreferenceParams) -> Result<()> {
    if !p.unit_eis() {
        return Err(Error::CaseMismatch {
            expected: CaseTag::InfUnit,
            found: CaseTag::InfGeneral,
        });
    }
    if !(p.gamma > 0.0 && p.beta > 0.0) {
        return Err(Error::InvalidPreferences("beta and gamma must be > 0".into()));
    }
    Ok(())
}

fn require_general(p: &PreferenceParams) -> Result<()> {
    if p.unit_eis() {
        return Err(Error::CaseMismatch {
            expected: CaseTag::InfGeneral,
            found: CaseTag::InfUnit,
        });
    }
    if p.unit_gamma() {
        return Err(Error::InvalidPreferences("general EIS requires gamma != 1".into()));
    }
    if p.region().is_none() {
        return Err(Error::InvalidPreferences(format!(
            "(gamma, phi) = ({}, {}) outside the admissible regions",
            p.gamma, p.phi
        )));
    }
    Ok(())
}

/// Unit EIS (`phi = 1`): `A1` is the nonnegative root of the quadratic,
/// `A0 = ln(beta) - 1 + (r + kappa theta A1) / beta`. With `gamma = 1` the
/// quadratic is linear and `A1 = xi^2 / (2 (beta + kappa))`.
pub fn solve_unit_eis(m: &MarketParams, p: &PreferenceParams) -> Result<AffineSolution> {
    require_unit(p)?;
    let quadratic = unit_quadratic(m, p);
    let a1 = quadratic.smallest_nonnegative_root()?;
    let mut notes = Vec::new();
    if a1 == 0.0 {
        notes.push("A1 = 0 root selected (zero market price of risk)".into());
    }
    let a0 = p.beta.ln() - 1.0 + (m.r + m.kappa * m.theta * a1) / p.beta;
    let case = if p.unit_gamma() {
        CaseTag::LogUtility
    } else {
        CaseTag::InfUnit
    };
    Ok(AffineSolution {
        a0,
        a1,
        case,
        quadratic,
        notes,
    })
}

struct GeneralStep {
    a0: f64,
    a1: f64,
    zeta1: f64,
    quadratic: QuadraticCoeffs,
}

/// Solves the linearized equations for fixed `zeta2`, with
/// `zeta1 = zeta2 (1 - ln zeta2)`.
fn general_step(m: &MarketParams, p: &PreferenceParams, zeta2: f64) -> Result<GeneralStep> {
    let s = 1.0 - p.phi;
    let quadratic = QuadraticCoeffs::new(
        0.5 * m.sigma * m.sigma * risk_bracket(m, p) / (s * s),
        (zeta2 + m.kappa - hedge_term(m, p)) / s,
        m.xi * m.xi / (2.0 * p.gamma),
    );
    let roots = quadratic.roots()?;
    let a1 = roots
        .iter()
        .copied()
        .filter(|r| -r / s >= 0.0)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or(Error::NoAdmissibleRoot { roots: roots.clone() })?;
    let zeta1 = zeta2 * (1.0 - zeta2.ln());
    let a0 = p.phi * p.beta.ln() + (m.r * (p.phi - 1.0) + zeta1 - p.beta * p.phi + m.kappa * m.theta * a1) / zeta2;
    Ok(GeneralStep {
        a0,
        a1,
        zeta1,
        quadratic,
    })
}

/// General EIS (`phi != 1`): damped fixed point on `zeta2` so that the
/// linearization point is the log consumption-wealth ratio it produces.
pub fn solve_general_eis(
    m: &MarketParams,
    p: &PreferenceParams,
    opts: &FixedPointOptions,
) -> Result<(AffineSolution, LogLinearization)> {
    require_general(p)?;
    let nu_bar = opts.expansion_nu.unwrap_or(m.theta);
    let ln_beta_phi = p.phi * p.beta.ln();
    let map = |zeta2: f64| -> Result<(GeneralStep, f64)> {
        let step = general_step(m, p, zeta2)?;
        let mean = ln_beta_phi - step.a0 - step.a1 * nu_bar;
        Ok((step, mean))
    };

    let mut zeta2 = p.beta.powf(p.phi);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        let (_, mean) = map(zeta2)?;
        let update = mean.exp();
        residual = (update - zeta2).abs();
        if !residual.is_finite() {
            return Err(Error::NonConvergence { iterations, residual });
        }
        if residual <= opts.tol {
            break;
        }
        zeta2 = (1.0 - opts.damping) * zeta2 + opts.damping * update;
        iterations += 1;
    }
    if residual > opts.tol {
        return Err(Error::NonConvergence { iterations, residual });
    }
    let (step, mean) = map(zeta2)?;
    let lin = LogLinearization {
        zeta1: step.zeta1,
        zeta2,
        mean_log_cw: mean,
        expansion_nu: nu_bar,
        iterations,
        final_residual: residual,
    };
    let mut notes = vec![format!(
        "expectation of the log consumption-wealth ratio evaluated at nu = {nu_bar}"
    )];
    if step.a1 == 0.0 {
        notes.push("A1 = 0 root selected (zero market price of risk)".into());
    }
    let sol = AffineSolution {
        a0: step.a0,
        a1: step.a1,
        case: CaseTag::InfGeneral,
        quadratic: step.quadratic,
        notes,
    };
    Ok((sol, lin))
}

/// Optimal strategy at variance `nu`; `pi` does not depend on `nu`.
pub fn strategy_infinite(s: &AffineSolution, m: &MarketParams, p: &PreferenceParams, nu: f64) -> Strategy {
    match s.case {
        CaseTag::InfGeneral => {
            let c = p.beta.powf(p.phi) * (-s.a0 - s.a1 * nu).exp();
            let pi = m.xi / p.gamma - m.rho * m.sigma * (1.0 - p.gamma) * (s.a1 / (1.0 - p.phi)) / p.gamma;
            Strategy::new(c, pi, nu)
        }
        _ => {
            let pi = m.xi / p.gamma + m.rho * m.sigma * (1.0 - p.gamma) * s.a1 / p.gamma;
            Strategy::new(p.beta, pi, nu)
        }
    }
}

/// Value function at wealth `x` and variance `nu`.
pub fn value_function_infinite(s: &AffineSolution, p: &PreferenceParams, x: f64, nu: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("wealth must be > 0 (got {x})")));
    }
    let g = p.gamma;
    let lin = s.a0 + s.a1 * nu;
    Ok(match s.case {
        CaseTag::LogUtility => x.ln() + lin,
        CaseTag::InfGeneral => x.powf(1.0 - g) / (1.0 - g) * (-(1.0 - g) / (1.0 - p.phi) * lin).exp(),
        _ => x.powf(1.0 - g) / (1.0 - g) * ((1.0 - g) * lin).exp(),
    })
}
