//! Residuals of the reduced PDEs evaluated at solver outputs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finite::CoefficientPath;
use crate::infinite::LogLinearization;
use crate::model::{CaseTag, MarketParams, PreferenceParams};
use crate::numerics::{derivative_4th, derivative_6th, linspace};
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdeId {
    /// Unit EIS, infinite horizon (also log utility).
    UnitInfinite,
    /// General EIS, infinite horizon, consumption term linearized.
    GeneralInfiniteLinearized,
    /// General EIS, infinite horizon, exact consumption term.
    GeneralInfiniteExact,
    UnitFinite,
    GeneralFiniteLinearized,
    GeneralFiniteExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub pde_id: PdeId,
    pub grid: Vec<f64>,
    /// Per variance node; for finite horizons the value of largest relative
    /// size over all `tau` nodes.
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Largest `|residual| / max |term|` over the mesh.
    pub max_rel: f64,
    /// Number of `tau` nodes checked (1 for infinite horizon).
    pub tau_nodes: usize,
}

/// `nu` in `[0.001, 0.1]`, 21 nodes.
pub fn default_nu_grid() -> Vec<f64> {
    linspace(0.001, 0.1, 20)
}

/// How the consumption term `beta^phi / h` is represented.
#[derive(Debug, Clone, Copy)]
enum Consumption {
    Linear { za: f64, zb: f64 },
    Exact,
}

/// Terms of the reduced equation (divided by `h`) for `h = exp(a0 + a1 nu)`.
/// `da0`, `da1` are derivatives in time to horizon (zero for infinite horizon).
#[allow(clippy::too_many_arguments)]
fn terms(
    m: &MarketParams,
    p: &PreferenceParams,
    general: bool,
    cons: Consumption,
    a0: f64,
    a1: f64,
    da0: f64,
    da1: f64,
    nu: f64,
) -> [f64; 8] {
    let (g, rho) = (p.gamma, m.rho);
    let eta = m.eta(nu);
    let m2 = m.m2(nu);
    let m2_sq = m2 * m2;
    let cross = m.m1(nu) + eta / g * rho * m2 * (1.0 - g);
    let ln_h = a0 + a1 * nu;
    let hv = a1;
    let hvv = a1 * a1;
    let dt = da0 + da1 * nu;
    if !general {
        return [
            -dt,
            m.r - p.beta,
            eta * eta / (2.0 * g),
            p.beta * (p.beta.ln() - ln_h),
            cross * hv,
            0.5 * m2_sq * (rho * rho * (1.0 - g).powi(2) / g - g) * hv * hv,
            0.5 * m2_sq * hvv,
            0.0,
        ];
    }
    let phi = p.phi;
    let s = 1.0 - phi;
    let cons_term = match cons {
        Consumption::Linear { za, zb } => za + zb * (phi * p.beta.ln() - ln_h),
        Consumption::Exact => p.beta.powf(phi) * (-ln_h).exp(),
    };
    let wide = 2.0 - phi - g + rho * rho * (1.0 - g).powi(2) / g;
    [
        dt / s,
        m.r,
        -cons_term,
        eta * eta / (2.0 * g),
        p.beta * phi / (phi - 1.0) * (cons_term / p.beta - 1.0),
        -cross * hv / s,
        m2_sq * wide * hv * hv / (2.0 * s * s),
        -m2_sq * hvv / (2.0 * s),
    ]
}

fn rel(t: &[f64; 8]) -> (f64, f64) {
    let sum: f64 = t.iter().sum();
    let scale = t.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (sum, if scale > 0.0 { sum.abs() / scale } else { sum.abs() })
}

/// Time derivatives of a path at its nodes. Unit EIS: exact `A1'` from the
/// closed form and sixth-order differences of `A0`. General EIS: fourth-order
/// differences of both.
fn path_derivatives(path: &CoefficientPath) -> (Vec<f64>, Vec<f64>) {
    let h = path.grid.step();
    let da0 = if path.is_general() || path.a0.len() < 7 {
        derivative_4th(&path.a0, h)
    } else {
        derivative_6th(&path.a0, h)
    };
    let da1 = match (&path.riccati, path.is_general()) {
        (Some(ric), false) => path.tau.iter().map(|&t| ric.closed_form_derivative(t)).collect(),
        _ => derivative_4th(&path.a1, h),
    };
    (da0, da1)
}

fn evaluate<F>(pde_id: PdeId, nu_grid: &[f64], tau_nodes: usize, mut at: F) -> ResidualReport
where
    F: FnMut(usize, f64) -> [f64; 8],
{
    let mut residuals = Vec::with_capacity(nu_grid.len());
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for &nu in nu_grid {
        let mut worst = (0.0, -1.0);
        for k in 0..tau_nodes {
            let (r, q) = rel(&at(k, nu));
            max_abs = max_abs.max(r.abs());
            if q > worst.1 {
                worst = (r, q);
            }
        }
        max_rel = max_rel.max(worst.1);
        residuals.push(worst.0);
    }
    ResidualReport {
        pde_id,
        grid: nu_grid.to_vec(),
        residuals,
        max_abs,
        max_rel,
        tau_nodes,
    }
}

fn infinite_linear(lin: &Option<LogLinearization>) -> Consumption {
    match lin {
        Some(l) => Consumption::Linear {
            za: l.zeta1,
            zb: l.zeta2,
        },
        None => Consumption::Exact,
    }
}

fn residual_with(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    nu_grid: &[f64],
    exact: bool,
) -> ResidualReport {
    match solution {
        Solution::Infinite {
            solution: s,
            linearization,
        } => {
            let general = s.case == CaseTag::InfGeneral;
            let cons = if exact {
                Consumption::Exact
            } else {
                infinite_linear(linearization)
            };
            let id = match (general, exact) {
                (false, _) => PdeId::UnitInfinite,
                (true, false) => PdeId::GeneralInfiniteLinearized,
                (true, true) => PdeId::GeneralInfiniteExact,
            };
            evaluate(id, nu_grid, 1, |_, nu| {
                terms(m, p, general, cons, s.a0, s.a1, 0.0, 0.0, nu)
            })
        }
        Solution::Finite(path) => {
            let general = path.is_general();
            let (da0, da1) = path_derivatives(path);
            let id = match (general, exact) {
                (false, _) => PdeId::UnitFinite,
                (true, false) => PdeId::GeneralFiniteLinearized,
                (true, true) => PdeId::GeneralFiniteExact,
            };
            evaluate(id, nu_grid, path.tau.len(), |k, nu| {
                let cons = match (&path.zeta3, &path.zeta4, exact) {
                    (Some(z3), Some(z4), false) => Consumption::Linear { za: z3[k], zb: z4[k] },
                    _ => Consumption::Exact,
                };
                terms(m, p, general, cons, path.a0[k], path.a1[k], da0[k], da1[k], nu)
            })
        }
    }
}

/// Residual of the equation the solver targets (linearized for general EIS).
pub fn reduced_pde_residual(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    nu_grid: &[f64],
) -> Result<ResidualReport> {
    Ok(residual_with(solution, m, p, nu_grid, false))
}

/// Residual of the exact general-EIS equation, quantifying the
/// log-linearization error. `None` for unit-EIS solutions.
pub fn exact_pde_residual(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    nu_grid: &[f64],
) -> Result<Option<ResidualReport>> {
    if !solution.case().is_general() {
        return Ok(None);
    }
    Ok(Some(residual_with(solution, m, p, nu_grid, true)))
}

/// Largest difference, relative to the term scale, between the exact and
/// the linearized residual at variance `nu` over all `tau` nodes. The two
/// share every term except the consumption term, so this isolates the
/// linearization error from time-discretization error.
pub fn linearization_gap(solution: &Solution, m: &MarketParams, p: &PreferenceParams, nu: f64) -> f64 {
    let pairs: Vec<([f64; 8], [f64; 8])> = match solution {
        Solution::Infinite {
            solution: s,
            linearization,
        } => {
            let lin = infinite_linear(linearization);
            vec![(
                terms(m, p, true, lin, s.a0, s.a1, 0.0, 0.0, nu),
                terms(m, p, true, Consumption::Exact, s.a0, s.a1, 0.0, 0.0, nu),
            )]
        }
        Solution::Finite(path) => {
            let (Some(z3), Some(z4)) = (&path.zeta3, &path.zeta4) else {
                return 0.0;
            };
            (0..path.tau.len())
                .map(|k| {
                    let lin = Consumption::Linear { za: z3[k], zb: z4[k] };
                    let (a0, a1) = (path.a0[k], path.a1[k]);
                    (
                        terms(m, p, true, lin, a0, a1, 0.0, 0.0, nu),
                        terms(m, p, true, Consumption::Exact, a0, a1, 0.0, 0.0, nu),
                    )
                })
                .collect()
        }
    };
    pairs
        .iter()
        .map(|(a, b)| {
            let scale = a.iter().chain(b.iter()).fold(0.0f64, |s, x| s.max(x.abs()));
            (a.iter().sum::<f64>() - b.iter().sum::<f64>()).abs() / scale
        })
        .fold(0.0, f64::max)
}
