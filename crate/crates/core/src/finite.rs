//! Finite-horizon solutions as coefficient paths in time-to-horizon `tau`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infinite::{hedge_term, risk_bracket, Strategy};
use crate::model::{CaseTag, MarketParams, PreferenceParams};
use crate::numerics::{interp_linear, linspace, rk4_step, trapezoid};

const BLOW_UP: f64 = 1e6;

/// Uniform grid on `[0, T]` in time to horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon must be > 0 (got {horizon})")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidInput(format!("n_steps must be >= 2 (got {n_steps})")));
        }
        Ok(Self { horizon, n_steps })
    }

    /// 1000 steps per 10 years, at least 100.
    pub fn default_for(horizon: f64) -> Result<Self> {
        Self::new(horizon, ((horizon * 100.0).ceil() as usize).max(100))
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        linspace(0.0, self.horizon, self.n_steps)
    }
}

/// Coefficients of `A1' = (a1/2) A1^2 - a2 A1 + a3/2`, `a4 = sqrt(a2^2 - a1 a3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl RiccatiCoeffs {
    /// Unit-EIS Riccati coefficients.
    pub fn unit(m: &MarketParams, p: &PreferenceParams) -> Result<Self> {
        let a1 = m.sigma * m.sigma * risk_bracket(m, p);
        let a2 = p.beta + m.kappa - hedge_term(m, p);
        let a3 = m.xi * m.xi / p.gamma;
        let disc = a2 * a2 - a1 * a3;
        if disc < 0.0 {
            return Err(Error::ComplexA4 { value: disc });
        }
        Ok(Self {
            a1,
            a2,
            a3,
            a4: disc.sqrt(),
        })
    }

    pub fn rhs(&self, a: f64) -> f64 {
        0.5 * self.a1 * a * a - self.a2 * a + 0.5 * self.a3
    }

    /// Closed-form solution with `A1(0) = 0`, written with `exp(-a4 tau)` so
    /// that it stays finite for large `tau`.
    pub fn closed_form(&self, tau: f64) -> f64 {
        let RiccatiCoeffs { a2, a3, a4, .. } = *self;
        if a4 == 0.0 {
            return a3 * tau / (2.0 + a2 * tau);
        }
        let em = (-a4 * tau).exp_m1();
        a3 * (-em) / (2.0 * a4 * (1.0 + em) + (a2 + a4) * (-em))
    }

    /// `d/dtau` of [`Self::closed_form`].
    pub fn closed_form_derivative(&self, tau: f64) -> f64 {
        let RiccatiCoeffs { a2, a3, a4, .. } = *self;
        if a4 == 0.0 {
            let d = 2.0 + a2 * tau;
            return 2.0 * a3 / (d * d);
        }
        let u = (-a4 * tau).exp();
        let d = 2.0 * a4 * u + (a2 + a4) * (1.0 - u);
        2.0 * a3 * a4 * a4 * u / (d * d)
    }

    /// Limit of the closed form as `tau -> infinity`.
    pub fn stationary(&self) -> f64 {
        self.a3 / (self.a2 + self.a4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMethod {
    ClosedForm,
    Rk4,
}

/// `A0(tau)`, `A1(tau)` sampled on a [`TimeGrid`]; general EIS also carries
/// the linearization constants `zeta3(tau)`, `zeta4(tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPath {
    pub grid: TimeGrid,
    pub tau: Vec<f64>,
    #[serde(rename = "A0")]
    pub a0: Vec<f64>,
    #[serde(rename = "A1")]
    pub a1: Vec<f64>,
    pub zeta3: Option<Vec<f64>>,
    pub zeta4: Option<Vec<f64>>,
    pub case: CaseTag,
    pub method: PathMethod,
    /// Present for unit EIS; gives exact `A1` and `A1'` off the grid.
    pub riccati: Option<RiccatiCoeffs>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl CoefficientPath {
    pub fn is_general(&self) -> bool {
        self.zeta4.is_some()
    }

    pub fn a0_at(&self, tau: f64) -> f64 {
        interp_linear(&self.tau, &self.a0, tau)
    }

    pub fn a1_at(&self, tau: f64) -> f64 {
        interp_linear(&self.tau, &self.a1, tau)
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    /// Writes `tau,A0,A1,zeta3,zeta4`; the zeta columns are empty for unit EIS.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "A0", "A1", "zeta3", "zeta4"])?;
        for i in 0..self.tau.len() {
            let z = |v: &Option<Vec<f64>>| v.as_ref().map(|v| (v[i] + 0.0).to_string()).unwrap_or_default();
            out.write_record([
                self.tau[i].to_string(),
                (self.a0[i] + 0.0).to_string(),
                (self.a1[i] + 0.0).to_string(),
                z(&self.zeta3),
                z(&self.zeta4),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn require_unit(p: &PreferenceParams) -> Result<()> {
    if !p.unit_eis() {
        return Err(Error::CaseMismatch {
            expected: CaseTag::FinUnit,
            found: CaseTag::FinGeneral,
        });
    }
    if !(p.epsilon > 0.0) {
        return Err(Error::InvalidPreferences("epsilon must be > 0".into()));
    }
    Ok(())
}

fn unit_case(p: &PreferenceParams) -> CaseTag {
    if p.unit_gamma() {
        CaseTag::LogUtility
    } else {
        CaseTag::FinUnit
    }
}

fn check_unit_sign(a1: &[f64]) -> Result<()> {
    match a1.iter().skip(1).position(|a| *a < 0.0) {
        Some(i) => Err(Error::SignHypothesis(format!(
            "A1 < 0 at node {} ({}); expected A1 >= 0 for tau > 0",
            i + 1,
            a1[i + 1]
        ))),
        None => Ok(()),
    }
}

/// Unit EIS: closed-form `A1(tau)`; `A0(tau)` from its integral
/// representation, with the convolution integral of `A1` done by Simpson's
/// rule on each grid interval.
pub fn solve_unit_eis_finite(m: &MarketParams, p: &PreferenceParams, grid: &TimeGrid) -> Result<CoefficientPath> {
    require_unit(p)?;
    let ric = RiccatiCoeffs::unit(m, p)?;
    let tau = grid.nodes();
    let h = grid.step();
    let a1: Vec<f64> = tau.iter().map(|&t| ric.closed_form(t)).collect();
    check_unit_sign(&a1)?;

    let beta = p.beta;
    let decay = (-beta * h).exp();
    let half_decay = (-beta * h / 2.0).exp();
    let base = m.r / beta - 1.0 + beta.ln();
    let ln_eps = p.epsilon.ln();
    let mut integral = 0.0;
    let mut a0 = Vec::with_capacity(tau.len());
    a0.push(ln_eps);
    for i in 1..tau.len() {
        let mid = ric.closed_form(0.5 * (tau[i - 1] + tau[i]));
        let piece = h / 6.0 * (a1[i - 1] * decay + 4.0 * mid * half_decay + a1[i]);
        integral = integral * decay + piece;
        let e = (-beta * tau[i]).exp();
        a0.push(ln_eps * e + base * (1.0 - e) + m.kappa * m.theta * integral);
    }
    Ok(CoefficientPath {
        grid: *grid,
        tau,
        a0,
        a1,
        zeta3: None,
        zeta4: None,
        case: unit_case(p),
        method: PathMethod::ClosedForm,
        riccati: Some(ric),
        notes: Vec::new(),
    })
}

/// Unit EIS by fourth-order Runge-Kutta on the coupled `A0`, `A1` ODEs;
/// independent of the closed form.
pub fn integrate_riccati(m: &MarketParams, p: &PreferenceParams, grid: &TimeGrid) -> Result<CoefficientPath> {
    require_unit(p)?;
    let ric = RiccatiCoeffs::unit(m, p)?;
    let beta = p.beta;
    let forcing = m.r - beta + beta * beta.ln();
    let kt = m.kappa * m.theta;
    let f = |_t: f64, y: &[f64; 2]| [-beta * y[0] + forcing + kt * y[1], ric.rhs(y[1])];
    let tau = grid.nodes();
    let h = grid.step();
    let mut y = [p.epsilon.ln(), 0.0];
    let mut a0 = vec![y[0]];
    let mut a1 = vec![y[1]];
    for i in 1..tau.len() {
        y = rk4_step(&f, tau[i - 1], &y, h);
        if !(y[1].abs() <= BLOW_UP && y[0].is_finite()) {
            return Err(Error::StepRejected { tau: tau[i] });
        }
        a0.push(y[0]);
        a1.push(y[1]);
    }
    Ok(CoefficientPath {
        grid: *grid,
        tau,
        a0,
        a1,
        zeta3: None,
        zeta4: None,
        case: unit_case(p),
        method: PathMethod::Rk4,
        riccati: Some(ric),
        notes: Vec::new(),
    })
}

/// Linearization constants at the long-run variance for given `A0`, `A1`.
pub fn zetas_at(m: &MarketParams, p: &PreferenceParams, a0: f64, a1: f64) -> (f64, f64) {
    let mean = p.phi * p.beta.ln() - a0 - a1 * m.theta;
    let z4 = mean.exp();
    (z4 * (1.0 - mean), z4)
}

/// Right-hand side of the general-EIS system in `(A0, A1)`.
pub(crate) fn general_rhs(m: &MarketParams, p: &PreferenceParams) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let (m, p) = (*m, *p);
    let b = risk_bracket(&m, &p);
    let hedge = hedge_term(&m, &p);
    let a1c = m.sigma * m.sigma * b / (p.phi - 1.0);
    let a3c = m.xi * m.xi * (p.phi - 1.0) / p.gamma;
    let const_part = m.r * (p.phi - 1.0) - p.beta * p.phi;
    let phi_ln_beta = p.phi * p.beta.ln();
    move |_t, y| {
        let (z3, z4) = zetas_at(&m, &p, y[0], y[1]);
        let a2c = z4 + m.kappa - hedge;
        [
            -z4 * y[0] + const_part + z3 + z4 * phi_ln_beta + m.kappa * m.theta * y[1],
            0.5 * a1c * y[1] * y[1] - a2c * y[1] + 0.5 * a3c,
        ]
    }
}

/// General EIS: joint RK4 on `(A0, A1)` with `zeta3`, `zeta4` recomputed from
/// the current state at every stage.
pub fn solve_general_eis_finite(m: &MarketParams, p: &PreferenceParams, grid: &TimeGrid) -> Result<CoefficientPath> {
    if p.unit_eis() {
        return Err(Error::CaseMismatch {
            expected: CaseTag::FinGeneral,
            found: CaseTag::FinUnit,
        });
    }
    if p.unit_gamma() || p.region().is_none() {
        return Err(Error::InvalidPreferences(format!(
            "(gamma, phi) = ({}, {}) not admissible for general EIS",
            p.gamma, p.phi
        )));
    }
    if !(p.epsilon > 0.0) {
        return Err(Error::InvalidPreferences("epsilon must be > 0".into()));
    }
    let f = general_rhs(m, p);
    let tau = grid.nodes();
    let h = grid.step();
    let mut y = [(p.phi - 1.0) * p.epsilon.ln(), 0.0];
    let mut a0 = vec![y[0]];
    let mut a1 = vec![y[1]];
    for i in 1..tau.len() {
        y = rk4_step(&f, tau[i - 1], &y, h);
        if !(y[1].abs() <= BLOW_UP && y[0].abs() <= BLOW_UP) {
            return Err(Error::StepRejected { tau: tau[i] });
        }
        a0.push(y[0]);
        a1.push(y[1]);
    }
    let s = 1.0 - p.phi;
    if let Some(i) = a1.iter().skip(1).position(|a| -a / s < 0.0) {
        return Err(Error::SignHypothesis(format!(
            "-A1/(1-phi) < 0 at tau = {} (A1 = {})",
            tau[i + 1],
            a1[i + 1]
        )));
    }
    let (zeta3, zeta4): (Vec<f64>, Vec<f64>) = a0.iter().zip(&a1).map(|(&x, &y)| zetas_at(m, p, x, y)).unzip();
    Ok(CoefficientPath {
        grid: *grid,
        tau,
        a0,
        a1,
        zeta3: Some(zeta3),
        zeta4: Some(zeta4),
        case: CaseTag::FinGeneral,
        method: PathMethod::Rk4,
        riccati: None,
        notes: vec!["linearization point: long-run variance theta at every tau".into()],
    })
}

/// Largest `|A0(tau) - rhs(tau)|` where `rhs` is the variation-of-constants
/// form of the `A0` equation evaluated by trapezoid quadrature from the
/// path's own `A1`, `zeta3`, `zeta4`.
pub fn integral_form_residual(path: &CoefficientPath, m: &MarketParams, p: &PreferenceParams) -> Result<f64> {
    let (Some(z3), Some(z4)) = (&path.zeta3, &path.zeta4) else {
        return Err(Error::InvalidInput("integral form applies to general-EIS paths".into()));
    };
    let h = path.grid.step();
    let n = path.tau.len();
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * h * (z4[i - 1] + z4[i]);
    }
    let phi_ln_beta = p.phi * p.beta.ln();
    let forcing: Vec<f64> = (0..n)
        .map(|j| m.r * (p.phi - 1.0) + z3[j] + z4[j] * phi_ln_beta - p.beta * p.phi + m.kappa * m.theta * path.a1[j])
        .collect();
    let boundary = path.a0[0];
    let mut worst: f64 = 0.0;
    let mut buf = Vec::with_capacity(n);
    for i in 0..n {
        buf.clear();
        buf.extend((0..=i).map(|j| forcing[j] * (cum[j] - cum[i]).exp()));
        let rhs = boundary * (-cum[i]).exp() + trapezoid(&buf, h);
        worst = worst.max((rhs - path.a0[i]).abs());
    }
    Ok(worst)
}

fn tau_of(path: &CoefficientPath, t: f64) -> Result<f64> {
    let horizon = path.horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {horizon}]")));
    }
    Ok(horizon - t)
}

/// Optimal strategy at calendar time `t` and variance `nu`.
pub fn strategy_finite(
    path: &CoefficientPath,
    t: f64,
    m: &MarketParams,
    p: &PreferenceParams,
    nu: f64,
) -> Result<Strategy> {
    let tau = tau_of(path, t)?;
    let a1 = path.a1_at(tau);
    Ok(if path.is_general() {
        let a0 = path.a0_at(tau);
        let c = p.beta.powf(p.phi) * (-a0 - a1 * nu).exp();
        let pi = m.xi / p.gamma - m.rho * m.sigma * (1.0 - p.gamma) * (a1 / (1.0 - p.phi)) / p.gamma;
        Strategy::new(c, pi, nu)
    } else {
        let pi = m.xi / p.gamma + m.rho * m.sigma * (1.0 - p.gamma) * a1 / p.gamma;
        Strategy::new(p.beta, pi, nu)
    })
}

/// Value function at time `t`, wealth `x`, variance `nu`.
pub fn value_function_finite(path: &CoefficientPath, t: f64, p: &PreferenceParams, x: f64, nu: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("wealth must be > 0 (got {x})")));
    }
    let tau = tau_of(path, t)?;
    let lin = path.a0_at(tau) + path.a1_at(tau) * nu;
    let g = p.gamma;
    Ok(match path.case {
        CaseTag::LogUtility => x.ln() + lin,
        CaseTag::FinGeneral => x.powf(1.0 - g) / (1.0 - g) * (-(1.0 - g) / (1.0 - p.phi) * lin).exp(),
        _ => x.powf(1.0 - g) / (1.0 - g) * ((1.0 - g) * lin).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Horizon;

    fn unit() -> PreferenceParams {
        PreferenceParams::reference()
            .with_phi(1.0)
            .with_horizon(Horizon::Finite(10.0))
    }

    fn general() -> PreferenceParams {
        PreferenceParams::reference().with_horizon(Horizon::Finite(10.0))
    }

    #[test]
    fn unit_boundary_values() {
        let m = MarketParams::reference();
        let grid = TimeGrid::new(10.0, 1000).unwrap();
        let path = solve_unit_eis_finite(&m, &unit(), &grid).unwrap();
        assert_eq!(path.a1[0], 0.0);
        assert_eq!(path.a0[0], 0.0);
        assert!(path.a1[1..].iter().all(|a| *a > 0.0));
    }

    #[test]
    fn bequest_weight_enters_boundary() {
        let m = MarketParams::reference();
        let grid = TimeGrid::new(5.0, 100).unwrap();
        let p = PreferenceParams { epsilon: 2.0, ..unit() };
        let path = solve_unit_eis_finite(&m, &p, &grid).unwrap();
        assert_eq!(path.a0[0], 2f64.ln());
        let g = PreferenceParams {
            epsilon: 2.0,
            ..general()
        };
        let gp = solve_general_eis_finite(&m, &g, &grid).unwrap();
        assert_eq!(gp.a0[0], (g.phi - 1.0) * 2f64.ln());
    }

    #[test]
    fn closed_form_derivative_matches_ode() {
        let m = MarketParams::reference();
        let ric = RiccatiCoeffs::unit(&m, &unit()).unwrap();
        assert_eq!(ric.closed_form_derivative(0.0), ric.a3 / 2.0);
        for tau in [0.0, 0.3, 2.0, 9.0, 50.0] {
            let a = ric.closed_form(tau);
            assert!((ric.closed_form_derivative(tau) - ric.rhs(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_survives_long_horizons() {
        let m = MarketParams::reference();
        let ric = RiccatiCoeffs::unit(&m, &unit()).unwrap();
        let far = ric.closed_form(1e4);
        assert!(far.is_finite());
        assert!((far - ric.stationary()).abs() < 1e-15);
    }

    #[test]
    fn zero_risk_premium_riccati_stays_zero() {
        let m = MarketParams {
            xi: 0.0,
            ..MarketParams::reference()
        };
        let grid = TimeGrid::new(10.0, 200).unwrap();
        let path = integrate_riccati(&m, &unit(), &grid).unwrap();
        assert!(path.a1.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn general_boundary_zetas() {
        let m = MarketParams::reference();
        let grid = TimeGrid::new(10.0, 1000).unwrap();
        let p = general();
        let path = solve_general_eis_finite(&m, &p, &grid).unwrap();
        assert_eq!(path.a0[0], 0.0);
        let z4 = path.zeta4.as_ref().unwrap();
        let z3 = path.zeta3.as_ref().unwrap();
        let bp = p.beta.powf(p.phi);
        assert!((z4[0] - bp).abs() < 1e-15);
        assert!((z3[0] - bp * (1.0 - p.phi * p.beta.ln())).abs() < 1e-15);
        assert!(path.a1[1..].iter().all(|a| *a < 0.0));
        assert!(z4.iter().all(|z| *z > 0.0));
    }

    #[test]
    fn strategy_at_horizon_is_myopic() {
        let m = MarketParams::reference();
        let grid = TimeGrid::new(10.0, 1000).unwrap();
        let path = solve_unit_eis_finite(&m, &unit(), &grid).unwrap();
        let s = strategy_finite(&path, 10.0, &m, &unit(), 0.03).unwrap();
        assert_eq!(s.pi, m.xi / 2.0);
        assert_eq!(s.c_over_x, 0.08);
        assert!(strategy_finite(&path, 10.5, &m, &unit(), 0.03).is_err());
        let v = value_function_finite(&path, 10.0, &unit(), 2.0, 0.03).unwrap();
        assert!((v - 2f64.powf(-1.0) / -1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_empty_zetas_for_unit() {
        let m = MarketParams::reference();
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let path = solve_unit_eis_finite(&m, &unit(), &grid).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,A0,A1,zeta3,zeta4"));
        assert!(lines.next().unwrap().ends_with(",,"));
        assert_eq!(text.lines().count(), 6);
    }
}
