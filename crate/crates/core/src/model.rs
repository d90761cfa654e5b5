//! Market and preference parameters, validation and case classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Heston market coefficients and initial state.
///
/// The risky asset has market price of risk `eta(nu) = xi*sqrt(nu)`,
/// volatility `G(nu) = sqrt(nu)`, and the variance follows the CIR dynamics
/// with drift `m1(nu) = kappa*(theta - nu)` and diffusion
/// `m2(nu) = sigma*sqrt(nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Risk-free rate `r` (1/year).
    pub r: f64,
    /// Volatility risk premium `xi`.
    pub xi: f64,
    /// Mean-reversion rate `kappa` (1/year).
    pub kappa: f64,
    /// Long-run variance `theta`.
    pub theta: f64,
    /// Volatility of variance `sigma`.
    pub sigma: f64,
    /// Correlation between the asset and variance shocks.
    pub rho: f64,
    /// Initial variance.
    pub nu0: f64,
    /// Initial wealth.
    pub x0: f64,
}

impl MarketParams {
    /// Market used in the numerical illustrations: r=0.05, xi=7/15,
    /// kappa=5, theta=0.0225, sigma=0.25, rho=-0.5. The initial state
    /// (nu0=0.04, x0=1) is not pinned by the source and is a local choice.
    pub fn reference() -> Self {
        Self {
            r: 0.05,
            xi: 7.0 / 15.0,
            kappa: 5.0,
            theta: 0.0225,
            sigma: 0.25,
            rho: -0.5,
            nu0: 0.04,
            x0: 1.0,
        }
    }

    /// `2*kappa*theta / sigma^2`; the CIR process stays strictly positive when >= 1.
    pub fn feller_ratio(&self) -> f64 {
        2.0 * self.kappa * self.theta / (self.sigma * self.sigma)
    }

    pub fn eta(&self, nu: f64) -> f64 {
        self.xi * nu.max(0.0).sqrt()
    }

    pub fn vol(&self, nu: f64) -> f64 {
        nu.max(0.0).sqrt()
    }

    pub fn m1(&self, nu: f64) -> f64 {
        self.kappa * (self.theta - nu)
    }

    pub fn m2(&self, nu: f64) -> f64 {
        self.sigma * nu.max(0.0).sqrt()
    }

    /// `2*sigma^2/kappa^2`-free form of the moment bound `kappa^2 / (2 sigma^2)`.
    pub fn moment_bound(&self) -> f64 {
        self.kappa * self.kappa / (2.0 * self.sigma * self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "years")]
pub enum Horizon {
    Infinite,
    Finite(f64),
}

impl Horizon {
    pub fn is_finite(&self) -> bool {
        matches!(self, Horizon::Finite(_))
    }

    pub fn years(&self) -> Option<f64> {
        match *self {
            Horizon::Finite(t) => Some(t),
            Horizon::Infinite => None,
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Infinite => write!(f, "inf"),
            Horizon::Finite(t) => write!(f, "{t}"),
        }
    }
}

/// Recursive-utility parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceParams {
    /// Discount rate `beta`.
    pub beta: f64,
    /// Relative risk aversion `gamma`.
    pub gamma: f64,
    /// Elasticity of intertemporal substitution `phi`.
    pub phi: f64,
    /// Bequest weight `epsilon` (finite horizon only).
    pub epsilon: f64,
    pub horizon: Horizon,
}

impl PreferenceParams {
    /// beta=0.08, gamma=2, phi=0.125, epsilon=1, infinite horizon.
    pub fn reference() -> Self {
        Self {
            beta: 0.08,
            gamma: 2.0,
            phi: 0.125,
            epsilon: 1.0,
            horizon: Horizon::Infinite,
        }
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// Unit elasticity of intertemporal substitution (exact comparison).
    pub fn unit_eis(&self) -> bool {
        self.phi == 1.0
    }

    /// Unit relative risk aversion (exact comparison).
    pub fn unit_gamma(&self) -> bool {
        self.gamma == 1.0
    }

    /// Which of the four admissible `(gamma, phi)` regions holds, if any.
    pub fn region(&self) -> Option<PreferenceRegion> {
        let (g, p) = (self.gamma, self.phi);
        if g > 1.0 && p > 1.0 {
            Some(PreferenceRegion::I)
        } else if g > 1.0 && p < 1.0 && g * p <= 1.0 {
            Some(PreferenceRegion::II)
        } else if g < 1.0 && p < 1.0 {
            Some(PreferenceRegion::III)
        } else if g < 1.0 && p > 1.0 && g * p >= 1.0 {
            Some(PreferenceRegion::IV)
        } else {
            None
        }
    }
}

/// The four `(gamma, phi)` configurations under which the non-unit-EIS
/// aggregator satisfies the one-sided Lipschitz condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreferenceRegion {
    /// gamma > 1, phi > 1
    I,
    /// gamma > 1, phi < 1, gamma*phi <= 1
    II,
    /// gamma < 1, phi < 1
    III,
    /// gamma < 1, phi > 1, gamma*phi >= 1
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    InfUnit,
    InfGeneral,
    FinUnit,
    FinGeneral,
    LogUtility,
}

impl CaseTag {
    pub fn is_finite(self) -> bool {
        matches!(self, CaseTag::FinUnit | CaseTag::FinGeneral)
    }

    pub fn is_general(self) -> bool {
        matches!(self, CaseTag::InfGeneral | CaseTag::FinGeneral)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::InfUnit => "inf-unit",
            CaseTag::InfGeneral => "inf-general",
            CaseTag::FinUnit => "fin-unit",
            CaseTag::FinGeneral => "fin-general",
            CaseTag::LogUtility => "log-utility",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf-unit" => Ok(CaseTag::InfUnit),
            "inf-general" => Ok(CaseTag::InfGeneral),
            "fin-unit" => Ok(CaseTag::FinUnit),
            "fin-general" => Ok(CaseTag::FinGeneral),
            "log-utility" => Ok(CaseTag::LogUtility),
            other => Err(Error::Parse(format!("unknown case '{other}'"))),
        }
    }
}

/// Outcome of parameter validation. Hard constraint violations go to
/// `errors`; diagnostics that do not block the solvers go to `warnings`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feller_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<PreferenceRegion>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
        self.notes.extend(other.notes);
        self.feller_ratio = self.feller_ratio.or(other.feller_ratio);
        self.region = self.region.or(other.region);
        self
    }

    pub fn into_result(self) -> Result<ValidationReport> {
        if self.is_ok() {
            Ok(self)
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.errors.join("; "))
        }
    }
}

fn positive(errors: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errors.push(format!("{name} must be finite and > 0 (got {v})"));
    }
}

pub fn validate_market(p: &MarketParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let errors = &mut report.errors;
    positive(errors, "r", p.r);
    if !(p.xi.is_finite() && p.xi >= 0.0) {
        errors.push(format!("xi must be finite and >= 0 (got {})", p.xi));
    }
    positive(errors, "kappa", p.kappa);
    positive(errors, "theta", p.theta);
    positive(errors, "sigma", p.sigma);
    if !(p.rho.is_finite() && (-1.0..=1.0).contains(&p.rho)) {
        errors.push(format!("rho out of [-1,1] (got {})", p.rho));
    }
    positive(errors, "nu0", p.nu0);
    positive(errors, "x0", p.x0);

    if p.kappa > 0.0 && p.theta > 0.0 && p.sigma > 0.0 {
        let ratio = p.feller_ratio();
        report.feller_ratio = Some(ratio);
        if ratio < 1.0 {
            report.warnings.push(format!(
                "Feller condition violated: 2*kappa*theta/sigma^2 = {ratio} < 1; \
                 the variance process can reach zero"
            ));
        }
    }
    report
}

pub fn validate_preferences(p: &PreferenceParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let errors = &mut report.errors;
    positive(errors, "beta", p.beta);
    positive(errors, "gamma", p.gamma);
    positive(errors, "phi", p.phi);
    positive(errors, "epsilon", p.epsilon);
    if let Horizon::Finite(t) = p.horizon {
        positive(errors, "horizon T", t);
    }
    if !report.errors.is_empty() {
        return report;
    }

    match (p.unit_gamma(), p.unit_eis()) {
        (true, true) => report.notes.push("gamma = phi = 1: logarithmic utility".into()),
        (true, false) => report
            .errors
            .push("gamma = 1 with phi != 1 is not covered: the non-unit-EIS aggregator requires gamma != 1".into()),
        (false, true) => {
            report
                .notes
                .push("unit EIS: optimal consumption c* = beta*x > 0 for every x > 0".into());
        }
        (false, false) => match p.region() {
            Some(region) => report.region = Some(region),
            None => report.errors.push(format!(
                "(gamma, phi) = ({}, {}) lies in none of the four admissible regions: \
                 gamma>1,phi>1 | gamma>1,phi<1,gamma*phi<=1 | gamma<1,phi<1 | gamma<1,phi>1,gamma*phi>=1",
                p.gamma, p.phi
            )),
        },
    }

    if !(p.gamma > 1.0 && p.phi <= 1.0) {
        report
            .warnings
            .push("outside the focus region phi <= 1, gamma > 1 of the reference setting".into());
    }
    report
}

/// Validates both parameter sets and returns the solver dispatch tag.
pub fn classify_case(m: &MarketParams, p: &PreferenceParams) -> Result<CaseTag> {
    validate_market(m).merge(validate_preferences(p)).into_result()?;
    Ok(case_of(p))
}

/// Dispatch table on `(horizon, phi == 1, gamma == 1)`. Assumes valid input.
pub(crate) fn case_of(p: &PreferenceParams) -> CaseTag {
    match (p.horizon.is_finite(), p.unit_eis(), p.unit_gamma()) {
        (_, true, true) => CaseTag::LogUtility,
        (false, true, false) => CaseTag::InfUnit,
        (false, false, _) => CaseTag::InfGeneral,
        (true, true, false) => CaseTag::FinUnit,
        (true, false, _) => CaseTag::FinGeneral,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_market_is_accepted() {
        let report = validate_market(&MarketParams::reference());
        assert!(report.is_ok(), "{report:?}");
        assert!(report.warnings.is_empty());
        assert_eq!(report.feller_ratio, Some(2.0 * 5.0 * 0.0225 / 0.0625));
    }

    #[test]
    fn high_vol_of_vol_warns_on_feller() {
        let m = MarketParams {
            sigma: 0.8,
            ..MarketParams::reference()
        };
        let report = validate_market(&m);
        assert!(report.is_ok());
        let ratio = report.feller_ratio.unwrap();
        assert!((ratio - 0.225 / 0.64).abs() < 1e-15);
        assert!(ratio < 1.0);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn rho_out_of_range_is_an_error() {
        let m = MarketParams {
            rho: -1.5,
            ..MarketParams::reference()
        };
        let report = validate_market(&m);
        assert!(!report.is_ok());
        assert!(report.errors[0].contains("rho out of [-1,1]"));
    }

    #[test]
    fn reference_preferences_fall_in_region_two() {
        let report = validate_preferences(&PreferenceParams::reference());
        assert!(report.is_ok());
        assert_eq!(report.region, Some(PreferenceRegion::II));
    }

    #[test]
    fn eis_above_reciprocal_risk_aversion_is_rejected() {
        let p = PreferenceParams::reference().with_phi(0.75);
        let report = validate_preferences(&p);
        assert!(!report.is_ok());
        assert!(report.region.is_none());
    }

    #[test]
    fn log_utility_is_accepted_and_tagged() {
        let p = PreferenceParams::reference().with_gamma(1.0).with_phi(1.0);
        assert!(validate_preferences(&p).is_ok());
        assert_eq!(
            classify_case(&MarketParams::reference(), &p).unwrap(),
            CaseTag::LogUtility
        );
    }

    #[test]
    fn classification_table() {
        let m = MarketParams::reference();
        let base = PreferenceParams::reference();
        let cases = [
            (base.with_phi(1.0), CaseTag::InfUnit),
            (base, CaseTag::InfGeneral),
            (base.with_phi(1.0).with_horizon(Horizon::Finite(10.0)), CaseTag::FinUnit),
            (base.with_horizon(Horizon::Finite(10.0)), CaseTag::FinGeneral),
            (
                base.with_gamma(1.0).with_phi(1.0).with_horizon(Horizon::Finite(10.0)),
                CaseTag::LogUtility,
            ),
        ];
        for (p, expected) in cases {
            assert_eq!(classify_case(&m, &p).unwrap(), expected, "{p:?}");
        }
    }

    #[test]
    fn classify_rejects_invalid() {
        let m = MarketParams {
            kappa: -1.0,
            ..MarketParams::reference()
        };
        assert!(matches!(
            classify_case(&m, &PreferenceParams::reference()),
            Err(Error::Validation(_))
        ));
        let p = PreferenceParams::reference().with_gamma(1.0);
        assert!(classify_case(&MarketParams::reference(), &p).is_err());
    }

    #[test]
    fn revalidation_is_idempotent() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference();
        let a = validate_market(&m).merge(validate_preferences(&p));
        let b = validate_market(&m).merge(validate_preferences(&p));
        assert_eq!(a, b);
    }
}
