//! Coefficient matching of exponential-polynomial guesses against the
//! reduced HJB equations.
//!
//! The log of the value-function factor is guessed as
//! `p(nu) = A0 + sum_{k=1..n} A_k nu^k / k`. Substituting into a reduced
//! equation gives a polynomial in `nu` whose coefficients are polynomials in
//! the unknowns. The guess can work only if every power above `n` vanishes
//! identically; powers `0..=n` pin down the `n + 1` unknowns (algebraic
//! equations for infinite horizon, ODEs in `tau` for finite horizon).

pub mod poly;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, parse_rational, Rational};
use crate::model::{CaseTag, MarketParams};
pub use poly::{NuPoly, Poly, Sym};

/// Coefficient polynomials of the market functions, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSpec {
    /// `eta(nu)^2`
    pub eta_sq: Vec<Rational>,
    /// `m1(nu)`
    pub m1: Vec<Rational>,
    /// `eta(nu) * m2(nu)`
    pub eta_m2: Vec<Rational>,
    /// `m2(nu)^2`
    pub m2_sq: Vec<Rational>,
}

/// Which degree hypotheses for a closed-form solution hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// `eta^2` at most quadratic, `m1` and `eta*m2` at most linear, `m2^2` constant.
    pub quadratic_eta: bool,
    /// `eta` constant.
    pub constant_eta: bool,
    /// All four functions at most linear.
    pub all_linear: bool,
}

fn degree(c: &[Rational]) -> Option<usize> {
    c.iter().rposition(|x| !x.is_zero())
}

fn deg_le(c: &[Rational], d: usize) -> bool {
    degree(c).is_none_or(|k| k <= d)
}

impl DegreeSpec {
    /// Square-root volatility market: `eta^2 = xi^2 nu`, `m1 = kappa(theta - nu)`,
    /// `eta*m2 = xi*sigma*nu`, `m2^2 = sigma^2 nu`.
    pub fn heston(xi: &Rational, kappa: &Rational, theta: &Rational, sigma: &Rational) -> Self {
        let zero = Rational::zero();
        Self {
            eta_sq: vec![zero.clone(), xi * xi],
            m1: vec![kappa * theta, -kappa.clone()],
            eta_m2: vec![zero.clone(), xi * sigma],
            m2_sq: vec![zero, sigma * sigma],
        }
    }

    pub fn from_market(m: &MarketParams) -> Result<Self> {
        Ok(Self::heston(
            &exact::from_f64(m.xi)?,
            &exact::from_f64(m.kappa)?,
            &exact::from_f64(m.theta)?,
            &exact::from_f64(m.sigma)?,
        ))
    }

    /// Parses `key = c0, c1, ...` lines (`#` starts a comment). All four keys
    /// `eta_sq`, `m1`, `eta_m2`, `m2_sq` are required; coefficients may be
    /// decimals or fractions.
    pub fn parse(text: &str) -> Result<Self> {
        let mut found: BTreeMap<&str, Vec<Rational>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = coefficients", lineno + 1)))?;
            let key = key.trim();
            let slot = match key {
                "eta_sq" | "m1" | "eta_m2" | "m2_sq" => key,
                other => return Err(Error::Parse(format!("line {}: unknown key '{other}'", lineno + 1))),
            };
            let coeffs = value
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            if coeffs.is_empty() {
                return Err(Error::Parse(format!("line {}: no coefficients for {key}", lineno + 1)));
            }
            if found.insert(slot, coeffs).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key}", lineno + 1)));
            }
        }
        let mut take = |k: &str| found.remove(k).ok_or_else(|| Error::Parse(format!("missing key {k}")));
        Ok(Self {
            eta_sq: take("eta_sq")?,
            m1: take("m1")?,
            eta_m2: take("eta_m2")?,
            m2_sq: take("m2_sq")?,
        })
    }

    pub fn flags(&self) -> HypothesisFlags {
        let quadratic_eta =
            deg_le(&self.eta_sq, 2) && deg_le(&self.m1, 1) && deg_le(&self.eta_m2, 1) && deg_le(&self.m2_sq, 0);
        HypothesisFlags {
            quadratic_eta,
            constant_eta: deg_le(&self.eta_sq, 0),
            all_linear: deg_le(&self.eta_sq, 1)
                && deg_le(&self.m1, 1)
                && deg_le(&self.eta_m2, 1)
                && deg_le(&self.m2_sq, 1),
        }
    }

    /// Degrees exceed every covered hypothesis.
    fn beyond_envelope(&self) -> bool {
        !(deg_le(&self.eta_sq, 2) && deg_le(&self.m1, 1) && deg_le(&self.eta_m2, 1) && deg_le(&self.m2_sq, 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub order: i64,
    pub case: CaseTag,
}

/// Preference inputs of the templates, as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateParams {
    pub gamma: Rational,
    pub rho: Rational,
    pub phi: Rational,
}

impl TemplateParams {
    pub fn new(gamma: Rational, rho: Rational, phi: Rational) -> Self {
        Self { gamma, rho, phi }
    }

    pub fn from_f64(gamma: f64, rho: f64, phi: f64) -> Result<Self> {
        Ok(Self::new(
            exact::from_f64(gamma)?,
            exact::from_f64(rho)?,
            exact::from_f64(phi)?,
        ))
    }

    /// `1 - gamma + rho^2 (1 - gamma)^2 / gamma`
    pub fn bracket(&self) -> Rational {
        let one = Rational::one();
        let omg = &one - &self.gamma;
        &omg + &(&self.rho * &self.rho) * &omg * &omg / &self.gamma
    }
}

fn validate(a: &AnsatzSpec, t: &TemplateParams) -> Result<()> {
    if a.order < 0 {
        return Err(Error::InvalidInput(format!(
            "ansatz order must be >= 0 (got {})",
            a.order
        )));
    }
    if a.case == CaseTag::LogUtility {
        return Err(Error::InvalidInput(
            "log utility has no separate template; use inf-unit or fin-unit with gamma = 1".into(),
        ));
    }
    if !t.gamma.is_positive() {
        return Err(Error::InvalidInput("gamma must be > 0".into()));
    }
    if t.rho.abs() > Rational::one() {
        return Err(Error::InvalidInput("rho out of [-1,1]".into()));
    }
    if a.case.is_general() {
        if t.gamma.is_one() {
            return Err(Error::InvalidInput("general-EIS templates require gamma != 1".into()));
        }
        if t.phi.is_one() || !t.phi.is_positive() {
            return Err(Error::InvalidInput(
                "general-EIS templates require phi > 0, phi != 1".into(),
            ));
        }
    }
    Ok(())
}

fn sym(s: Sym) -> NuPoly {
    NuPoly::constant(Poly::sym(s))
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Expands the reduced equation for the given case; entry `j` is the
/// coefficient of `nu^j`.
pub fn expand_matching_system(d: &DegreeSpec, a: &AnsatzSpec, t: &TemplateParams) -> Result<Vec<Poly>> {
    validate(a, t)?;
    let n = a.order as u32;
    let one = Rational::one();
    let gamma = &t.gamma;
    let phi = &t.phi;

    // p, p', p'' and p_tau of the guess
    let mut p = vec![Poly::sym(Sym::A(0))];
    let mut p_tau = vec![Poly::sym(Sym::DA(0))];
    for k in 1..=n {
        let w = ratio(1, k as i64);
        p.push(Poly::sym(Sym::A(k)).scale(&w));
        p_tau.push(Poly::sym(Sym::DA(k)).scale(&w));
    }
    let p = NuPoly(p);
    let p_tau = NuPoly(p_tau);
    let dp = NuPoly((1..=n).map(|k| Poly::sym(Sym::A(k))).collect());
    let ddp = NuPoly(
        (2..=n)
            .map(|k| Poly::sym(Sym::A(k)).scale(&Rational::from_integer((k - 1).into())))
            .collect(),
    );
    let dp_sq = &dp * &dp;

    let eta_sq = NuPoly::from_numbers(&d.eta_sq);
    let m1 = NuPoly::from_numbers(&d.m1);
    let eta_m2 = NuPoly::from_numbers(&d.eta_m2);
    let m2_sq = NuPoly::from_numbers(&d.m2_sq);

    let omg = &one - gamma;
    let hedge = &t.rho * &omg / gamma;
    let drift = &m1 + &eta_m2.scale(&hedge);
    let myopic = eta_sq.scale(&(&one / (gamma * ratio(2, 1))));
    let b = t.bracket();

    let sum = |parts: &[NuPoly]| parts.iter().fold(NuPoly::default(), |acc, x| &acc + x);

    let expr = match a.case {
        CaseTag::InfUnit | CaseTag::FinUnit => {
            let half = ratio(1, 2);
            let curvature = &dp_sq.scale(&b) + &ddp;
            let base = sum(&[
                sym(Sym::R),
                sym(Sym::Beta).scale(&-one.clone()),
                myopic,
                (&sym(Sym::Beta) * &sym(Sym::LnBeta)),
                (&sym(Sym::Beta) * &p).scale(&-one.clone()),
                &drift * &dp,
                (&m2_sq * &curvature).scale(&half),
            ]);
            if a.case == CaseTag::FinUnit {
                &base + &p_tau.scale(&-one.clone())
            } else {
                base
            }
        }
        CaseTag::InfGeneral | CaseTag::FinGeneral => {
            let (za, zb) = if a.case == CaseTag::InfGeneral {
                (Sym::Zeta(1), Sym::Zeta(2))
            } else {
                (Sym::Zeta(3), Sym::Zeta(4))
            };
            let one_m_phi = &one - phi;
            // zeta_a + zeta_b (phi ln beta - p)
            let lin = &sym(za) + &(&sym(zb) * &(&sym(Sym::LnBeta).scale(phi) + &p.scale(&-one.clone())));
            let w = phi / (phi - &one);
            let wide = &(&(&one + &one) - phi) - gamma + &t.rho * &t.rho * &omg * &omg / gamma;
            let two = ratio(2, 1);
            let base = sum(&[
                sym(Sym::R),
                lin.scale(&-one.clone()),
                myopic,
                lin.scale(&w),
                sym(Sym::Beta).scale(&-w.clone()),
                (&drift * &dp).scale(&(-(&one / &one_m_phi))),
                (&m2_sq * &dp_sq).scale(&(&wide / (&two * &one_m_phi * &one_m_phi))),
                (&m2_sq * &(&dp_sq + &ddp)).scale(&(-(&one / (&two * &one_m_phi)))),
            ]);
            if a.case == CaseTag::FinGeneral {
                &base + &p_tau.scale(&(&one / &one_m_phi))
            } else {
                base
            }
        }
        CaseTag::LogUtility => unreachable!("rejected in validate"),
    };
    Ok(expr.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Solvable,
    Unsolvable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The top residual coefficient is `c * A_n^2` with `c` proportional to
    /// the risk-aversion bracket; it can vanish only if the bracket does.
    Bracket {
        power: usize,
        unknown: String,
        coefficient: f64,
        bracket: f64,
        required_rho_sq: f64,
        feasible: bool,
    },
    /// The top residual coefficient involves no unknowns and is nonzero.
    Data { power: usize, coefficient: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub power: usize,
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub verdict: Verdict,
    pub order: i64,
    pub case: CaseTag,
    pub residual_powers: Vec<usize>,
    pub witness: Option<Witness>,
    pub witness_text: String,
    pub matched_system_size: Option<usize>,
    pub hypotheses: HypothesisFlags,
    /// Whether the degree hypothesis matching this order holds.
    pub hypothesis_holds: bool,
    pub equations: Vec<Equation>,
}

/// Classifies the guess of the given order as solvable or not.
pub fn judge_solvability(d: &DegreeSpec, a: &AnsatzSpec, t: &TemplateParams) -> Result<MatchReport> {
    let coeffs = expand_matching_system(d, a, t)?;
    let n = a.order as usize;
    let hypotheses = d.flags();
    let hypothesis_holds = match n {
        0 => hypotheses.constant_eta,
        1 => hypotheses.all_linear,
        _ => hypotheses.quadratic_eta,
    };
    let equations = coeffs
        .iter()
        .enumerate()
        .map(|(power, c)| Equation {
            power,
            expression: c.to_string(),
        })
        .collect();
    let residual_powers: Vec<usize> = coeffs
        .iter()
        .enumerate()
        .filter(|(j, c)| *j > n && !c.is_zero())
        .map(|(j, _)| j)
        .collect();

    let mut report = MatchReport {
        verdict: Verdict::Solvable,
        order: a.order,
        case: a.case,
        residual_powers: residual_powers.clone(),
        witness: None,
        witness_text: String::new(),
        matched_system_size: None,
        hypotheses,
        hypothesis_holds,
        equations,
    };

    if d.beyond_envelope() {
        report.verdict = Verdict::Indeterminate;
        report.witness_text = "degree spec exceeds eta^2 <= 2, m1 <= 1, eta*m2 <= 1, m2^2 <= 1; \
                               no conclusion is drawn"
            .into();
        return Ok(report);
    }

    let Some(&top) = residual_powers.last() else {
        report.matched_system_size = Some(n + 1);
        report.witness_text = if a.case.is_finite() {
            format!("powers nu^0..nu^{n} give {} ODEs for A0..A{n}", n + 1)
        } else {
            format!("powers nu^0..nu^{n} give {} equations for A0..A{n}", n + 1)
        };
        return Ok(report);
    };

    let top_coef = &coeffs[top];
    if !top_coef.has_unknowns() {
        report.verdict = Verdict::Unsolvable;
        report.witness_text =
            format!("coefficient of nu^{top} is the nonzero constant {top_coef}, which no choice of A_k can cancel");
        report.witness = Some(Witness::Data {
            power: top,
            coefficient: top_coef.to_string(),
        });
        return Ok(report);
    }
    match top_coef.as_scaled_square() {
        Some((c, s @ Sym::A(_))) => {
            let g = &t.gamma;
            let required = g / (g - &Rational::one());
            let feasible = !required.is_negative() && required <= Rational::one();
            let bracket = exact::to_f64(&t.bracket());
            let required_f = exact::to_f64(&required);
            report.verdict = Verdict::Unsolvable;
            report.witness_text = format!(
                "coefficient of nu^{top} is {c_f:e}*{s}^2, proportional to the bracket \
                 1 - gamma + rho^2 (1 - gamma)^2 / gamma = {bracket:e}; cancelling it with {s} != 0 \
                 requires rho^2 = gamma/(gamma - 1) = {required_f}, which is {}",
                if feasible {
                    "feasible"
                } else {
                    "infeasible for rho in [-1,1]"
                },
                c_f = exact::to_f64(&c),
            );
            report.witness = Some(Witness::Bracket {
                power: top,
                unknown: s.to_string(),
                coefficient: exact::to_f64(&c),
                bracket,
                required_rho_sq: required_f,
                feasible,
            });
        }
        _ => {
            report.verdict = Verdict::Indeterminate;
            report.witness_text =
                format!("coefficient of nu^{top} is {top_coef}; no closed-form obstruction identified");
        }
    }
    Ok(report)
}

/// True iff `rho^2 = gamma/(gamma - 1)` has no solution with `rho` in `[-1, 1]`.
pub fn witness_infeasible(gamma: f64) -> Result<bool> {
    if !(gamma.is_finite() && gamma > 0.0) || gamma == 1.0 {
        return Err(Error::InvalidInput(format!(
            "witness is defined for gamma > 0, gamma != 1 (got {gamma})"
        )));
    }
    let required = gamma / (gamma - 1.0);
    Ok(!(0.0..=1.0).contains(&required))
}

/// `1 - gamma + rho^2 (1 - gamma)^2 / gamma`
pub fn unit_bracket(gamma: f64, rho: f64) -> f64 {
    1.0 - gamma + rho * rho * (1.0 - gamma).powi(2) / gamma
}

/// Combined `(h_nu/h)^2` weight of the general-EIS equation:
/// `[2 - phi - gamma + rho^2 (1 - gamma)^2 / gamma] / (1 - phi)^2 - 1/(1 - phi)`.
pub fn general_bracket(gamma: f64, rho: f64, phi: f64) -> f64 {
    let s = 1.0 - phi;
    (2.0 - phi - gamma + rho * rho * (1.0 - gamma).powi(2) / gamma) / (s * s) - 1.0 / s
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Solvable => "Solvable",
            Verdict::Unsolvable => "Unsolvable",
            Verdict::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn heston() -> DegreeSpec {
        DegreeSpec::heston(&q(7, 15), &q(5, 1), &q(9, 400), &q(1, 4))
    }

    fn quadratic_eta() -> DegreeSpec {
        DegreeSpec {
            eta_sq: vec![q(1, 10), q(1, 5), q(3, 10)],
            m1: vec![q(1, 8), q(-5, 1)],
            eta_m2: vec![q(0, 1), q(1, 7)],
            m2_sq: vec![q(1, 16)],
        }
    }

    fn reference() -> TemplateParams {
        TemplateParams::new(q(2, 1), q(-1, 2), q(1, 8))
    }

    fn spec(order: i64, case: CaseTag) -> AnsatzSpec {
        AnsatzSpec { order, case }
    }

    #[test]
    fn heston_linear_gives_two_equations() {
        let coeffs = expand_matching_system(&heston(), &spec(1, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(coeffs.len(), 2);
        let r = judge_solvability(&heston(), &spec(1, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Solvable);
        assert_eq!(r.matched_system_size, Some(2));
    }

    #[test]
    fn heston_linear_equations_match_hand_expansion() {
        // nu^1: xi^2/(2 gamma) - beta A1 + (-kappa + xi sigma rho (1-gamma)/gamma) A1 + sigma^2 B A1^2 / 2
        let coeffs = expand_matching_system(&heston(), &spec(1, CaseTag::InfUnit), &reference()).unwrap();
        let a1 = Poly::sym(Sym::A(1));
        let beta = Poly::sym(Sym::Beta);
        let xi = q(7, 15);
        let sigma = q(1, 4);
        let gamma = q(2, 1);
        let rho = q(-1, 2);
        let b = reference().bracket();
        let hedge = &xi * &sigma * &rho * (q(1, 1) - &gamma) / &gamma;
        let expected = [
            Poly::constant(&xi * &xi / (q(2, 1) * &gamma)),
            -&(&beta * &a1),
            a1.scale(&(hedge - q(5, 1))),
            (&a1 * &a1).scale(&(&sigma * &sigma * b / q(2, 1))),
        ]
        .iter()
        .fold(Poly::zero(), |acc, x| &acc + x);
        assert_eq!(coeffs[1], expected);
    }

    #[test]
    fn constant_guess_gives_single_equation() {
        let d = DegreeSpec {
            eta_sq: vec![q(1, 5)],
            m1: vec![q(1, 8), q(-5, 1)],
            eta_m2: vec![q(0, 1), q(1, 7)],
            m2_sq: vec![q(1, 16)],
        };
        let coeffs = expand_matching_system(&d, &spec(0, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(coeffs.len(), 1);
        assert!(coeffs[0].symbols().contains(&Sym::A(0)));
    }

    #[test]
    fn cubic_top_power_is_bracket_times_a3_squared() {
        let d = quadratic_eta();
        let coeffs = expand_matching_system(&d, &spec(3, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(coeffs.len(), 5);
        let a3 = Poly::sym(Sym::A(3));
        let expected = (&a3 * &a3).scale(&(q(1, 2) * reference().bracket() * q(1, 16)));
        assert_eq!(coeffs[4], expected);
        let r = judge_solvability(&d, &spec(3, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsolvable);
        assert_eq!(r.residual_powers, vec![4]);
        match r.witness.unwrap() {
            Witness::Bracket {
                required_rho_sq,
                feasible,
                ..
            } => {
                assert_eq!(required_rho_sq, 2.0);
                assert!(!feasible);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn higher_orders_leave_powers_n_plus_one_through_2n_minus_2() {
        let r = judge_solvability(&quadratic_eta(), &spec(5, CaseTag::FinGeneral), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsolvable);
        assert_eq!(r.residual_powers, vec![6, 7, 8]);
    }

    #[test]
    fn quadratic_guess_solves_quadratic_eta_spec() {
        for case in [
            CaseTag::InfUnit,
            CaseTag::InfGeneral,
            CaseTag::FinUnit,
            CaseTag::FinGeneral,
        ] {
            let r = judge_solvability(&quadratic_eta(), &spec(2, case), &reference()).unwrap();
            assert_eq!(r.verdict, Verdict::Solvable, "{case}");
            assert_eq!(r.matched_system_size, Some(3));
            assert!(r.hypothesis_holds);
        }
    }

    #[test]
    fn linear_guess_fails_on_quadratic_eta_through_data() {
        let r = judge_solvability(&quadratic_eta(), &spec(1, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsolvable);
        assert!(matches!(r.witness, Some(Witness::Data { power: 2, .. })));
        assert!(!r.hypothesis_holds);
    }

    #[test]
    fn heston_quadratic_guess_hits_the_bracket() {
        let r = judge_solvability(&heston(), &spec(2, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsolvable);
        assert_eq!(r.residual_powers, vec![3]);
        assert!(!r.hypothesis_holds);
    }

    #[test]
    fn finite_equations_carry_derivative_symbols() {
        let coeffs = expand_matching_system(&heston(), &spec(1, CaseTag::FinGeneral), &reference()).unwrap();
        assert!(coeffs[0].symbols().contains(&Sym::DA(0)));
        assert!(coeffs[1].symbols().contains(&Sym::DA(1)));
        assert!(coeffs[1].symbols().contains(&Sym::Zeta(4)));
    }

    #[test]
    fn envelope_violation_is_indeterminate() {
        let mut d = quadratic_eta();
        d.m2_sq = vec![q(1, 16), q(0, 1), q(1, 2)];
        let r = judge_solvability(&d, &spec(3, CaseTag::InfUnit), &reference()).unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn log_utility_bracket_vanishes() {
        let t = TemplateParams::new(q(1, 1), q(-1, 2), q(1, 1));
        let r = judge_solvability(&quadratic_eta(), &spec(4, CaseTag::InfUnit), &t).unwrap();
        assert_eq!(r.verdict, Verdict::Solvable);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(expand_matching_system(&heston(), &spec(-1, CaseTag::InfUnit), &reference()).is_err());
        let t = TemplateParams::new(q(1, 1), q(0, 1), q(1, 2));
        assert!(expand_matching_system(&heston(), &spec(1, CaseTag::InfGeneral), &t).is_err());
        let t = TemplateParams::new(q(2, 1), q(0, 1), q(1, 1));
        assert!(expand_matching_system(&heston(), &spec(1, CaseTag::FinGeneral), &t).is_err());
    }

    #[test]
    fn witness_domain() {
        assert!(witness_infeasible(2.0).unwrap());
        assert!(witness_infeasible(0.5).unwrap());
        assert!(witness_infeasible(1.0).is_err());
        assert!(witness_infeasible(-1.0).is_err());
    }

    #[test]
    fn degree_file_roundtrip() {
        let text = "# square-root market\neta_sq = 0, 49/225\nm1 = 0.1125 -5\neta_m2 = 0, 7/60\nm2_sq = 0, 0.0625\n";
        let d = DegreeSpec::parse(text).unwrap();
        assert_eq!(d, heston());
        assert!(DegreeSpec::parse("eta_sq = 1\n").is_err());
        assert!(DegreeSpec::parse("eta_sq = 1\nm1 = 1\neta_m2 = 1\nm2_sq = 1\nfoo = 2\n").is_err());
    }
}
