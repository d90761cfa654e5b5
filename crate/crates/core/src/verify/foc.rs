//! Central-difference check that the solver's controls maximize the
//! Hamiltonian of the HJB equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CaseTag, MarketParams, PreferenceParams};
use crate::solution::Solution;
use crate::verify::aggregator::aggregator_eval;

pub const FOC_TOL: f64 = 1e-5;
const REL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocReport {
    pub t: f64,
    pub x: f64,
    pub nu: f64,
    pub c_star: f64,
    pub psi_star: f64,
    pub hamiltonian: f64,
    pub scale: f64,
    /// `dH/dc * c* / scale`.
    pub dh_dc_rel: f64,
    /// `dH/dpsi * s_psi / scale` with `s_psi = max(|psi*|, sqrt(nu))`.
    pub dh_dpsi_rel: f64,
    /// Second difference of `H` in `psi` with step `0.1 s_psi`.
    pub second_diff_psi: f64,
    /// `H(psi*) - H(psi* + 0.1)`.
    pub perturbed_drop: f64,
    pub passed: bool,
}

/// `omega` and the derivatives entering the control terms.
struct Derivs {
    w: f64,
    wx: f64,
    wxx: f64,
    wxn: f64,
}

fn value_derivs(case: CaseTag, p: &PreferenceParams, lin: f64, a1: f64, x: f64) -> Derivs {
    let g = p.gamma;
    if case == CaseTag::LogUtility {
        return Derivs {
            w: x.ln() + lin,
            wx: 1.0 / x,
            wxx: -1.0 / (x * x),
            wxn: 0.0,
        };
    }
    let k = if case.is_general() {
        -(1.0 - g) / (1.0 - p.phi)
    } else {
        1.0 - g
    };
    let e = (k * lin).exp();
    let wx = x.powf(-g) * e;
    Derivs {
        w: x.powf(1.0 - g) / (1.0 - g) * e,
        wx,
        wxx: -g * wx / x,
        wxn: k * a1 * wx,
    }
}

/// Control-dependent part of the HJB bracket, plus the drift of wealth.
struct Hamiltonian<'a> {
    m: &'a MarketParams,
    p: &'a PreferenceParams,
    d: Derivs,
    x: f64,
    nu: f64,
}

impl Hamiltonian<'_> {
    fn terms(&self, c: f64, psi: f64) -> Result<[f64; 5]> {
        let (m, d, x, nu) = (self.m, &self.d, self.x, self.nu);
        Ok([
            aggregator_eval(c, d.w, self.p)?,
            d.wx * (m.r * x - c),
            d.wx * m.eta(nu) * psi * x,
            0.5 * d.wxx * psi * psi * x * x,
            m.rho * m.m2(nu) * psi * x * d.wxn,
        ])
    }

    fn eval(&self, c: f64, psi: f64) -> Result<f64> {
        Ok(self.terms(c, psi)?.iter().sum())
    }
}

/// Finite differences of the Hamiltonian around the solver's controls at
/// calendar time `t`, wealth `x`, variance `nu`.
pub fn foc_gradient_check(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    t: f64,
    x: f64,
    nu: f64,
) -> Result<FocReport> {
    if !(x > 0.0 && nu > 0.0) {
        return Err(Error::Domain(format!("need x > 0 and nu > 0 (got x={x}, nu={nu})")));
    }
    let (a0, a1) = match solution {
        Solution::Infinite { solution: s, .. } => (s.a0, s.a1),
        Solution::Finite(path) => {
            let tau = path.horizon() - t;
            (path.a0_at(tau), path.a1_at(tau))
        }
    };
    let strat = solution.strategy(m, p, t, nu)?;
    let c_star = strat.c_over_x * x;
    let psi_star = strat.psi;
    let d = value_derivs(solution.case(), p, a0 + a1 * nu, a1, x);
    let ham = Hamiltonian { m, p, d, x, nu };

    let terms = ham.terms(c_star, psi_star)?;
    let h0: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let dc = REL_STEP * c_star;
    if c_star - dc <= 0.0 {
        return Err(Error::Domain("perturbed consumption left (0, inf)".into()));
    }
    let dh_dc = (ham.eval(c_star + dc, psi_star)? - ham.eval(c_star - dc, psi_star)?) / (2.0 * dc);
    let s_psi = psi_star.abs().max(nu.sqrt());
    let dp = REL_STEP * s_psi;
    let dh_dpsi = (ham.eval(c_star, psi_star + dp)? - ham.eval(c_star, psi_star - dp)?) / (2.0 * dp);
    let big = 0.1 * s_psi;
    let second = ham.eval(c_star, psi_star + big)? - 2.0 * h0 + ham.eval(c_star, psi_star - big)?;
    let drop = h0 - ham.eval(c_star, psi_star + 0.1)?;

    let dh_dc_rel = (dh_dc * c_star / scale).abs();
    let dh_dpsi_rel = (dh_dpsi * s_psi / scale).abs();
    let passed = dh_dc_rel <= FOC_TOL && dh_dpsi_rel <= FOC_TOL && second < 0.0 && drop > 0.0;
    Ok(FocReport {
        t,
        x,
        nu,
        c_star,
        psi_star,
        hamiltonian: h0,
        scale,
        dh_dc_rel,
        dh_dpsi_rel,
        second_diff_psi: second,
        perturbed_drop: drop,
        passed,
    })
}

/// `count` checks at seeded random states: `x` in `[0.5, 2]`, `nu` in
/// `[0.005, 0.09]`, and for finite horizons `t` in `[0, T]`.
pub fn foc_random_checks(
    solution: &Solution,
    m: &MarketParams,
    p: &PreferenceParams,
    count: usize,
    seed: u64,
) -> Result<Vec<FocReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = solution.as_path().map(|path| path.horizon());
    (0..count)
        .map(|_| {
            let x = rng.random_range(0.5..=2.0);
            let nu = rng.random_range(0.005..=0.09);
            let t = horizon.map_or(0.0, |h| rng.random_range(0.0..=h));
            foc_gradient_check(solution, m, p, t, x, nu)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Horizon;
    use crate::solution::{solve, SolveOptions};

    fn solved(p: &PreferenceParams) -> Solution {
        solve(&MarketParams::reference(), p, None, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn stationary_at_reference_point() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference().with_phi(1.0);
        let r = foc_gradient_check(&solved(&p), &m, &p, 0.0, 1.0, m.theta).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.perturbed_drop > 0.0);
    }

    #[test]
    fn all_cases_pass_at_random_states() {
        let m = MarketParams::reference();
        let base = PreferenceParams::reference();
        let fin = Horizon::Finite(10.0);
        for p in [
            base,
            base.with_phi(1.0),
            base.with_horizon(fin),
            base.with_phi(1.0).with_horizon(fin),
            base.with_phi(1.0).with_gamma(1.0),
        ] {
            for r in foc_random_checks(&solved(&p), &m, &p, 20, 7).unwrap() {
                assert!(r.passed, "{p:?}: {r:?}");
            }
        }
    }
}
