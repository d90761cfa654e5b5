use proptest::prelude::*;

use ezvol::ansatz::{
    general_bracket, judge_solvability, unit_bracket, AnsatzSpec, DegreeSpec, TemplateParams, Verdict,
};
use ezvol::finite::{solve_general_eis_finite, solve_unit_eis_finite, RiccatiCoeffs, TimeGrid};
use ezvol::infinite::{solve_general_eis, solve_unit_eis, strategy_infinite, FixedPointOptions};
use ezvol::montecarlo::{simulate_heston, simulate_wealth, summarize, SimConfig};
use ezvol::solution::{solve, SolveOptions};
use ezvol::sweep::{run_sweep, SweepSpec};
use ezvol::verify::{run_all, VerifyOptions};
use ezvol::{validate_market, validate_preferences, CaseTag, Horizon, MarketParams, PreferenceParams};

fn market() -> impl Strategy<Value = MarketParams> {
    (
        0.01..0.08f64,
        0.1..0.8f64,
        1.0..8.0f64,
        0.01..0.06f64,
        0.1..0.4f64,
        -0.9..0.9f64,
    )
        .prop_map(|(r, xi, kappa, theta, sigma, rho)| MarketParams {
            r,
            xi,
            kappa,
            theta,
            sigma,
            rho,
            nu0: theta,
            x0: 1.0,
        })
}

/// Risk aversion above one with EIS below its reciprocal.
fn general_prefs() -> impl Strategy<Value = PreferenceParams> {
    (0.03..0.15f64, 1.2..5.0f64, 0.1..0.95f64).prop_map(|(beta, gamma, frac)| PreferenceParams {
        beta,
        gamma,
        phi: frac / gamma,
        ..PreferenceParams::reference()
    })
}

fn unit_prefs() -> impl Strategy<Value = PreferenceParams> {
    general_prefs().prop_map(|p| p.with_phi(1.0))
}

fn quadratic_eta_degrees() -> DegreeSpec {
    DegreeSpec::parse(include_str!("../../../configs/quadratic_eta_degrees.txt")).unwrap()
}

fn any_case() -> impl Strategy<Value = CaseTag> {
    prop_oneof![
        Just(CaseTag::InfUnit),
        Just(CaseTag::InfGeneral),
        Just(CaseTag::FinUnit),
        Just(CaseTag::FinGeneral)
    ]
}

/// gamma in (0.1, 5) away from 1, rho in [-1, 1], phi in (0.05, 3) away from 1.
fn template() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.1..5.0f64, -1.0..=1.0f64, 0.05..3.0f64).prop_filter("gamma, phi away from 1", |(g, _, f)| {
        (g - 1.0).abs() > 1e-3 && (f - 1.0).abs() > 1e-3
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_idempotent(m in market(), p in general_prefs()) {
        let first = validate_market(&m).merge(validate_preferences(&p));
        prop_assert!(first.is_ok());
        let second = validate_market(&m).merge(validate_preferences(&p));
        prop_assert_eq!(first, second);
    }

    #[test]
    fn unit_root_is_nonnegative_and_solves_quadratic(m in market(), p in unit_prefs()) {
        let Ok(s) = solve_unit_eis(&m, &p) else { return Ok(()) };
        prop_assert!(s.a1 >= 0.0);
        let q = s.quadratic;
        let scale = q.a1.abs() * s.a1 * s.a1 + q.a2.abs() * s.a1 + q.a3.abs();
        prop_assert!(q.eval(s.a1).abs() <= 1e-13 * scale);
        prop_assert_eq!(strategy_infinite(&s, &m, &p, m.theta).c_over_x, p.beta);
    }

    #[test]
    fn general_root_sign_and_fixed_point(m in market(), p in general_prefs()) {
        let Ok((s, lin)) = solve_general_eis(&m, &p, &FixedPointOptions::default()) else { return Ok(()) };
        prop_assert!(-s.a1 / (1.0 - p.phi) >= 0.0);
        prop_assert!((lin.mean_log_cw.exp() - lin.zeta2).abs() <= 1e-11);
        let c = |nu: f64| strategy_infinite(&s, &m, &p, nu).c_over_x;
        prop_assert!(c(0.01) < c(0.05));
    }

    #[test]
    fn infinite_solutions_verify(m in market(), p in general_prefs(), unit in any::<bool>()) {
        let p = if unit { p.with_phi(1.0) } else { p };
        let Ok(sol) = solve(&m, &p, None, &SolveOptions::default()) else { return Ok(()) };
        let report = run_all(&sol, &m, &p, &VerifyOptions::default()).unwrap();
        prop_assert!(report.residual.max_rel <= 1e-10, "{:?}", report.failures);
        prop_assert!(report.foc.iter().all(|f| f.passed), "{:?}", report.failures);
    }

    #[test]
    fn general_and_unit_brackets_agree((gamma, rho, phi) in template()) {
        let lhs = general_bracket(gamma, rho, phi) * (1.0 - phi) * (1.0 - phi);
        let rhs = unit_bracket(gamma, rho);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs() + rho * rho * (1.0 - gamma).powi(2) / gamma));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn finite_paths_hold_boundary_and_sign(m in market(), p in general_prefs(), eps in 0.5..2.0f64) {
        let grid = TimeGrid::new(5.0, 500).unwrap();
        let g = PreferenceParams { epsilon: eps, horizon: Horizon::Finite(5.0), ..p };
        if let Ok(path) = solve_general_eis_finite(&m, &g, &grid) {
            prop_assert_eq!(path.tau[0], 0.0);
            prop_assert_eq!(path.a1[0], 0.0);
            prop_assert_eq!(path.a0[0], (g.phi - 1.0) * eps.ln());
            prop_assert!(path.zeta4.as_ref().unwrap().iter().all(|z| *z > 0.0));
            prop_assert!(path.a1.iter().all(|a| *a <= 0.0));
        }
        let u = g.with_phi(1.0);
        if let Ok(path) = solve_unit_eis_finite(&m, &u, &grid) {
            prop_assert_eq!(path.a1[0], 0.0);
            prop_assert_eq!(path.a0[0], eps.ln());
            prop_assert!(path.a1.iter().all(|a| *a >= 0.0));
        }
    }

    #[test]
    fn unit_riccati_approaches_stationary_root_monotonically(m in market(), p in unit_prefs()) {
        let Ok(inf) = solve_unit_eis(&m, &p) else { return Ok(()) };
        let Ok(ric) = RiccatiCoeffs::unit(&m, &p) else { return Ok(()) };
        let path: Vec<f64> = (0..=400).map(|k| ric.closed_form(0.5 * k as f64)).collect();
        prop_assert!(path.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((path[400] - inf.a1).abs() <= 1e-9 * (1.0 + inf.a1));
    }

    #[test]
    fn high_orders_are_unsolvable_under_constant_vol_of_vol(
        n in 3i64..=8,
        case in any_case(),
        (gamma, rho, phi) in template(),
    ) {
        let t = TemplateParams::from_f64(gamma, rho, phi).unwrap();
        let r = judge_solvability(&quadratic_eta_degrees(), &AnsatzSpec { order: n, case }, &t).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Unsolvable);
        prop_assert!(!r.residual_powers.is_empty());
    }

    #[test]
    fn low_orders_match_n_plus_one_equations(
        n in 0i64..=2,
        case in any_case(),
        (gamma, rho, phi) in template(),
    ) {
        let heston = DegreeSpec::from_market(&MarketParams::reference()).unwrap();
        let constant_eta = DegreeSpec { eta_sq: vec![heston.eta_sq[1].clone()], ..heston.clone() };
        let d = match n {
            0 => constant_eta,
            1 => heston,
            _ => quadratic_eta_degrees(),
        };
        let t = TemplateParams::from_f64(gamma, rho, phi).unwrap();
        let r = judge_solvability(&d, &AnsatzSpec { order: n, case }, &t).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Solvable);
        prop_assert!(r.hypothesis_holds);
        prop_assert_eq!(r.matched_system_size, Some(n as usize + 1));
    }

    #[test]
    fn simulation_is_deterministic_and_positive(seed in any::<u64>(), antithetic in any::<bool>()) {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference();
        let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
        let cfg = SimConfig { n_paths: 20, dt: 0.01, t_sim: 2.0, seed, antithetic, record_every: None };
        let a = simulate_wealth(&m, &p, &sol, &simulate_heston(&m, &cfg).unwrap()).unwrap();
        let b = simulate_wealth(&m, &p, &sol, &simulate_heston(&m, &cfg).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(summarize(&a).positive);
        prop_assert!(a.nu.iter().flatten().all(|v| *v >= 0.0));
    }
}

#[test]
fn rk4_paths_converge_at_fourth_order() {
    let m = MarketParams::reference();
    let p = PreferenceParams::reference().with_horizon(Horizon::Finite(10.0));
    let end = |n: usize| {
        let path = solve_general_eis_finite(&m, &p, &TimeGrid::new(10.0, n).unwrap()).unwrap();
        (path.a0[n], path.a1[n])
    };
    let (c, f, ff) = (end(50), end(100), end(200));
    for (coarse, fine, finest) in [(c.0, f.0, ff.0), (c.1, f.1, ff.1)] {
        let ratio = (coarse - fine).abs() / (fine - finest).abs();
        assert!(ratio.log2() >= 3.5, "observed order {}", ratio.log2());
    }
}

#[test]
fn pi_is_bitwise_constant_in_nu_and_decreasing_in_gamma() {
    let m = MarketParams::reference();
    let p = PreferenceParams::reference().with_horizon(Horizon::Finite(10.0));
    for case in [
        CaseTag::InfUnit,
        CaseTag::InfGeneral,
        CaseTag::FinUnit,
        CaseTag::FinGeneral,
    ] {
        let table = run_sweep(&SweepSpec::over_nu(case), &m, &p, &SolveOptions::default()).unwrap();
        let mut last = f64::INFINITY;
        for g in table.gammas() {
            let curve = table.curve(g);
            assert!(
                curve.iter().all(|r| r.pi.to_bits() == curve[0].pi.to_bits()),
                "{case} gamma {g}"
            );
            assert!(curve[0].pi < last, "{case} gamma {g}");
            last = curve[0].pi;
        }
    }
}
