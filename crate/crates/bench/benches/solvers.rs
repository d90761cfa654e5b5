use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ezvol::ansatz::{judge_solvability, AnsatzSpec, DegreeSpec, TemplateParams};
use ezvol::finite::{solve_general_eis_finite, solve_unit_eis_finite, TimeGrid};
use ezvol::infinite::{solve_general_eis, solve_unit_eis, FixedPointOptions};
use ezvol::montecarlo::{simulate_heston, SimConfig};
use ezvol::solution::{solve, SolveOptions};
use ezvol::verify::{pde_oracle_finite_unit, run_all, OracleMesh, VerifyOptions};
use ezvol::{CaseTag, Horizon, MarketParams, PreferenceParams};

fn infinite(c: &mut Criterion) {
    let m = MarketParams::reference();
    let p = PreferenceParams::reference();
    c.bench_function("infinite/unit", |b| {
        b.iter(|| solve_unit_eis(black_box(&m), &p.with_phi(1.0)))
    });
    c.bench_function("infinite/general", |b| {
        b.iter(|| solve_general_eis(black_box(&m), &p, &FixedPointOptions::default()))
    });
}

fn finite(c: &mut Criterion) {
    let m = MarketParams::reference();
    let p = PreferenceParams::reference().with_horizon(Horizon::Finite(10.0));
    let grid = TimeGrid::new(10.0, 1000).unwrap();
    c.bench_function("finite/unit_1000", |b| {
        b.iter(|| solve_unit_eis_finite(black_box(&m), &p.with_phi(1.0), &grid))
    });
    c.bench_function("finite/general_1000", |b| {
        b.iter(|| solve_general_eis_finite(black_box(&m), &p, &grid))
    });
}

fn ansatz(c: &mut Criterion) {
    let d = DegreeSpec::from_market(&MarketParams::reference()).unwrap();
    let t = TemplateParams::from_f64(2.0, -0.5, 0.125).unwrap();
    let mut g = c.benchmark_group("ansatz");
    for order in [2, 5, 8] {
        g.bench_function(format!("fin_general_order_{order}"), |b| {
            b.iter(|| {
                judge_solvability(
                    &d,
                    &AnsatzSpec {
                        order,
                        case: CaseTag::FinGeneral,
                    },
                    black_box(&t),
                )
            })
        });
    }
    g.finish();
}

fn checks(c: &mut Criterion) {
    let m = MarketParams::reference();
    let p = PreferenceParams::reference().with_horizon(Horizon::Finite(10.0));
    let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
    let mut g = c.benchmark_group("checks");
    g.sample_size(10);
    g.bench_function("verify_fin_general", |b| {
        b.iter(|| run_all(&sol, &m, &p, &VerifyOptions::default()))
    });
    g.bench_function("oracle_fin_unit", |b| {
        b.iter(|| pde_oracle_finite_unit(&m, &p.with_phi(1.0), &OracleMesh::default()))
    });
    let cfg = SimConfig {
        n_paths: 1000,
        ..SimConfig::default()
    };
    g.bench_function("heston_1000_paths", |b| b.iter(|| simulate_heston(&m, black_box(&cfg))));
    g.finish();
}

criterion_group!(benches, infinite, finite, ansatz, checks);
criterion_main!(benches);
