use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use ezvol::ansatz::{judge_solvability, AnsatzSpec, DegreeSpec, TemplateParams};
use ezvol::exact::parse_rational;
use ezvol::montecarlo::{simulate_heston, simulate_wealth, summarize, write_paths_csv, SimConfig};
use ezvol::solution::{solve as solve_case, Solution};
use ezvol::sweep::{run_sweep, Axis, SweepSpec};
use ezvol::verify::{pde_oracle_finite_general, pde_oracle_finite_unit, run_all, OracleMesh, VerifyOptions};
use ezvol::{CaseTag, Error, Horizon, MarketParams, Result};

use crate::config::RunConfig;
use crate::{AnsatzArgs, CaseArg, OracleArgs, SimulateArgs, SolveArgs, SweepArgs, VerifyArgs};

pub enum Outcome {
    Ok,
    CheckFailed(String),
}

fn requested(case: &CaseArg) -> Result<Option<CaseTag>> {
    match case.case.as_str() {
        "auto" => Ok(None),
        s => s.parse().map(Some),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    match out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn path_csv_for(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.path.csv"))
}

fn solve_from(cfg: &RunConfig, case: &CaseArg) -> Result<Solution> {
    solve_case(&cfg.market, &cfg.prefs, requested(case)?, &cfg.solve)
}

pub fn solve(a: &SolveArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let sol = solve_from(&cfg, &a.case)?;
    let (m, p) = (&cfg.market, &cfg.prefs);
    let s = sol.strategy(m, p, 0.0, m.theta)?;
    let strategy = json!({ "t": 0.0, "nu": m.theta, "c_over_x": s.c_over_x, "pi": s.pi, "psi": s.psi });
    let body = match &sol {
        Solution::Infinite {
            solution,
            linearization,
        } => json!({
            "case": sol.case(),
            "horizon": "inf",
            "A0": solution.a0,
            "A1": solution.a1,
            "zeta1": linearization.as_ref().map(|l| l.zeta1),
            "zeta2": linearization.as_ref().map(|l| l.zeta2),
            "strategy": strategy,
            "diagnostics": {
                "quadratic": solution.quadratic,
                "linearization": linearization,
                "notes": solution.notes,
            },
        }),
        Solution::Finite(path) => {
            let csv_path = a.path_csv.clone().or_else(|| a.out.as_deref().map(path_csv_for));
            let path_ref = match &csv_path {
                Some(f) => {
                    let mut w = create(f)?;
                    path.write_csv(&mut w)?;
                    w.flush()?;
                    json!(f.display().to_string())
                }
                None => Value::Null,
            };
            let last = path.tau.len() - 1;
            let at_start = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v[last]);
            let mut body = json!({
                "case": sol.case(),
                "horizon": path.horizon(),
                "A0_at_t0": path.a0[last],
                "A1_at_t0": path.a1[last],
                "path_csv": path_ref,
                "zeta3_at_t0": at_start(&path.zeta3),
                "zeta4_at_t0": at_start(&path.zeta4),
                "strategy": strategy,
                "diagnostics": {
                    "method": path.method,
                    "n_steps": path.grid.n_steps,
                    "riccati": path.riccati,
                    "A1_min": path.a1.iter().copied().fold(f64::INFINITY, f64::min),
                    "A1_max": path.a1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    "notes": path.notes,
                },
            });
            if csv_path.is_none() {
                body["path"] = serde_json::to_value(path)?;
            }
            body
        }
    };
    emit_json(a.out.as_deref(), &body)?;
    Ok(Outcome::Ok)
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let mut sol = solve_from(&cfg, &a.case)?;
    match (&mut sol, a.override_a1) {
        (Solution::Infinite { solution, .. }, Some(v)) => solution.a1 = v,
        (Solution::Finite(_), Some(_)) => {
            return Err(Error::InvalidInput(
                "--override-a1 applies to infinite horizons; use --scale-a1 for a path".into(),
            ))
        }
        _ => {}
    }
    if let Some(f) = a.scale_a1 {
        match &mut sol {
            Solution::Infinite { solution, .. } => solution.a1 *= f,
            Solution::Finite(path) => path.a1.iter_mut().for_each(|x| *x *= f),
        }
    }
    let opts = VerifyOptions {
        residual_tol: a.tol,
        foc_points: a.points,
        seed: a.seed,
    };
    let report = run_all(&sol, &cfg.market, &cfg.prefs, &opts)?;
    emit_json(a.out.as_deref(), &serde_json::to_value(&report)?)?;
    if report.passed {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::CheckFailed(report.failures.join("; ")))
    }
}

pub fn ansatz(a: &AnsatzArgs) -> Result<Outcome> {
    let degrees = match (&a.degrees, &a.config) {
        (Some(f), _) => {
            let text = std::fs::read_to_string(f)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", f.display())))?;
            DegreeSpec::parse(&text)?
        }
        (None, Some(c)) => DegreeSpec::from_market(&RunConfig::load(c)?.market)?,
        (None, None) => DegreeSpec::from_market(&MarketParams::reference())?,
    };
    let spec = AnsatzSpec {
        order: a.order,
        case: a.case.parse()?,
    };
    let params = TemplateParams::new(
        parse_rational(&a.gamma)?,
        parse_rational(&a.rho)?,
        parse_rational(&a.phi)?,
    );
    let report = judge_solvability(&degrees, &spec, &params)?;
    emit_json(a.out.as_deref(), &serde_json::to_value(&report)?)?;
    Ok(Outcome::Ok)
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let sol = solve_from(&cfg, &a.case)?;
    let t_sim = a.t_sim.unwrap_or(match cfg.prefs.horizon {
        Horizon::Finite(t) => t.min(10.0),
        Horizon::Infinite => 10.0,
    });
    let sim = SimConfig {
        n_paths: a.paths,
        dt: a.dt,
        t_sim,
        seed: a.seed,
        antithetic: a.antithetic,
        record_every: a.record_every,
    };
    let ensemble = simulate_heston(&cfg.market, &sim)?;
    let ensemble = simulate_wealth(&cfg.market, &cfg.prefs, &sol, &ensemble)?;
    if let Some(f) = &a.paths_csv {
        let mut w = create(f)?;
        write_paths_csv(&ensemble, &mut w)?;
        w.flush()?;
    }
    let body = json!({
        "case": sol.case(),
        "config": sim,
        "generator": ensemble.generator,
        "scheme": ensemble.scheme,
        "summary": summarize(&ensemble),
    });
    emit_json(a.out.as_deref(), &body)?;
    Ok(Outcome::Ok)
}

pub fn oracle(a: &OracleArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    if !cfg.prefs.horizon.is_finite() {
        return Err(Error::InvalidInput("the PDE oracle needs a finite horizon T".into()));
    }
    let case = solve_from(&cfg, &a.case)?.case();
    let mesh = OracleMesh {
        nu_min: a.nu_min,
        nu_max: a.nu_max,
        n_nu: a.n_nu,
        n_tau: a.n_tau,
        stored_rows: a.rows,
    };
    let run = |mesh: &OracleMesh| match case {
        CaseTag::FinGeneral => pde_oracle_finite_general(&cfg.market, &cfg.prefs, mesh),
        _ => pde_oracle_finite_unit(&cfg.market, &cfg.prefs, mesh),
    };
    let cmp = run(&mesh)?;
    if let Some(f) = &a.csv {
        let mut w = create(f)?;
        cmp.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut body = json!({
        "case": case,
        "mesh": mesh,
        "max_rel_diff": cmp.max_rel_diff,
        "substeps": cmp.substeps,
        "tol": a.tol,
    });
    if a.refine {
        let fine_mesh = mesh.refined();
        let fine = run(&fine_mesh)?;
        body["refined"] = json!({
            "mesh": fine_mesh,
            "max_rel_diff": fine.max_rel_diff,
            "substeps": fine.substeps,
            "improvement": cmp.max_rel_diff / fine.max_rel_diff,
        });
    }
    emit_json(a.out.as_deref(), &body)?;
    if cmp.max_rel_diff <= a.tol {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "max_rel_diff {:e} > {:e}",
            cmp.max_rel_diff, a.tol
        )))
    }
}

fn parse_gammas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| {
            g.parse::<f64>()
                .map_err(|_| Error::Parse(format!("gamma `{g}` is not a number")))
        })
        .collect()
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let horizon = cfg.prefs.horizon.years().unwrap_or(10.0);
    let mut spec = match (a.preset, &a.axis) {
        (Some(n), _) => SweepSpec::preset(n, horizon)?,
        (None, Some(axis)) => {
            let case = match &a.case {
                Some(c) => c.parse()?,
                None => ezvol::classify_case(&cfg.market, &cfg.prefs)?,
            };
            match axis.parse::<Axis>()? {
                Axis::Nu => SweepSpec::over_nu(case),
                Axis::T => SweepSpec::over_t(case, horizon),
                Axis::Gamma => SweepSpec::over_gamma(case),
            }
        }
        (None, None) => return Err(Error::InvalidInput("give --preset or --axis".into())),
    };
    if a.preset.is_some() {
        if let Some(axis) = &a.axis {
            spec.axis = axis.parse()?;
        }
        if let Some(c) = &a.case {
            spec.case = c.parse()?;
        }
    }
    if let Some(v) = a.min {
        spec.min = v;
    }
    if let Some(v) = a.max {
        spec.max = v;
    }
    if let Some(v) = a.count {
        spec.count = v;
    }
    if let Some(g) = &a.gammas {
        spec.gammas = parse_gammas(g)?;
    }
    if let Some(v) = a.t_eval {
        spec.t_eval = v;
    }
    if a.nu_eval.is_some() {
        spec.nu_eval = a.nu_eval;
    }
    let table = run_sweep(&spec, &cfg.market, &cfg.prefs, &cfg.solve)?;
    match &a.out {
        Some(f) => {
            let mut w = create(f)?;
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(Outcome::Ok)
}
