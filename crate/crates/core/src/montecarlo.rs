//! Monte Carlo simulation of the variance process and of wealth under the
//! solver's strategy.
//!
//! Every path draws from its own ChaCha8 stream selected by the path index
//! (antithetic pairs share one stream with negated normals), so a path can be
//! regenerated exactly without storing its noise.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{CaseTag, Horizon, MarketParams, PreferenceParams};
use crate::solution::Solution;

pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), one stream per path, inverse-CDF normals";
pub const SCHEME: &str = "full-truncation Euler for variance, log-Euler for wealth";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub t_sim: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Steps between stored nodes; `None` stores 11 evenly spaced nodes
    /// (or every node when there are fewer than 10 steps).
    pub record_every: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            dt: 0.005,
            t_sim: 10.0,
            seed: 42,
            antithetic: false,
            record_every: None,
        }
    }
}

impl SimConfig {
    pub fn n_steps(&self) -> Result<usize> {
        if self.n_paths == 0 {
            return Err(Error::InvalidInput("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.t_sim > 0.0 && self.dt.is_finite() && self.t_sim.is_finite()) {
            return Err(Error::InvalidInput("dt and t_sim must be > 0".into()));
        }
        let ratio = self.t_sim / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 1.0 {
            return Err(Error::InvalidInput(format!(
                "t_sim / dt = {ratio} is not an integer number of steps"
            )));
        }
        Ok(n as usize)
    }

    fn stride(&self, n_steps: usize) -> usize {
        match self.record_every {
            Some(k) => k.clamp(1, n_steps),
            None if n_steps >= 10 && n_steps % 10 == 0 => n_steps / 10,
            None => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub config: SimConfig,
    pub market: MarketParams,
    /// Stored time nodes (every `stride` steps, always including both ends).
    pub times: Vec<f64>,
    pub stride: usize,
    /// `nu[path][node]`, truncated at zero.
    pub nu: Vec<Vec<f64>>,
    pub log_wealth: Option<Vec<Vec<f64>>>,
    pub c_over_x: Option<Vec<Vec<f64>>>,
    /// Smallest and largest consumption ratio over every step of every path.
    pub c_over_x_range: Option<(f64, f64)>,
    pub generator: String,
    pub scheme: String,
}

/// Normal draws for one path: `(z_nu, z_perp)` per step.
struct PathNoise {
    rng: ChaCha8Rng,
    sign: f64,
    normal: Normal,
}

impl PathNoise {
    fn new(cfg: &SimConfig, path: usize) -> Self {
        let (stream, sign) = if cfg.antithetic {
            ((path / 2) as u64, if path % 2 == 0 { 1.0 } else { -1.0 })
        } else {
            (path as u64, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Self {
            rng,
            sign,
            normal: Normal::standard(),
        }
    }

    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> (f64, f64) {
        let (u, v) = (self.uniform(), self.uniform());
        let (a, b) = (self.normal.inverse_cdf(u), self.normal.inverse_cdf(v));
        (self.sign * a, self.sign * b)
    }
}

fn cir_step(m: &MarketParams, nu: f64, dt: f64, sqrt_dt: f64, z: f64) -> f64 {
    let pos = nu.max(0.0);
    nu + m.kappa * (m.theta - pos) * dt + m.sigma * pos.sqrt() * sqrt_dt * z
}

fn record_times(n_steps: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..=n_steps).step_by(stride).collect();
    if *idx.last().unwrap() != n_steps {
        idx.push(n_steps);
    }
    idx
}

/// Variance paths from `nu0` by full-truncation Euler.
pub fn simulate_heston(m: &MarketParams, cfg: &SimConfig) -> Result<PathEnsemble> {
    let n_steps = cfg.n_steps()?;
    let stride = cfg.stride(n_steps);
    let nodes = record_times(n_steps, stride);
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let mut nu_all = Vec::with_capacity(cfg.n_paths);
    for path in 0..cfg.n_paths {
        let mut noise = PathNoise::new(cfg, path);
        let mut nu = m.nu0;
        let mut rec = Vec::with_capacity(nodes.len());
        rec.push(nu.max(0.0));
        let mut next = 1;
        for k in 1..=n_steps {
            let (z, _) = noise.next();
            nu = cir_step(m, nu, dt, sqrt_dt, z);
            if next < nodes.len() && nodes[next] == k {
                rec.push(nu.max(0.0));
                next += 1;
            }
        }
        nu_all.push(rec);
    }
    Ok(PathEnsemble {
        config: *cfg,
        market: *m,
        times: nodes.iter().map(|&k| k as f64 * dt).collect(),
        stride,
        nu: nu_all,
        log_wealth: None,
        c_over_x: None,
        c_over_x_range: None,
        generator: GENERATOR.into(),
        scheme: SCHEME.into(),
    })
}

/// Strategy ingredients at one time step: `pi`, and the consumption ratio
/// as `exp(ln_scale - a1 nu)` (general EIS) or a constant.
#[derive(Clone, Copy)]
enum Consumption {
    Constant(f64),
    Exponential { ln_scale: f64, a1: f64 },
}

impl Consumption {
    fn at(self, nu: f64) -> f64 {
        match self {
            Consumption::Constant(c) => c,
            Consumption::Exponential { ln_scale, a1 } => (ln_scale - a1 * nu).exp(),
        }
    }
}

fn step_strategy(solution: &Solution, m: &MarketParams, p: &PreferenceParams, t: f64) -> Result<(f64, Consumption)> {
    let pi = solution.strategy(m, p, t, 1.0)?.pi;
    let cons = if solution.case().is_general() {
        let (a0, a1) = match solution {
            Solution::Infinite { solution: s, .. } => (s.a0, s.a1),
            Solution::Finite(path) => {
                let tau = path.horizon() - t;
                (path.a0_at(tau), path.a1_at(tau))
            }
        };
        Consumption::Exponential {
            ln_scale: p.phi * p.beta.ln() - a0,
            a1,
        }
    } else {
        Consumption::Constant(p.beta)
    };
    Ok((pi, cons))
}

/// Attaches log-wealth and consumption-ratio series by re-running each
/// path's variance with the same noise and applying the solver's strategy.
pub fn simulate_wealth(
    m: &MarketParams,
    p: &PreferenceParams,
    solution: &Solution,
    ensemble: &PathEnsemble,
) -> Result<PathEnsemble> {
    let cfg = ensemble.config;
    let n_steps = cfg.n_steps()?;
    if ensemble.market != *m {
        return Err(Error::GridMismatch(
            "ensemble was simulated with different market parameters".into(),
        ));
    }
    if ensemble.nu.len() != cfg.n_paths {
        return Err(Error::GridMismatch(
            "ensemble path count differs from its configuration".into(),
        ));
    }
    if let Horizon::Finite(t) = p.horizon {
        if cfg.t_sim > t * (1.0 + 1e-12) {
            return Err(Error::GridMismatch(format!(
                "simulation horizon {} exceeds the investment horizon {t}",
                cfg.t_sim
            )));
        }
    }
    let nodes = record_times(n_steps, ensemble.stride);
    if nodes.len() != ensemble.times.len() {
        return Err(Error::GridMismatch(
            "stored nodes do not match the configuration".into(),
        ));
    }
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let rho_perp = (1.0 - m.rho * m.rho).max(0.0).sqrt();
    let table: Vec<(f64, Consumption)> = (0..n_steps)
        .map(|k| step_strategy(solution, m, p, k as f64 * dt))
        .collect::<Result<_>>()?;
    let last = step_strategy(solution, m, p, (n_steps as f64 * dt).min(cfg.t_sim))?;

    let mut lw_all = Vec::with_capacity(cfg.n_paths);
    let mut cx_all = Vec::with_capacity(cfg.n_paths);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for path in 0..cfg.n_paths {
        let mut noise = PathNoise::new(&cfg, path);
        let mut nu = m.nu0;
        let mut lw = m.x0.ln();
        let mut lw_rec = Vec::with_capacity(nodes.len());
        let mut cx_rec = Vec::with_capacity(nodes.len());
        let mut next = 0;
        for (k, &(pi, cons)) in table.iter().enumerate() {
            let pos = nu.max(0.0);
            let c = cons.at(pos);
            lo = lo.min(c);
            hi = hi.max(c);
            if next < nodes.len() && nodes[next] == k {
                lw_rec.push(lw);
                cx_rec.push(c);
                next += 1;
            }
            let (z_nu, z_perp) = noise.next();
            let drift = m.r + m.xi * pos * pi - c - 0.5 * pi * pi * pos;
            lw += drift * dt + pi * pos.sqrt() * sqrt_dt * (m.rho * z_nu + rho_perp * z_perp);
            nu = cir_step(m, nu, dt, sqrt_dt, z_nu);
        }
        let c_end = last.1.at(nu.max(0.0));
        lo = lo.min(c_end);
        hi = hi.max(c_end);
        lw_rec.push(lw);
        cx_rec.push(c_end);
        lw_all.push(lw_rec);
        cx_all.push(cx_rec);
    }
    let mut out = ensemble.clone();
    out.log_wealth = Some(lw_all);
    out.c_over_x = Some(cx_all);
    out.c_over_x_range = Some((lo, hi));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub mean_nu: Vec<f64>,
    /// Standard error of `mean_nu`; `None` with one path.
    pub se_nu: Option<Vec<f64>>,
    /// `theta + (nu0 - theta) exp(-kappa t)` at the stored nodes.
    pub cir_mean: Vec<f64>,
    pub terminal_wealth_mean: Option<f64>,
    pub terminal_wealth_std: Option<f64>,
    pub terminal_log_wealth_mean: Option<f64>,
    /// Standard error of the terminal log-wealth mean; antithetic pairs are
    /// averaged first.
    pub terminal_log_wealth_se: Option<f64>,
    pub c_over_x_min: Option<f64>,
    pub c_over_x_max: Option<f64>,
    pub positive: bool,
}

fn mean_var(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = (xs.len() > 1).then(|| xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
    (mean, var)
}

/// Standard error of the mean of `xs`, treating consecutive pairs as one
/// sample when `paired`.
fn standard_error(xs: &[f64], paired: bool) -> Option<f64> {
    if paired && xs.len() >= 4 {
        let pairs: Vec<f64> = xs.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        let (_, var) = mean_var(&pairs);
        return var.map(|v| (v / pairs.len() as f64).sqrt());
    }
    mean_var(xs).1.map(|v| (v / xs.len() as f64).sqrt())
}

pub fn summarize(ensemble: &PathEnsemble) -> SimSummary {
    let m = &ensemble.market;
    let paired = ensemble.config.antithetic;
    let n = ensemble.nu.len();
    let column = |rows: &Vec<Vec<f64>>, j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let mut mean_nu = Vec::new();
    let mut se_nu = Vec::new();
    for j in 0..ensemble.times.len() {
        let col = column(&ensemble.nu, j);
        mean_nu.push(mean_var(&col).0);
        se_nu.push(standard_error(&col, paired));
    }
    let se_nu = se_nu.into_iter().collect::<Option<Vec<f64>>>();
    let cir_mean = ensemble
        .times
        .iter()
        .map(|t| m.theta + (m.nu0 - m.theta) * (-m.kappa * t).exp())
        .collect();
    let (mut tw_mean, mut tw_std, mut tl_mean, mut tl_se) = (None, None, None, None);
    let mut positive = true;
    if let Some(lw) = &ensemble.log_wealth {
        let last = ensemble.times.len() - 1;
        let logs = column(lw, last);
        positive = lw.iter().flatten().all(|v| v.is_finite());
        let wealth: Vec<f64> = logs.iter().map(|v| v.exp()).collect();
        positive &= wealth.iter().all(|w| *w > 0.0);
        let (wm, wv) = mean_var(&wealth);
        tw_mean = Some(wm);
        tw_std = wv.map(f64::sqrt);
        tl_mean = Some(mean_var(&logs).0);
        tl_se = standard_error(&logs, paired);
    }
    let (c_min, c_max) = match ensemble.c_over_x_range {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    SimSummary {
        n_paths: n,
        times: ensemble.times.clone(),
        mean_nu,
        se_nu,
        cir_mean,
        terminal_wealth_mean: tw_mean,
        terminal_wealth_std: tw_std,
        terminal_log_wealth_mean: tl_mean,
        terminal_log_wealth_se: tl_se,
        c_over_x_min: c_min,
        c_over_x_max: c_max,
        positive,
    }
}

/// Per-path rows `path, t, nu, X, c_over_x` at the stored nodes.
pub fn write_paths_csv<W: std::io::Write>(ensemble: &PathEnsemble, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path", "t", "nu", "X", "c_over_x"])?;
    for (i, nus) in ensemble.nu.iter().enumerate() {
        for (j, t) in ensemble.times.iter().enumerate() {
            let x = ensemble.log_wealth.as_ref().map(|lw| lw[i][j].exp());
            let c = ensemble.c_over_x.as_ref().map(|cx| cx[i][j]);
            out.serialize((i, t, nus[j], x, c))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// True when every path's consumption ratio is constant and equal to `beta`,
/// which the unit-EIS cases require.
pub fn consumption_is_beta(ensemble: &PathEnsemble, p: &PreferenceParams, case: CaseTag) -> bool {
    !case.is_general() && ensemble.c_over_x_range == Some((p.beta, p.beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::{solve, SolveOptions};

    fn cfg(n: usize) -> SimConfig {
        SimConfig {
            n_paths: n,
            dt: 0.01,
            t_sim: 2.0,
            seed: 7,
            antithetic: false,
            record_every: None,
        }
    }

    #[test]
    fn same_seed_same_ensemble() {
        let m = MarketParams::reference();
        let a = simulate_heston(&m, &cfg(50)).unwrap();
        let b = simulate_heston(&m, &cfg(50)).unwrap();
        assert_eq!(a, b);
        let c = simulate_heston(&m, &SimConfig { seed: 8, ..cfg(50) }).unwrap();
        assert_ne!(a.nu, c.nu);
    }

    #[test]
    fn noiseless_variance_follows_euler_relaxation() {
        let m = MarketParams {
            sigma: 0.0,
            ..MarketParams::reference()
        };
        let e = simulate_heston(&m, &cfg(3)).unwrap();
        for (j, t) in e.times.iter().enumerate() {
            let k = (t / 0.01).round() as i32;
            let euler = m.theta + (m.nu0 - m.theta) * (1.0 - m.kappa * 0.01).powi(k);
            assert!((e.nu[0][j] - euler).abs() < 1e-15);
            let exact = m.theta + (m.nu0 - m.theta) * (-m.kappa * t).exp();
            assert!((e.nu[0][j] - exact).abs() < 2e-3);
        }
    }

    #[test]
    fn deterministic_wealth_without_risk() {
        let m = MarketParams {
            xi: 0.0,
            ..MarketParams::reference()
        };
        let p = PreferenceParams::reference().with_phi(1.0);
        let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
        assert_eq!(sol.strategy(&m, &p, 0.0, m.theta).unwrap().pi, 0.0);
        let e = simulate_wealth(&m, &p, &sol, &simulate_heston(&m, &cfg(4)).unwrap()).unwrap();
        let lw = e.log_wealth.unwrap();
        let expected = (m.r - p.beta) * 2.0;
        for path in &lw {
            assert!((path.last().unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn single_path_has_no_spread() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference().with_phi(1.0);
        let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
        let e = simulate_wealth(&m, &p, &sol, &simulate_heston(&m, &cfg(1)).unwrap()).unwrap();
        let s = summarize(&e);
        assert!(s.positive);
        assert!(s.se_nu.is_none() && s.terminal_wealth_std.is_none());
        assert_eq!(s.c_over_x_min, Some(0.08));
        assert_eq!(s.c_over_x_max, Some(0.08));
    }

    #[test]
    fn finite_horizon_shorter_than_simulation_is_rejected() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference().with_horizon(Horizon::Finite(1.0));
        let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
        let e = simulate_heston(&m, &cfg(2)).unwrap();
        assert!(matches!(simulate_wealth(&m, &p, &sol, &e), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn general_consumption_tracks_variance() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference().with_horizon(Horizon::Finite(2.0));
        let sol = solve(&m, &p, None, &SolveOptions::default()).unwrap();
        let e = simulate_wealth(&m, &p, &sol, &simulate_heston(&m, &cfg(20)).unwrap()).unwrap();
        let cx = e.c_over_x.as_ref().unwrap();
        let j = 3;
        let t = e.times[j];
        let mut pairs: Vec<(f64, f64)> = (0..20).map(|i| (e.nu[i][j], cx[i][j])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].0 == w[1].0 || w[0].1 < w[1].1));
        for (nu, c) in &pairs {
            let s = sol.strategy(&m, &p, t, *nu).unwrap();
            assert!((s.c_over_x - c).abs() <= 1e-14 * c);
        }
    }

    #[test]
    fn non_integral_step_count_is_rejected() {
        let c = SimConfig {
            dt: 0.3,
            t_sim: 1.0,
            ..cfg(1)
        };
        assert!(c.n_steps().is_err());
    }
}
