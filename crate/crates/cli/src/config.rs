//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use ezvol::infinite::FixedPointOptions;
use ezvol::solution::SolveOptions;
use ezvol::{Error, Horizon, MarketParams, PreferenceParams, Result};

/// Help text listing every key.
pub const KEYS_HELP: &str = "\
Config file: one `key = value` per line, `#` starts a comment. Unknown keys are errors.

Market (required unless noted):
  r         riskless rate r
  xi        risk-premium loading xi (market price of risk xi*sqrt(nu))
  kappa     mean-reversion speed kappa of the variance
  theta     long-run variance theta
  sigma     volatility of variance sigma
  rho       correlation rho between stock and variance shocks, in [-1, 1]
  nu0       initial variance nu_0 (default theta)
  x0        initial wealth X_0 (default 1)
Preferences:
  beta      time preference beta
  gamma     relative risk aversion gamma
  phi       elasticity of intertemporal substitution phi
  epsilon   bequest weight epsilon (default 1)
  T         horizon in years, or `inf` (default inf)
Solver (optional):
  n_steps        time steps for finite horizons (default 100 per year, at least 100)
  damping        weight of the new iterate in the linearization fixed point (default 0.5)
  fp_tol         fixed-point tolerance (default 1e-12)
  max_iter       fixed-point iteration limit (default 500)
  expansion_nu   variance level of the linearization (default theta)";

const KEYS: [&str; 18] = [
    "r",
    "xi",
    "kappa",
    "theta",
    "sigma",
    "rho",
    "nu0",
    "x0",
    "beta",
    "gamma",
    "phi",
    "epsilon",
    "T",
    "n_steps",
    "damping",
    "fp_tol",
    "max_iter",
    "expansion_nu",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub market: MarketParams,
    pub prefs: PreferenceParams,
    pub solve: SolveOptions,
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: `{v}` is not a number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Parse(format!("{key}: `{v}` is not a nonnegative integer")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Parse(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if kv.insert(k, v).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key `{k}`", i + 1)));
            }
        }
        let req = |k: &str| -> Result<f64> {
            let v = kv.get(k).ok_or_else(|| Error::Parse(format!("missing key `{k}`")))?;
            number(k, v)
        };
        let opt = |k: &str, default: f64| -> Result<f64> { kv.get(k).map_or(Ok(default), |v| number(k, v)) };

        let theta = req("theta")?;
        let market = MarketParams {
            r: req("r")?,
            xi: req("xi")?,
            kappa: req("kappa")?,
            theta,
            sigma: req("sigma")?,
            rho: req("rho")?,
            nu0: opt("nu0", theta)?,
            x0: opt("x0", 1.0)?,
        };
        let horizon = match kv.get("T").copied() {
            None | Some("inf") | Some("infinite") => Horizon::Infinite,
            Some(v) => Horizon::Finite(number("T", v)?),
        };
        let prefs = PreferenceParams {
            beta: req("beta")?,
            gamma: req("gamma")?,
            phi: req("phi")?,
            epsilon: opt("epsilon", 1.0)?,
            horizon,
        };
        let defaults = FixedPointOptions::default();
        let fixed_point = FixedPointOptions {
            damping: opt("damping", defaults.damping)?,
            tol: opt("fp_tol", defaults.tol)?,
            max_iter: kv
                .get("max_iter")
                .map_or(Ok(defaults.max_iter), |v| count("max_iter", v))?,
            expansion_nu: kv.get("expansion_nu").map(|v| number("expansion_nu", v)).transpose()?,
        };
        let n_steps = kv.get("n_steps").map(|v| count("n_steps", v)).transpose()?;
        Ok(Self {
            market,
            prefs,
            solve: SolveOptions { fixed_point, n_steps },
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
