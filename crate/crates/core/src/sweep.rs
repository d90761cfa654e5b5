//! Strategy tables over variance, calendar time or risk aversion.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CaseTag, Horizon, MarketParams, PreferenceParams};
use crate::numerics::linspace;
use crate::solution::{solve, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Nu,
    T,
    Gamma,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Nu => "nu",
            Axis::T => "t",
            Axis::Gamma => "gamma",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nu" => Ok(Axis::Nu),
            "t" => Ok(Axis::T),
            "gamma" => Ok(Axis::Gamma),
            other => Err(Error::Parse(format!(
                "unknown sweep axis `{other}` (expected nu, t or gamma)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// One curve per value; ignored when sweeping over `gamma`.
    pub gammas: Vec<f64>,
    pub case: CaseTag,
    /// Calendar time for `nu` and `gamma` sweeps.
    pub t_eval: f64,
    /// Variance level for `t` and `gamma` sweeps; `None` means `theta`.
    pub nu_eval: Option<f64>,
}

pub const DEFAULT_GAMMAS: [f64; 4] = [1.5, 2.0, 2.5, 3.0];

impl SweepSpec {
    /// Variance axis `[0.0025, 0.09]` with 50 nodes at `t = 0`.
    pub fn over_nu(case: CaseTag) -> Self {
        Self {
            axis: Axis::Nu,
            min: 0.0025,
            max: 0.09,
            count: 50,
            gammas: DEFAULT_GAMMAS.to_vec(),
            case,
            t_eval: 0.0,
            nu_eval: None,
        }
    }

    /// Calendar time `[0, horizon]` with 51 nodes at `nu = theta`.
    pub fn over_t(case: CaseTag, horizon: f64) -> Self {
        Self {
            axis: Axis::T,
            min: 0.0,
            max: horizon,
            count: 51,
            ..Self::over_nu(case)
        }
    }

    /// Risk aversion `[1.5, 3]` with 16 nodes at `t = 0`, `nu = theta`.
    pub fn over_gamma(case: CaseTag) -> Self {
        Self {
            axis: Axis::Gamma,
            min: 1.5,
            max: 3.0,
            count: 16,
            ..Self::over_nu(case)
        }
    }

    /// Preset `n`: 1 gamma axis (inf-unit), 2 variance axis (inf-general),
    /// 3 time axis (fin-unit), 4 variance axis (fin-general).
    pub fn preset(n: u32, horizon: f64) -> Result<Self> {
        match n {
            1 => Ok(Self::over_gamma(CaseTag::InfUnit)),
            2 => Ok(Self::over_nu(CaseTag::InfGeneral)),
            3 => Ok(Self::over_t(CaseTag::FinUnit, horizon)),
            4 => Ok(Self::over_nu(CaseTag::FinGeneral)),
            _ => Err(Error::InvalidInput(format!("no sweep preset {n} (expected 1-4)"))),
        }
    }

    pub fn axis_values(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidInput("sweep grid must be finite and nonempty".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        if !(self.max > self.min) {
            return Err(Error::InvalidInput("sweep grid must be strictly increasing".into()));
        }
        Ok(linspace(self.min, self.max, self.count - 1))
    }

    fn curves(&self) -> Result<Vec<f64>> {
        let mut g = match self.axis {
            Axis::Gamma => self.axis_values()?,
            _ => self.gammas.clone(),
        };
        if g.is_empty() {
            return Err(Error::InvalidInput("gamma set is empty".into()));
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub gamma: f64,
    pub c_over_x: f64,
    pub pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    /// Lines written before the column header, without the `# ` prefix.
    pub metadata: Vec<String>,
    /// Sorted by gamma, then axis value.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for line in &self.metadata {
            writeln!(w, "# {line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Rows of one curve.
    pub fn curve(&self, gamma: f64) -> Vec<SweepRow> {
        self.rows.iter().filter(|r| r.gamma == gamma).copied().collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.rows.iter().map(|r| r.gamma).collect();
        g.dedup();
        g
    }
}

fn horizon_for(case: CaseTag, p: &PreferenceParams) -> Result<Horizon> {
    match (case.is_finite(), p.horizon) {
        (false, _) => Ok(Horizon::Infinite),
        (true, Horizon::Finite(t)) => Ok(Horizon::Finite(t)),
        (true, Horizon::Infinite) => Err(Error::InvalidInput(format!(
            "case {case} needs a finite horizon in the configuration"
        ))),
    }
}

/// Solves once per risk aversion value and evaluates the strategy along the
/// axis. `p` supplies everything except `gamma`; the case fixes the horizon
/// and, for unit-EIS cases, sets `phi = 1`.
pub fn run_sweep(spec: &SweepSpec, m: &MarketParams, p: &PreferenceParams, opts: &SolveOptions) -> Result<SweepTable> {
    let axis = spec.axis_values()?;
    let horizon = horizon_for(spec.case, p)?;
    if spec.axis == Axis::T {
        let Horizon::Finite(t_max) = horizon else {
            return Err(Error::InvalidInput("a time sweep needs a finite-horizon case".into()));
        };
        if spec.min < 0.0 || spec.max > t_max {
            return Err(Error::InvalidInput(format!("time axis must lie in [0, {t_max}]")));
        }
    }
    if spec.axis == Axis::Nu && !(spec.min > 0.0) {
        return Err(Error::InvalidInput("variance axis must be positive".into()));
    }
    let nu_eval = spec.nu_eval.unwrap_or(m.theta);
    let phi = if spec.case.is_general() { p.phi } else { 1.0 };
    let base = PreferenceParams { phi, horizon, ..*p };
    let mut rows = Vec::new();
    for g in spec.curves()? {
        let pg = base.with_gamma(g);
        let annotate = |e: Error| Error::AtGamma {
            gamma: g,
            source: Box::new(e),
        };
        let sol = solve(m, &pg, Some(spec.case), opts).map_err(annotate)?;
        let points: Vec<f64> = match spec.axis {
            Axis::Gamma => vec![g],
            _ => axis.clone(),
        };
        for x in points {
            let (t, nu) = match spec.axis {
                Axis::Nu => (spec.t_eval, x),
                Axis::T => (x, nu_eval),
                Axis::Gamma => (spec.t_eval, nu_eval),
            };
            let s = sol.strategy(m, &pg, t, nu).map_err(annotate)?;
            rows.push(SweepRow {
                axis_value: x,
                gamma: g,
                c_over_x: s.c_over_x,
                pi: s.pi,
            });
        }
    }
    Ok(SweepTable {
        spec: spec.clone(),
        metadata: metadata(spec, m, &base, opts, nu_eval),
        rows,
    })
}

fn metadata(
    spec: &SweepSpec,
    m: &MarketParams,
    p: &PreferenceParams,
    opts: &SolveOptions,
    nu_eval: f64,
) -> Vec<String> {
    let mut lines = Vec::new();
    let mut l = String::new();
    let _ = write!(
        l,
        "case={} axis={} min={} max={} count={}",
        spec.case,
        spec.axis.as_str(),
        spec.min,
        spec.max,
        spec.count
    );
    lines.push(l);
    match spec.axis {
        Axis::Nu => lines.push(format!("evaluated at t={}", spec.t_eval)),
        Axis::T => lines.push(format!("evaluated at nu={nu_eval}")),
        Axis::Gamma => lines.push(format!("evaluated at t={} nu={nu_eval}", spec.t_eval)),
    }
    if spec.axis != Axis::Gamma {
        let g: Vec<String> = spec.gammas.iter().map(f64::to_string).collect();
        lines.push(format!("gammas={}", g.join(",")));
    }
    lines.push(format!(
        "r={} xi={} kappa={} theta={} sigma={} rho={}",
        m.r, m.xi, m.kappa, m.theta, m.sigma, m.rho
    ));
    let horizon = match p.horizon {
        Horizon::Infinite => "inf".to_string(),
        Horizon::Finite(t) => t.to_string(),
    };
    lines.push(format!(
        "beta={} phi={} epsilon={} T={horizon}",
        p.beta, p.phi, p.epsilon
    ));
    let fp = &opts.fixed_point;
    lines.push(format!(
        "fixed_point damping={} tol={:e} max_iter={} n_steps={}",
        fp.damping,
        fp.tol,
        fp.max_iter,
        opts.n_steps.map_or("default".into(), |n| n.to_string())
    ));
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin() -> PreferenceParams {
        PreferenceParams::reference().with_horizon(Horizon::Finite(10.0))
    }

    #[test]
    fn rows_sorted_by_gamma_then_axis() {
        let m = MarketParams::reference();
        let mut spec = SweepSpec::over_nu(CaseTag::InfGeneral);
        spec.gammas = vec![3.0, 1.5];
        let t = run_sweep(&spec, &m, &fin(), &SolveOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 100);
        assert_eq!(t.gammas(), vec![1.5, 3.0]);
        assert!(t.curve(1.5).windows(2).all(|w| w[0].axis_value < w[1].axis_value));
    }

    #[test]
    fn csv_has_metadata_then_header() {
        let m = MarketParams::reference();
        let t = run_sweep(
            &SweepSpec::preset(1, 10.0).unwrap(),
            &m,
            &fin(),
            &SolveOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "axis_value,gamma,c_over_x,pi");
        assert!(text.starts_with("# case=inf-unit axis=gamma"));
        assert!(t.rows.iter().all(|r| r.c_over_x == 0.08 && r.axis_value == r.gamma));
    }

    #[test]
    fn finite_case_needs_finite_horizon() {
        let m = MarketParams::reference();
        let err = run_sweep(
            &SweepSpec::over_nu(CaseTag::FinGeneral),
            &m,
            &PreferenceParams::reference(),
            &SolveOptions::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn solver_errors_name_the_gamma() {
        let m = MarketParams::reference();
        let mut spec = SweepSpec::over_nu(CaseTag::InfGeneral);
        spec.gammas = vec![2.0, 1.0];
        let err = run_sweep(&spec, &m, &fin(), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AtGamma { gamma, .. } if gamma == 1.0), "{err}");
    }
}
