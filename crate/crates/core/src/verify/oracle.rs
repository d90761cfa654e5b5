//! Method-of-lines solves of the finite-horizon reduced PDEs, compared with
//! the exponential-affine solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{solve_general_eis_finite, solve_unit_eis_finite, CoefficientPath, TimeGrid};
use crate::model::{Horizon, MarketParams, PreferenceParams};
use crate::numerics::{interp_linear, linspace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleMesh {
    pub nu_min: f64,
    pub nu_max: f64,
    /// Number of variance nodes.
    pub n_nu: usize,
    /// Number of steps in time to horizon.
    pub n_tau: usize,
    /// Time rows kept in the comparison output (the error is measured on all).
    pub stored_rows: usize,
}

impl Default for OracleMesh {
    fn default() -> Self {
        Self {
            nu_min: 0.005,
            nu_max: 0.09,
            n_nu: 61,
            n_tau: 4000,
            stored_rows: 41,
        }
    }
}

impl OracleMesh {
    /// Same interval and time steps with twice the spatial resolution.
    pub fn refined(&self) -> Self {
        Self {
            n_nu: 2 * (self.n_nu - 1) + 1,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu_min > 0.0 && self.nu_max > self.nu_min) {
            return Err(Error::InvalidInput("need 0 < nu_min < nu_max".into()));
        }
        if self.n_nu < 7 || self.n_tau < 2 {
            return Err(Error::InvalidInput("need n_nu >= 7 and n_tau >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub tau: Vec<f64>,
    pub nu: Vec<f64>,
    /// `closed_form[i][j]` at `(tau[i], nu[j])`.
    pub closed_form: Vec<Vec<f64>>,
    pub oracle: Vec<Vec<f64>>,
    /// Largest relative difference over all time steps on the interior
    /// third of the variance grid.
    pub max_rel_diff: f64,
    pub substeps: usize,
}

impl OracleComparison {
    /// Columns `tau, nu, closed_form, oracle, rel_diff`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "nu", "closed_form", "oracle", "rel_diff"])?;
        for (i, t) in self.tau.iter().enumerate() {
            for (j, nu) in self.nu.iter().enumerate() {
                let (c, o) = (self.closed_form[i][j], self.oracle[i][j]);
                out.serialize((t, nu, c, o, ((o - c) / c).abs()))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// `h_tau = h (c0(nu) + k1(tau) + k2(tau) ln h) + b(nu) h_nu + q(nu) h_nu^2 / h + d(nu) h_nunu`.
struct Semilinear<'a> {
    nu: Vec<f64>,
    dnu: f64,
    c0: Vec<f64>,
    b: Vec<f64>,
    q: Vec<f64>,
    d: Vec<f64>,
    /// `(k1, k2)` at time to horizon `tau`.
    k: Box<dyn Fn(f64) -> (f64, f64) + 'a>,
}

impl Semilinear<'_> {
    fn rhs(&self, tau: f64, h: &[f64], out: &mut [f64]) {
        let n = h.len();
        let dx = self.dnu;
        let (k1, k2) = (self.k)(tau);
        for j in 0..n {
            let (d1, d2) = match j {
                0 => (
                    (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dx),
                    (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) / (dx * dx),
                ),
                _ if j == n - 1 => (
                    (3.0 * h[j] - 4.0 * h[j - 1] + h[j - 2]) / (2.0 * dx),
                    (2.0 * h[j] - 5.0 * h[j - 1] + 4.0 * h[j - 2] - h[j - 3]) / (dx * dx),
                ),
                _ => (
                    (h[j + 1] - h[j - 1]) / (2.0 * dx),
                    (h[j + 1] - 2.0 * h[j] + h[j - 1]) / (dx * dx),
                ),
            };
            out[j] = h[j] * (self.c0[j] + k1 + k2 * h[j].ln())
                + self.b[j] * d1
                + self.q[j] * d1 * d1 / h[j]
                + self.d[j] * d2;
        }
    }

    /// Substeps per outer step so that the explicit scheme stays inside the
    /// RK4 stability region for the diffusion and advection terms.
    fn substeps(&self, dt: f64) -> usize {
        let dx = self.dnu;
        let stiff = self
            .d
            .iter()
            .zip(&self.b)
            .map(|(d, b)| 4.0 * d.abs() / (dx * dx) + b.abs() / dx)
            .fold(0.0, f64::max);
        ((dt * stiff / 2.0).ceil() as usize).max(1)
    }

    fn solve(&self, h0: f64, dt: f64, steps: usize, mut each: impl FnMut(usize, &[f64])) -> Result<usize> {
        let n = self.nu.len();
        let sub = self.substeps(dt);
        let k = dt / sub as f64;
        let mut h = vec![h0; n];
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        each(0, &h);
        for step in 1..=steps {
            for s in 0..sub {
                let t = (step - 1) as f64 * dt + s as f64 * k;
                self.rhs(t, &h, &mut k1);
                for j in 0..n {
                    tmp[j] = h[j] + 0.5 * k * k1[j];
                }
                self.rhs(t + 0.5 * k, &tmp, &mut k2);
                for j in 0..n {
                    tmp[j] = h[j] + 0.5 * k * k2[j];
                }
                self.rhs(t + 0.5 * k, &tmp, &mut k3);
                for j in 0..n {
                    tmp[j] = h[j] + k * k3[j];
                }
                self.rhs(t + k, &tmp, &mut k4);
                for j in 0..n {
                    h[j] += k / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                if h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InstabilityDetected { tau: t + k });
                }
            }
            each(step, &h);
        }
        Ok(sub)
    }
}

fn horizon_of(p: &PreferenceParams) -> Result<f64> {
    match p.horizon {
        Horizon::Finite(t) => Ok(t),
        Horizon::Infinite => Err(Error::InvalidInput("oracle needs a finite horizon".into())),
    }
}

fn compare(pde: &Semilinear, h0: f64, path: &CoefficientPath, mesh: &OracleMesh) -> Result<OracleComparison> {
    let steps = mesh.n_tau;
    let dt = path.grid.step();
    let n = pde.nu.len();
    let (lo, hi) = (n / 3, n - 1 - n / 3);
    let keep = mesh.stored_rows.clamp(2, steps + 1);
    let every = (steps / (keep - 1)).max(1);
    let mut out = OracleComparison {
        tau: Vec::new(),
        nu: pde.nu.clone(),
        closed_form: Vec::new(),
        oracle: Vec::new(),
        max_rel_diff: 0.0,
        substeps: 0,
    };
    out.substeps = pde.solve(h0, dt, steps, |i, h| {
        let closed: Vec<f64> = pde.nu.iter().map(|nu| (path.a0[i] + path.a1[i] * nu).exp()).collect();
        for j in lo..=hi {
            out.max_rel_diff = out.max_rel_diff.max(((h[j] - closed[j]) / closed[j]).abs());
        }
        if i % every == 0 || i == steps {
            out.tau.push(path.tau[i]);
            out.closed_form.push(closed);
            out.oracle.push(h.to_vec());
        }
    })?;
    Ok(out)
}

fn grid(mesh: &OracleMesh) -> (Vec<f64>, f64) {
    let nu = linspace(mesh.nu_min, mesh.nu_max, mesh.n_nu - 1);
    let dnu = (mesh.nu_max - mesh.nu_min) / (mesh.n_nu - 1) as f64;
    (nu, dnu)
}

/// Oracle for the unit-EIS equation, started from `h(0, nu) = epsilon`.
pub fn pde_oracle_finite_unit(m: &MarketParams, p: &PreferenceParams, mesh: &OracleMesh) -> Result<OracleComparison> {
    if !p.unit_eis() {
        return Err(Error::InvalidPreferences("unit-EIS oracle requires phi = 1".into()));
    }
    mesh.validate()?;
    let horizon = horizon_of(p)?;
    let path = solve_unit_eis_finite(m, p, &TimeGrid::new(horizon, mesh.n_tau)?)?;
    let (nu, dnu) = grid(mesh);
    let g = p.gamma;
    let quad = 0.5 * (m.rho * m.rho * (1.0 - g).powi(2) / g - g);
    let beta = p.beta;
    let pde = Semilinear {
        c0: nu
            .iter()
            .map(|&v| m.r - beta + m.eta(v).powi(2) / (2.0 * g) + beta * beta.ln())
            .collect(),
        b: nu
            .iter()
            .map(|&v| m.m1(v) + m.eta(v) / g * m.rho * m.m2(v) * (1.0 - g))
            .collect(),
        q: nu.iter().map(|&v| quad * m.m2(v).powi(2)).collect(),
        d: nu.iter().map(|&v| 0.5 * m.m2(v).powi(2)).collect(),
        k: Box::new(move |_| (0.0, -beta)),
        nu,
        dnu,
    };
    compare(&pde, p.epsilon, &path, mesh)
}

/// Oracle for the linearized general-EIS equation with the solver's
/// `zeta3(tau)`, `zeta4(tau)` held as given coefficients.
pub fn pde_oracle_finite_general(
    m: &MarketParams,
    p: &PreferenceParams,
    mesh: &OracleMesh,
) -> Result<OracleComparison> {
    if p.unit_eis() {
        return Err(Error::InvalidPreferences("general-EIS oracle requires phi != 1".into()));
    }
    mesh.validate()?;
    let horizon = horizon_of(p)?;
    let path = solve_general_eis_finite(m, p, &TimeGrid::new(horizon, mesh.n_tau)?)?;
    let (nu, dnu) = grid(mesh);
    let (g, phi) = (p.gamma, p.phi);
    let s = 1.0 - phi;
    let wide = 2.0 - phi - g + m.rho * m.rho * (1.0 - g).powi(2) / g;
    let tau = path.tau.clone();
    let z3 = path.zeta3.clone().unwrap_or_default();
    let z4 = path.zeta4.clone().unwrap_or_default();
    let phi_ln_beta = phi * p.beta.ln();
    // with the linearized consumption term cons = z3 + z4 (phi ln beta - ln h),
    // -(1 - phi) times the zero-order bracket is c0(nu) + cons
    let pde = Semilinear {
        c0: nu
            .iter()
            .map(|&v| -s * (m.r + m.eta(v).powi(2) / (2.0 * g)) - p.beta * phi)
            .collect(),
        b: nu
            .iter()
            .map(|&v| m.m1(v) + m.eta(v) / g * m.rho * m.m2(v) * (1.0 - g))
            .collect(),
        q: nu.iter().map(|&v| -m.m2(v).powi(2) * wide / (2.0 * s)).collect(),
        d: nu.iter().map(|&v| 0.5 * m.m2(v).powi(2)).collect(),
        k: Box::new(move |t| {
            let (a, b) = (interp_linear(&tau, &z3, t), interp_linear(&tau, &z4, t));
            (a + b * phi_ln_beta, -b)
        }),
        nu,
        dnu,
    };
    compare(&pde, p.epsilon.powf(phi - 1.0), &path, mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> OracleMesh {
        OracleMesh {
            n_tau: 400,
            ..OracleMesh::default()
        }
    }

    #[test]
    fn unit_oracle_agrees_and_starts_exact() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference()
            .with_phi(1.0)
            .with_horizon(Horizon::Finite(2.0));
        let c = pde_oracle_finite_unit(&m, &p, &small()).unwrap();
        assert_eq!(c.oracle[0], c.closed_form[0]);
        assert!(c.max_rel_diff < 1e-3, "{}", c.max_rel_diff);
    }

    #[test]
    fn general_oracle_agrees() {
        let m = MarketParams::reference();
        let p = PreferenceParams::reference().with_horizon(Horizon::Finite(2.0));
        let c = pde_oracle_finite_general(&m, &p, &small()).unwrap();
        assert_eq!(c.oracle[0], c.closed_form[0]);
        assert!(c.max_rel_diff < 1e-3, "{}", c.max_rel_diff);
    }

    #[test]
    fn degenerate_market_still_agrees() {
        let m = MarketParams {
            xi: 0.0,
            rho: 0.0,
            ..MarketParams::reference()
        };
        let p = PreferenceParams::reference()
            .with_phi(1.0)
            .with_horizon(Horizon::Finite(2.0));
        let c = pde_oracle_finite_unit(&m, &p, &small()).unwrap();
        assert!(c.max_rel_diff < 1e-3, "{}", c.max_rel_diff);
    }
}
