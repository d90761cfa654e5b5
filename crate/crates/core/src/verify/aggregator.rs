use crate::error::{Error, Result};
use crate::model::PreferenceParams;

/// Epstein-Zin aggregator `f(c, J)`.
///
/// For `phi != 1`:
/// `beta/(1 - 1/phi) (1-gamma) J [ (c / ((1-gamma) J)^(1/(1-gamma)))^(1-1/phi) - 1 ]`;
/// for `phi = 1`: `beta (1-gamma) J [ln c - ln((1-gamma) J)/(1-gamma)]`;
/// for `gamma = phi = 1` the logarithmic limit `beta (ln c - J)`.
pub fn aggregator_eval(c: f64, j: f64, p: &PreferenceParams) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("consumption must be > 0 (got {c})")));
    }
    let (beta, gamma, phi) = (p.beta, p.gamma, p.phi);
    if p.unit_gamma() && p.unit_eis() {
        return Ok(beta * (c.ln() - j));
    }
    let scaled = (1.0 - gamma) * j;
    if !(scaled > 0.0) {
        return Err(Error::Domain(format!("(1-gamma) J must be > 0 (got {scaled})")));
    }
    if p.unit_eis() {
        return Ok(beta * scaled * (c.ln() - scaled.ln() / (1.0 - gamma)));
    }
    let certainty = scaled.powf(1.0 / (1.0 - gamma));
    let rho = 1.0 - 1.0 / phi;
    Ok(beta / rho * scaled * ((c / certainty).powf(rho) - 1.0))
}
