//! Real roots of `a1 x^2 + a2 x + a3 = 0` without cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub discriminant: f64,
}

impl QuadraticCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            a1,
            a2,
            a3,
            discriminant: a2 * a2 - 4.0 * a1 * a3,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a1 * x + self.a2) * x + self.a3
    }

    /// Real roots in ascending order. A vanishing leading coefficient
    /// degrades to the linear equation.
    pub fn roots(&self) -> Result<Vec<f64>> {
        let Self {
            a1,
            a2,
            a3,
            discriminant,
        } = *self;
        if a1 == 0.0 {
            if a2 == 0.0 {
                return Err(Error::NoAdmissibleRoot { roots: vec![] });
            }
            return Ok(vec![-a3 / a2]);
        }
        if discriminant < 0.0 {
            return Err(Error::NoRealRoot { discriminant });
        }
        let sign = if a2 >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (a2 + sign * discriminant.sqrt());
        if q == 0.0 {
            return Ok(vec![0.0, 0.0]);
        }
        let (x1, x2) = (q / a1, a3 / q);
        Ok(if x1 <= x2 { vec![x1, x2] } else { vec![x2, x1] })
    }

    /// Smallest nonnegative root; this is the branch that stays finite as
    /// the leading coefficient passes through zero.
    pub fn smallest_nonnegative_root(&self) -> Result<f64> {
        let roots = self.roots()?;
        roots
            .iter()
            .copied()
            .filter(|x| *x >= 0.0)
            .fold(None, |best: Option<f64>, x| Some(best.map_or(x, |b| b.min(x))))
            .ok_or(Error::NoAdmissibleRoot { roots })
    }
}
