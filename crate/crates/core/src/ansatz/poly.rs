//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

/// Symbols appearing in the expanded reduced equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    R,
    Beta,
    LnBeta,
    /// Linearization constant `zeta_k`, k in 1..=4.
    Zeta(u8),
    /// Ansatz coefficient `A_k`.
    A(u32),
    /// Horizon derivative `dA_k/dtau`.
    DA(u32),
}

impl Sym {
    pub fn is_unknown(self) -> bool {
        matches!(self, Sym::A(_) | Sym::DA(_))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::R => write!(f, "r"),
            Sym::Beta => write!(f, "beta"),
            Sym::LnBeta => write!(f, "ln(beta)"),
            Sym::Zeta(k) => write!(f, "zeta{k}"),
            Sym::A(k) => write!(f, "A{k}"),
            Sym::DA(k) => write!(f, "A{k}'"),
        }
    }
}

/// Product of symbol powers; empty map is the constant monomial.
pub type Monomial = BTreeMap<Sym, u32>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn sym(s: Sym) -> Self {
        let mut m = Monomial::new();
        m.insert(s, 1);
        let mut p = Self::zero();
        p.add_term(m, Rational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Symbols present with nonzero coefficient.
    pub fn symbols(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = self.terms.keys().flat_map(|m| m.keys().copied()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn has_unknowns(&self) -> bool {
        self.symbols().into_iter().any(Sym::is_unknown)
    }

    /// If the polynomial is `c * s^2` for a single symbol, returns `(c, s)`.
    pub fn as_scaled_square(&self) -> Option<(Rational, Sym)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if m.len() != 1 {
            return None;
        }
        let (s, e) = m.iter().next()?;
        (*e == 2).then(|| (c.clone(), *s))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = ma.clone();
                for (s, e) in mb {
                    *m.entry(*s).or_insert(0) += e;
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mag = c.abs();
            let coef_shown = !(mag.is_one() && !m.is_empty());
            if coef_shown {
                write!(f, "{mag}")?;
            }
            for (j, (s, e)) in m.iter().enumerate() {
                if coef_shown || j > 0 {
                    write!(f, "*")?;
                }
                if *e == 1 {
                    write!(f, "{s}")?;
                } else {
                    write!(f, "{s}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial in `nu` whose coefficients are [`Poly`] values; index = power.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NuPoly(pub Vec<Poly>);

impl NuPoly {
    pub fn from_numbers(coeffs: &[Rational]) -> Self {
        let mut p = NuPoly(coeffs.iter().cloned().map(Poly::constant).collect());
        p.trim();
        p
    }

    pub fn constant(p: Poly) -> Self {
        let mut out = NuPoly(vec![p]);
        out.trim();
        out
    }

    /// `coef * nu^power`.
    pub fn monomial(coef: Poly, power: usize) -> Self {
        let mut v = vec![Poly::zero(); power + 1];
        v[power] = coef;
        let mut out = NuPoly(v);
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(Poly::is_zero) {
            self.0.pop();
        }
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, j: usize) -> Poly {
        self.0.get(j).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = NuPoly(self.0.iter().map(|p| p.scale(c)).collect());
        out.trim();
        out
    }

    pub fn mul_poly(&self, c: &Poly) -> Self {
        let mut out = NuPoly(self.0.iter().map(|p| p * c).collect());
        out.trim();
        out
    }
}

impl Add for &NuPoly {
    type Output = NuPoly;
    fn add(self, rhs: &NuPoly) -> NuPoly {
        let n = self.0.len().max(rhs.0.len());
        let mut out = NuPoly((0..n).map(|j| &self.coeff(j) + &rhs.coeff(j)).collect());
        out.trim();
        out
    }
}

impl Mul for &NuPoly {
    type Output = NuPoly;
    fn mul(self, rhs: &NuPoly) -> NuPoly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return NuPoly::default();
        }
        let mut v = vec![Poly::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        let mut out = NuPoly(v);
        out.trim();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = Poly::sym(Sym::A(1));
        let diff = &a - &a;
        assert!(diff.is_zero());
        let sq = &(&a + &Poly::sym(Sym::A(2))) * &(&a - &Poly::sym(Sym::A(2)));
        // (A1 + A2)(A1 - A2) = A1^2 - A2^2
        assert_eq!(sq.terms().count(), 2);
    }

    #[test]
    fn scaled_square_detection() {
        let a = Poly::sym(Sym::A(3));
        let p = (&a * &a).scale(&q(-3, 4));
        assert_eq!(p.as_scaled_square(), Some((q(-3, 4), Sym::A(3))));
        assert!((&p + &Poly::sym(Sym::Beta)).as_scaled_square().is_none());
    }

    #[test]
    fn nu_product_degrees_add() {
        let lin = NuPoly::from_numbers(&[q(1, 1), q(2, 1)]);
        let quad = &lin * &lin;
        assert_eq!(quad.degree(), Some(2));
        assert_eq!(quad.coeff(1), Poly::constant(q(4, 1)));
        assert_eq!(NuPoly::from_numbers(&[q(0, 1)]).degree(), None);
    }

    #[test]
    fn display_is_readable() {
        let p = &Poly::sym(Sym::A(1)).scale(&q(1, 2)) - &Poly::sym(Sym::Beta);
        assert_eq!(p.to_string(), "-beta + 1/2*A1");
    }
}
