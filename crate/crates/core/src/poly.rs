//! Dense polynomials with exact rational coefficients, ascending degree order.
//!
//! The zero polynomial is the empty coefficient vector; otherwise the last
//! stored coefficient is nonzero, so `degree` is just `len − 1`.

use crate::error::{Error, Result};
use crate::rational::{parse_rational, rat_i64, rational_str, Rational};
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn x() -> Self {
        Poly::monomial(1, Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn monomial(degree: usize, coeff: Rational) -> Self {
        if coeff.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = coeff;
        Poly { coeffs }
    }

    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Convenience constructor from small integers, ascending degree.
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::from_coeffs(coeffs.iter().map(|&c| rat_i64(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplication by `x^k`.
    pub fn mul_xpow(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Composition `p(x + c)`.
    pub fn shift(&self, c: &Rational) -> Poly {
        // Horner over the shifted variable: acc ← acc·(x+c) + a_k.
        let mut acc = Poly::zero();
        for a in self.coeffs.iter().rev() {
            let mut next = acc.mul_xpow(1) + acc.scale(c);
            next = next + Poly::constant(a.clone());
            acc = next;
        }
        acc
    }

    /// Composition `p(c·x)` by coefficient scaling.
    pub fn dilate(&self, c: &Rational) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut pow = Rational::one();
        for a in &self.coeffs {
            coeffs.push(a * &pow);
            pow *= c;
        }
        Poly::from_coeffs(coeffs)
    }

    /// Serializes as a JSON array of canonical rational strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_str).collect()
    }

    pub fn from_strings(strings: &[String]) -> Result<Poly> {
        let coeffs = strings
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(coeffs))
    }

    /// Expands `f` over a monic degree-graded basis (basis[d] has degree d)
    /// by exact back-substitution. Fails if the basis is too short.
    pub fn expand_in_monic_basis(&self, basis: &[Poly]) -> Result<Vec<Rational>> {
        let deg = match self.degree() {
            None => return Ok(Vec::new()),
            Some(d) => d,
        };
        if basis.len() <= deg {
            return Err(Error::IncompleteData(format!(
                "basis stores {} polynomials, need degree {deg}",
                basis.len()
            )));
        }
        for (d, b) in basis.iter().take(deg + 1).enumerate() {
            if b.degree() != Some(d) || !b.is_monic() {
                return Err(Error::Domain(format!(
                    "basis element {d} is not monic of degree {d}"
                )));
            }
        }
        let mut coeffs = vec![Rational::zero(); deg + 1];
        let mut r = self.clone();
        while let Some(d) = r.degree() {
            let c = r.coeff(d);
            r = r - basis[d].scale(&c);
            if r.degree() >= Some(d) {
                return Err(Error::Inconsistency(
                    "back substitution failed to reduce degree".into(),
                ));
            }
            coeffs[d] = c;
        }
        Ok(coeffs)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + rhs.coeff(k));
        }
        Poly::from_coeffs(coeffs)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) - rhs.coeff(k));
        }
        Poly::from_coeffs(coeffs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => rational_str(c),
                1 => format!("{}*x", rational_str(c)),
                _ => format!("{}*x^{k}", rational_str(c)),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn zero_is_empty() {
        assert!(Poly::from_i64(&[0, 0]).is_zero());
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(Poly::from_i64(&[1, 0, 3, 0]).degree(), Some(2));
    }

    #[test]
    fn shift_expands_binomially() {
        // (x+1)^2 = x^2 + 2x + 1
        let p = Poly::from_i64(&[0, 0, 1]);
        assert_eq!(p.shift(&rat_i64(1)), Poly::from_i64(&[1, 2, 1]));
    }

    #[test]
    fn dilate_scales_coefficients() {
        let p = Poly::from_i64(&[0, 0, 0, 1]);
        assert_eq!(p.dilate(&rat_i64(2)), Poly::from_i64(&[0, 0, 0, 8]));
    }

    #[test]
    fn eval_matches_expansion() {
        let p = Poly::from_i64(&[1, -3, 1]); // 1 - 3x + x^2
        assert_eq!(p.eval(&rat_i64(3)), rat_i64(1));
        assert_eq!(p.eval(&rat(1, 2)), rat(-1, 4));
    }

    #[test]
    fn monic_basis_expansion_round_trips() {
        let basis = vec![
            Poly::one(),
            Poly::from_i64(&[-1, 1]),
            Poly::from_i64(&[1, -3, 1]),
        ];
        let f = Poly::from_i64(&[0, 0, 1]); // x^2 = P2 + 3 P1 + 2 P0
        let c = f.expand_in_monic_basis(&basis).unwrap();
        assert_eq!(c, vec![rat_i64(2), rat_i64(3), rat_i64(1)]);
        let rebuilt = basis
            .iter()
            .zip(&c)
            .fold(Poly::zero(), |acc, (b, ci)| acc + b.scale(ci));
        assert_eq!(rebuilt, f);
    }
}
