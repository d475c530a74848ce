//! The difference operators and their combinatorics.
//!
//! A lattice parameter ν is either a step `ω ≠ 0` (uniform lattice, operator
//! `D_ω p(x) = (p(x+ω) − p(x))/ω`) or a ratio `q ∉ {0, ±1}` (q-lattice,
//! operator `D_q p(x) = (p(qx) − p(x))/((q−1)x)`). The dual parameter ν* is
//! `−ω` resp. `1/q`; it is what shows up when an operator is moved across a
//! pairing with a functional.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{rational_str, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NuKind {
    Omega,
    Q,
}

/// Validated lattice parameter. `Omega` values are nonzero; `Q` values avoid
/// `{0, 1, −1}`, which keeps every q-integer `[n]_q` and q-Pochhammer factor
/// used below nonzero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NuParam {
    kind: NuKind,
    value: Rational,
}

impl NuParam {
    pub fn new(kind: NuKind, value: Rational) -> Result<Self> {
        match kind {
            NuKind::Omega => {
                if value.is_zero() {
                    return Err(Error::Domain("omega must be nonzero".into()));
                }
            }
            NuKind::Q => {
                if value.is_zero() || value.is_one() || value == -Rational::one() {
                    return Err(Error::Domain(format!(
                        "q must avoid 0, 1, -1; got {}",
                        rational_str(&value)
                    )));
                }
            }
        }
        Ok(NuParam { kind, value })
    }

    pub fn omega(value: Rational) -> Result<Self> {
        NuParam::new(NuKind::Omega, value)
    }

    pub fn q(value: Rational) -> Result<Self> {
        NuParam::new(NuKind::Q, value)
    }

    pub fn kind(&self) -> NuKind {
        self.kind
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// The dual parameter: `ω ↦ −ω`, `q ↦ 1/q`.
    pub fn dual(&self) -> NuParam {
        let value = match self.kind {
            NuKind::Omega => -self.value.clone(),
            NuKind::Q => self.value.recip(),
        };
        NuParam {
            kind: self.kind,
            value,
        }
    }
}

impl std::fmt::Display for NuParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            NuKind::Omega => write!(f, "omega:{}", rational_str(&self.value)),
            NuKind::Q => write!(f, "q:{}", rational_str(&self.value)),
        }
    }
}

/// q-Pochhammer `(a; q)_n = (1−a)(1−aq)···(1−aq^{n−1})`.
pub fn q_pochhammer(a: &Rational, q: &Rational, n: usize) -> Rational {
    let mut prod = Rational::one();
    let mut term = a.clone();
    for _ in 0..n {
        prod *= Rational::one() - &term;
        term *= q;
    }
    prod
}

/// Gaussian binomial `(q;q)_n / ((q;q)_j (q;q)_{n−j})`.
///
/// The denominator factors vanish exactly when q is a root of unity of small
/// order; that is rejected rather than assumed away.
pub fn q_binomial(n: usize, j: usize, q: &Rational) -> Result<Rational> {
    if j > n {
        return Err(Error::Domain(format!(
            "q_binomial requires j <= n, got ({n}, {j})"
        )));
    }
    let den = q_pochhammer(q, q, j) * q_pochhammer(q, q, n - j);
    if den.is_zero() {
        return Err(Error::DegenerateParameter(format!(
            "q-Pochhammer denominator vanishes for q = {}",
            rational_str(q)
        )));
    }
    Ok(q_pochhammer(q, q, n) / den)
}

/// q-integer `[n]_q = 1 + q + … + q^{n−1} = (q^n − 1)/(q − 1)`.
pub fn q_integer(n: usize, q: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut pow = Rational::one();
    for _ in 0..n {
        acc += &pow;
        pow *= q;
    }
    acc
}

/// Leading coefficient of the m-th difference derivative of a monic degree
/// n+m polynomial: `(n+1)_m` on the uniform lattice, `[n+1]_q ··· [n+m]_q` on
/// the q-lattice. Dividing `D_ν^m P_{n+m}` by this factor makes it monic.
pub fn dnu_monic_factor(n: usize, m: usize, nu: &NuParam) -> Result<Rational> {
    let mut prod = Rational::one();
    for k in n + 1..=n + m {
        let factor = match nu.kind() {
            NuKind::Omega => Rational::from_integer(k.into()),
            NuKind::Q => q_integer(k, nu.value()),
        };
        if factor.is_zero() {
            return Err(Error::DegenerateParameter(format!(
                "[{k}]_q vanishes for q = {}",
                rational_str(nu.value())
            )));
        }
        prod *= factor;
    }
    Ok(prod)
}

/// The lattice shift taken j times: `p(x + jω)` on the uniform lattice,
/// `p(q^j x)` on the q-lattice. Negative j is allowed.
pub fn arg_shift(p: &Poly, nu: &NuParam, j: i64) -> Poly {
    if j == 0 || p.is_zero() {
        return p.clone();
    }
    match nu.kind() {
        NuKind::Omega => {
            let step = nu.value() * Rational::from_integer(j.into());
            p.shift(&step)
        }
        NuKind::Q => {
            let factor = if j >= 0 {
                num_traits::pow::pow(nu.value().clone(), j as usize)
            } else {
                num_traits::pow::pow(nu.value().recip(), (-j) as usize)
            };
            p.dilate(&factor)
        }
    }
}

/// The difference derivative `D_ν p`.
///
/// Degree drops by exactly one; `D_ν x^n` has leading coefficient n (uniform)
/// or `[n]_q` (q-lattice). The q-case divides out `(q−1)x` coefficient-wise,
/// which is exact because the numerator has no constant term.
pub fn dnu(p: &Poly, nu: &NuParam) -> Poly {
    match nu.kind() {
        NuKind::Omega => {
            let shifted = p.shift(nu.value());
            (shifted - p.clone()).scale(&nu.value().recip())
        }
        NuKind::Q => {
            let q = nu.value();
            let coeffs = p
                .coeffs()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * q_integer(k, q))
                .collect();
            Poly::from_coeffs(coeffs)
        }
    }
}

/// m-fold application of `dnu`.
pub fn dnu_iter(p: &Poly, nu: &NuParam, m: usize) -> Poly {
    let mut acc = p.clone();
    for _ in 0..m {
        acc = dnu(&acc, nu);
    }
    acc
}

/// The unique F with `D_ν F = f` and zero constant term.
pub fn dnu_antiderivative(f: &Poly, nu: &NuParam) -> Result<Poly> {
    let mut acc = Poly::zero();
    let mut r = f.clone();
    while let Some(d) = r.degree() {
        let lead = match nu.kind() {
            NuKind::Omega => Rational::from_integer((d as i64 + 1).into()),
            NuKind::Q => q_integer(d + 1, nu.value()),
        };
        if lead.is_zero() {
            return Err(Error::DegenerateParameter(format!(
                "[{}]_q vanishes for q = {}",
                d + 1,
                rational_str(nu.value())
            )));
        }
        let term = Poly::monomial(d + 1, r.coeff(d) / lead);
        r = r - dnu(&term, nu);
        acc = acc + term;
    }
    Ok(acc)
}
