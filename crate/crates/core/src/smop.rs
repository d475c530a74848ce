//! Monic orthogonal polynomial sequences from moments.
//!
//! Construction is exact Gram–Schmidt against the functional; the three-term
//! recurrence data `α_n = ⟨𝒰, x P_n²⟩/ξ_n`, `β_n = ξ_n/ξ_{n−1}` and the
//! squared norms `ξ_n = ⟨𝒰, P_n²⟩` come out of the same pass. Hankel
//! determinant formulas are kept only as diagnostics (`hankel_regularity`);
//! Gram–Schmidt grows much slower at desk scale.

use crate::calculus::{self, NuParam};
use crate::error::{Error, Result};
use crate::functional::MomentFunctional;
use crate::poly::Poly;
use crate::rational::Rational;
use num_traits::Zero;

/// A monic orthogonal sequence together with its recurrence data and source
/// functional. `polys[n]` is monic of degree n and `⟨𝒰, P_n P_j⟩ = ξ_n δ_nj`
/// on the stored range.
#[derive(Clone, Debug)]
pub struct Smop {
    polys: Vec<Poly>,
    alpha: Vec<Rational>,
    beta: Vec<Rational>, // beta[i] = β_{i+1}
    norms: Vec<Rational>,
    source: MomentFunctional,
}

/// Builds the monic orthogonal sequence for degrees `0..=n_max`.
///
/// Needs moments up to `2·n_max + 1` and a regular prefix at least `n_max`; a
/// vanishing norm is reported as the first non-regular level.
pub fn smop_from_moments(u: &MomentFunctional, n_max: usize) -> Result<Smop> {
    let mut polys: Vec<Poly> = Vec::with_capacity(n_max + 1);
    let mut norms: Vec<Rational> = Vec::with_capacity(n_max + 1);
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max);

    for n in 0..=n_max {
        let mut p = Poly::monomial(n, num_traits::One::one());
        for j in 0..n {
            let c = u.apply(&(&Poly::monomial(n, num_traits::One::one()) * &polys[j]))? / &norms[j];
            p = p - polys[j].scale(&c);
        }
        let norm = u.apply(&(&p * &p))?;
        if norm.is_zero() {
            return Err(Error::NonRegular { first_bad: n });
        }
        let x_p_p = u.apply(&(&p.mul_xpow(1) * &p))?;
        alpha.push(x_p_p / &norm);
        if n > 0 {
            beta.push(&norm / &norms[n - 1]);
        }
        polys.push(p);
        norms.push(norm);
    }

    Ok(Smop {
        polys,
        alpha,
        beta,
        norms,
        source: u.clone(),
    })
}

impl Smop {
    pub fn n_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> Result<&Poly> {
        self.polys.get(n).ok_or_else(|| {
            Error::IncompleteData(format!(
                "sequence stores degrees 0..={}, asked {n}",
                self.n_max()
            ))
        })
    }

    pub fn norm(&self, n: usize) -> Result<&Rational> {
        self.norms.get(n).ok_or_else(|| {
            Error::IncompleteData(format!(
                "norms stored 0..={}, asked {n}",
                self.norms.len() - 1
            ))
        })
    }

    pub fn norms(&self) -> &[Rational] {
        &self.norms
    }

    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    /// β_n for n ≥ 1.
    pub fn beta(&self, n: usize) -> Result<&Rational> {
        if n == 0 {
            return Err(Error::Domain("beta defined for n >= 1".into()));
        }
        self.beta.get(n - 1).ok_or_else(|| {
            Error::IncompleteData(format!("beta stored 1..={}, asked {n}", self.beta.len()))
        })
    }

    pub fn betas(&self) -> &[Rational] {
        &self.beta
    }

    pub fn source(&self) -> &MomentFunctional {
        &self.source
    }

    /// Expansion coefficients of `f` over the sequence via the dual-basis
    /// route, `c_i = ⟨𝒰, f P_i⟩ / ξ_i`. Orthogonality makes the
    /// reconstruction `Σ c_i P_i = f` exact.
    pub fn expand(&self, f: &Poly) -> Result<Vec<Rational>> {
        let deg = match f.degree() {
            None => return Ok(Vec::new()),
            Some(d) => d,
        };
        if deg > self.n_max() {
            return Err(Error::IncompleteData(format!(
                "expansion of degree {deg} needs more stored polynomials than {}",
                self.n_max()
            )));
        }
        (0..=deg)
            .map(|i| Ok(self.source.apply(&(f * &self.polys[i]))? / &self.norms[i]))
            .collect()
    }

    /// The m-th derived sequence `D_ν^m P_{n+m}` normalized to be monic.
    pub fn derived(&self, m: usize, nu: &NuParam) -> Result<DerivedSmop> {
        if m > self.n_max() {
            return Err(Error::IncompleteData(format!(
                "derived order {m} exceeds stored range {}",
                self.n_max()
            )));
        }
        let polys = (0..=self.n_max() - m)
            .map(|n| {
                let d = calculus::dnu_iter(&self.polys[n + m], nu, m);
                let eta = calculus::dnu_monic_factor(n, m, nu)?;
                Ok(d.scale(&eta.recip()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivedSmop {
            m,
            nu: nu.clone(),
            polys,
        })
    }

    /// Rebuilds the stored polynomials from the recurrence coefficients;
    /// used as a closure check.
    pub fn rebuild_from_recurrence(&self) -> Vec<Poly> {
        let mut out = vec![Poly::one()];
        for n in 0..self.alpha.len().saturating_sub(1).min(self.n_max()) {
            let prev = if n == 0 {
                Poly::zero()
            } else {
                out[n - 1].clone()
            };
            let next = (Poly::x() - Poly::constant(self.alpha[n].clone())) * out[n].clone()
                - prev.scale(&if n == 0 {
                    Rational::zero()
                } else {
                    self.beta[n - 1].clone()
                });
            out.push(next);
        }
        out
    }
}

/// The normalized derived sequence `P^{[m,ν]}_n = D_ν^m P_{n+m} / η_{n,m,ν}`.
#[derive(Clone, Debug)]
pub struct DerivedSmop {
    m: usize,
    nu: NuParam,
    polys: Vec<Poly>,
}

impl DerivedSmop {
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn nu(&self) -> &NuParam {
        &self.nu
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> Result<&Poly> {
        self.polys.get(n).ok_or_else(|| {
            Error::IncompleteData(format!(
                "derived sequence stores degrees 0..={}, asked {n}",
                self.polys.len().saturating_sub(1)
            ))
        })
    }
}
