//! Moment functionals and the distributional calculus on them.
//!
//! A functional 𝒰 is known through its moments `u_n = ⟨𝒰, x^n⟩`. Derived
//! functionals compute their moments exactly from their parents:
//!
//! * multiplication by a polynomial: `⟨π𝒰, p⟩ = ⟨𝒰, πp⟩`,
//! * the difference derivative: `⟨D_ν𝒰, p⟩ = −⟨𝒰, D_{ν*} p⟩`,
//! * linear combinations.
//!
//! Equality of two functionals is only decidable up to a degree bound; every
//! identity check in this crate therefore carries an explicit check degree,
//! and exactness makes the finite check conclusive for those degrees.

use crate::calculus::{self, NuKind, NuParam};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Poly;
use crate::rational::Rational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

enum Source {
    /// Finite explicit list; queries past the end are hard errors.
    Explicit(Vec<Rational>),
    /// Finitely supported measure, `u_n = Σ_k w_k x_k^n`.
    NodeWeight {
        nodes: Vec<Rational>,
        weights: Vec<Rational>,
    },
    /// Charlier moments: the Touchard/Bell values `u_n = Σ_k S(n,k) μ^k`.
    Charlier {
        mu: Rational,
    },
    PolyMul {
        pi: Poly,
        base: MomentFunctional,
    },
    Dnu {
        nu: NuParam,
        base: MomentFunctional,
    },
    LinComb(Vec<(Rational, MomentFunctional)>),
}

/// A deterministic, shareable moment source. Cloning shares the cache, so a
/// functional and all its clones agree on every moment they ever produce;
/// the cache is behind a mutex, making concurrent reads safe.
#[derive(Clone)]
pub struct MomentFunctional {
    source: Arc<Source>,
    cache: Arc<Mutex<HashMap<usize, Rational>>>,
}

impl std::fmt::Debug for MomentFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &*self.source {
            Source::Explicit(v) => format!("explicit[{}]", v.len()),
            Source::NodeWeight { nodes, .. } => format!("discrete[{}]", nodes.len()),
            Source::Charlier { .. } => "charlier".into(),
            Source::PolyMul { .. } => "polymul".into(),
            Source::Dnu { .. } => "dnu".into(),
            Source::LinComb(t) => format!("lincomb[{}]", t.len()),
        };
        write!(f, "MomentFunctional({kind})")
    }
}

impl MomentFunctional {
    fn from_source(source: Source) -> Self {
        MomentFunctional {
            source: Arc::new(source),
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn from_moments(values: Vec<Rational>) -> Self {
        MomentFunctional::from_source(Source::Explicit(values))
    }

    /// Finitely supported measure. Nodes must be pairwise distinct and all
    /// weights nonzero.
    pub fn from_nodes_weights(nodes: Vec<Rational>, weights: Vec<Rational>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Domain("nodes and weights differ in length".into()));
        }
        for (i, a) in nodes.iter().enumerate() {
            for b in nodes.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::Domain("duplicate node".into()));
                }
            }
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::Domain("zero weight".into()));
        }
        Ok(MomentFunctional::from_source(Source::NodeWeight {
            nodes,
            weights,
        }))
    }

    /// Used by the family constructors; μ is validated there.
    pub(crate) fn charlier_unchecked(mu: Rational) -> Self {
        MomentFunctional::from_source(Source::Charlier { mu })
    }

    /// The functional `π(x)𝒰`.
    pub fn poly_mul(&self, pi: &Poly) -> MomentFunctional {
        MomentFunctional::from_source(Source::PolyMul {
            pi: pi.clone(),
            base: self.clone(),
        })
    }

    /// The functional `D_ν 𝒰`.
    pub fn dnu(&self, nu: &NuParam) -> MomentFunctional {
        MomentFunctional::from_source(Source::Dnu {
            nu: nu.clone(),
            base: self.clone(),
        })
    }

    /// m-fold `D_ν`.
    pub fn dnu_iter(&self, nu: &NuParam, m: usize) -> MomentFunctional {
        let mut acc = self.clone();
        for _ in 0..m {
            acc = acc.dnu(nu);
        }
        acc
    }

    pub fn linear_comb(terms: Vec<(Rational, MomentFunctional)>) -> MomentFunctional {
        MomentFunctional::from_source(Source::LinComb(terms))
    }

    /// Highest moment degree this source can produce; `None` if unbounded.
    pub fn max_degree(&self) -> Option<usize> {
        match &*self.source {
            Source::Explicit(v) => Some(v.len().saturating_sub(1)),
            Source::NodeWeight { .. } | Source::Charlier { .. } => None,
            Source::PolyMul { pi, base } => {
                let shift = pi.degree().unwrap_or(0);
                base.max_degree().map(|d| d.saturating_sub(shift))
            }
            // ⟨D_ν𝒰, x^n⟩ only touches base moments up to n−1.
            Source::Dnu { base, .. } => base.max_degree().map(|d| d + 1),
            Source::LinComb(terms) => terms.iter().filter_map(|(_, f)| f.max_degree()).min(),
        }
    }

    /// The moment `u_n`, exactly.
    pub fn moment(&self, n: usize) -> Result<Rational> {
        if let Some(hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit.clone());
        }
        let value = self.compute_moment(n)?;
        self.cache
            .lock()
            .unwrap()
            .entry(n)
            .or_insert_with(|| value.clone());
        Ok(value)
    }

    fn compute_moment(&self, n: usize) -> Result<Rational> {
        match &*self.source {
            Source::Explicit(values) => values.get(n).cloned().ok_or(Error::InsufficientMoments {
                needed: n,
                available: values.len() as i64 - 1,
            }),
            Source::NodeWeight { nodes, weights } => {
                let mut acc = Rational::zero();
                for (x, w) in nodes.iter().zip(weights) {
                    acc += w * num_traits::pow::pow(x.clone(), n);
                }
                Ok(acc)
            }
            Source::Charlier { mu } => Ok(touchard(n, mu)),
            Source::PolyMul { pi, base } => base.apply(&pi.mul_xpow(n)),
            Source::Dnu { nu, base } => {
                let probe = calculus::dnu(&Poly::monomial(n, Rational::one()), &nu.dual());
                Ok(-base.apply(&probe)?)
            }
            Source::LinComb(terms) => {
                let mut acc = Rational::zero();
                for (c, f) in terms {
                    acc += c * f.moment(n)?;
                }
                Ok(acc)
            }
        }
    }

    /// `⟨𝒰, p⟩ = Σ p_k u_k`.
    pub fn apply(&self, p: &Poly) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (k, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc += c * self.moment(k)?;
            }
        }
        Ok(acc)
    }

    /// Moment-by-moment equality up to `degree` inclusive.
    pub fn moments_equal(&self, other: &MomentFunctional, degree: usize) -> Result<bool> {
        for n in 0..=degree {
            if self.moment(n)? != other.moment(n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Hankel determinants `det [u_{i+j}]_{i,j=0..n}` for `n = 0..=n_max` and
    /// the regular / positive definite prefixes they certify.
    pub fn hankel_regularity(&self, n_max: usize) -> Result<RegularityReport> {
        let mut dets = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let matrix: linalg::Matrix = (0..=n)
                .map(|i| {
                    (0..=n)
                        .map(|j| self.moment(i + j))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            dets.push(linalg::determinant(&matrix));
        }
        let regular_prefix = prefix_len(&dets, |d| !d.is_zero());
        let positive_definite_prefix = prefix_len(&dets, |d| d > &Rational::zero());
        Ok(RegularityReport {
            hankel_dets: dets,
            regular_prefix,
            positive_definite_prefix,
        })
    }
}

fn prefix_len<F: Fn(&Rational) -> bool>(dets: &[Rational], good: F) -> Option<usize> {
    let mut last = None;
    for (n, d) in dets.iter().enumerate() {
        if good(d) {
            last = Some(n);
        } else {
            break;
        }
    }
    last
}

/// Touchard value `T_n(μ) = Σ_k S(n,k) μ^k` via the Stirling-number triangle;
/// these are the Charlier moments (Bell numbers at μ = 1).
fn touchard(n: usize, mu: &Rational) -> Rational {
    // S(n, k) with S(0,0) = 1, S(n,k) = k S(n-1,k) + S(n-1,k-1).
    let mut row: Vec<Rational> = vec![Rational::one()];
    for _ in 1..=n {
        let mut next = vec![Rational::zero(); row.len() + 1];
        for (k, v) in row.iter().enumerate() {
            next[k] += Rational::from_integer(k.into()) * v;
            next[k + 1] += v;
        }
        row = next;
    }
    let mut acc = Rational::zero();
    let mut pow = Rational::one();
    for s in &row {
        acc += s * &pow;
        pow *= mu;
    }
    acc
}

/// Hankel regularity diagnostics. Each prefix is the largest n such that the
/// determinants 0..=n all pass the test; `None` when already Υ_0 fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityReport {
    pub hankel_dets: Vec<Rational>,
    pub regular_prefix: Option<usize>,
    pub positive_definite_prefix: Option<usize>,
}

/// Builds the right side of the product rule for `D_ν^m [p 𝒰]`:
///
/// * uniform: `Σ_j C(m,j) (D_ω^j p)(x + (m−j)ω) · D_ω^{m−j} 𝒰`,
/// * q-lattice: `Σ_j [m,j]_q q^j (D_q^j p)(q^{m−j} x) · D_q^{m−j} 𝒰`.
///
/// By the product-rule identity this functional equals `D_ν^m` applied to
/// `p𝒰` computed compositionally, which is what the tests check.
pub fn leibniz_expand(
    p: &Poly,
    u: &MomentFunctional,
    m: usize,
    nu: &NuParam,
) -> Result<MomentFunctional> {
    let mut terms = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let factor = match nu.kind() {
            NuKind::Omega => binomial(m, j),
            NuKind::Q => {
                let qj = num_traits::pow::pow(nu.value().clone(), j);
                calculus::q_binomial(m, j, nu.value())? * qj
            }
        };
        let deriv = calculus::dnu_iter(p, nu, j);
        let shifted = calculus::arg_shift(&deriv, nu, (m - j) as i64);
        let tower = u.dnu_iter(nu, m - j);
        terms.push((factor, tower.poly_mul(&shifted)));
    }
    Ok(MomentFunctional::linear_comb(terms))
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * Rational::from_integer((n - i).into()) / Rational::from_integer((i + 1).into());
    }
    acc
}

/// Default identity-check degree for a computation working up to `n_max`:
/// twice the working range plus a guard.
pub fn default_check_degree(n_max: usize) -> usize {
    2 * n_max + 5
}
