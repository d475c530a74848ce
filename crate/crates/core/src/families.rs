//! Built-in exact moment functionals and the JSON functional-spec schema.
//!
//! The finitely supported families (Kravchuk, Hahn, arbitrary node/weight
//! measures — which cover q-lattices via nodes q^k) are regular only up to
//! `#support − 1`; everything downstream respects that horizon through the
//! insufficient-moment and regularity errors. Infinite-support q-families are
//! deliberately not built in: their moments need infinite q-lattice sums that
//! would break exactness. Supply such moments explicitly via the `moments`
//! kind if external provenance is acceptable.

use crate::calculus::{NuKind, NuParam};
use crate::error::{Error, Result};
use crate::functional::MomentFunctional;
use crate::poly::Poly;
use crate::rational::{parse_rational, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Deserialize;

/// Charlier functional with parameter μ > 0. Moments are the Touchard values
/// `u_n = Σ_k S(n,k) μ^k` (Bell numbers at μ = 1), normalized to `u_0 = 1`.
pub fn charlier(mu: Rational) -> Result<MomentFunctional> {
    if mu <= Rational::zero() {
        return Err(Error::Domain("charlier requires mu > 0".into()));
    }
    Ok(MomentFunctional::charlier_unchecked(mu))
}

/// Kravchuk functional: binomial weights `C(N,k) p^k (1−p)^{N−k}` on `0..=N`.
pub fn kravchuk(n: usize, p: Rational) -> Result<MomentFunctional> {
    if n == 0 {
        return Err(Error::Domain("kravchuk requires N >= 1".into()));
    }
    if p <= Rational::zero() || p >= Rational::one() {
        return Err(Error::Domain("kravchuk requires p in (0,1)".into()));
    }
    let q = Rational::one() - &p;
    let nodes: Vec<Rational> = (0..=n).map(|k| Rational::from_integer(k.into())).collect();
    let weights: Vec<Rational> = (0..=n)
        .map(|k| {
            Rational::from_integer(integer_binomial(n, k))
                * num_traits::pow::pow(p.clone(), k)
                * num_traits::pow::pow(q.clone(), n - k)
        })
        .collect();
    MomentFunctional::from_nodes_weights(nodes, weights)
}

/// Hahn functional: weights `C(α+k, k) C(β+N−k, N−k)` on `0..=N`, evaluated
/// exactly for rational α, β via rising products.
pub fn hahn(alpha: Rational, beta: Rational, n: usize) -> Result<MomentFunctional> {
    if n == 0 {
        return Err(Error::Domain("hahn requires N >= 1".into()));
    }
    let nodes: Vec<Rational> = (0..=n).map(|k| Rational::from_integer(k.into())).collect();
    let weights: Vec<Rational> = (0..=n)
        .map(|k| generalized_binomial(&alpha, k) * generalized_binomial(&beta, n - k))
        .collect();
    if weights.iter().any(|w| w.is_zero()) {
        return Err(Error::Domain(
            "hahn parameters produce a zero weight (negative-integer degeneracy)".into(),
        ));
    }
    MomentFunctional::from_nodes_weights(nodes, weights)
}

/// Arbitrary finitely supported measure with distinct nodes and nonzero
/// weights.
pub fn discrete(nodes: Vec<Rational>, weights: Vec<Rational>) -> Result<MomentFunctional> {
    MomentFunctional::from_nodes_weights(nodes, weights)
}

/// `(α+1)_k / k!`, the generalized binomial C(α+k, k).
fn generalized_binomial(alpha: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 1..=k {
        let step = Rational::from_integer(i.into());
        acc = acc * (alpha + &step) / step;
    }
    acc
}

fn integer_binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// The JSON functional-spec schema. Rationals are canonical strings, unknown
/// keys are rejected, and the derived kinds nest recursively.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionalSpec {
    Moments {
        values: Vec<String>,
    },
    Charlier {
        mu: String,
    },
    Kravchuk {
        #[serde(rename = "N")]
        n: usize,
        p: String,
    },
    Hahn {
        alpha: String,
        beta: String,
        #[serde(rename = "N")]
        n: usize,
    },
    Discrete {
        nodes: Vec<String>,
        weights: Vec<String>,
    },
    Polymul {
        pi: Vec<String>,
        base: Box<FunctionalSpec>,
    },
    Dnu {
        nu: NuSpec,
        base: Box<FunctionalSpec>,
    },
}

/// Textual lattice parameter: `{"type":"omega","value":"1"}` or
/// `{"type":"q","value":"1/2"}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuSpec {
    #[serde(rename = "type")]
    pub kind: NuKind,
    pub value: String,
}

impl NuSpec {
    pub fn build(&self) -> Result<NuParam> {
        NuParam::new(self.kind, parse_rational(&self.value)?)
    }
}

impl FunctionalSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("functional spec: {e}")))
    }

    pub fn build(&self) -> Result<MomentFunctional> {
        match self {
            FunctionalSpec::Moments { values } => {
                let values = parse_all(values)?;
                Ok(MomentFunctional::from_moments(values))
            }
            FunctionalSpec::Charlier { mu } => charlier(parse_rational(mu)?),
            FunctionalSpec::Kravchuk { n, p } => kravchuk(*n, parse_rational(p)?),
            FunctionalSpec::Hahn { alpha, beta, n } => {
                hahn(parse_rational(alpha)?, parse_rational(beta)?, *n)
            }
            FunctionalSpec::Discrete { nodes, weights } => {
                discrete(parse_all(nodes)?, parse_all(weights)?)
            }
            FunctionalSpec::Polymul { pi, base } => {
                let pi = Poly::from_coeffs(parse_all(pi)?);
                Ok(base.build()?.poly_mul(&pi))
            }
            FunctionalSpec::Dnu { nu, base } => Ok(base.build()?.dnu(&nu.build()?)),
        }
    }
}

/// Dispatcher over the finitely supported kinds only.
pub fn finite_lattice(spec: &FunctionalSpec) -> Result<MomentFunctional> {
    match spec {
        FunctionalSpec::Kravchuk { .. }
        | FunctionalSpec::Hahn { .. }
        | FunctionalSpec::Discrete { .. } => spec.build(),
        _ => Err(Error::Domain(
            "finite_lattice accepts kravchuk, hahn or discrete specs".into(),
        )),
    }
}

fn parse_all(strings: &[String]) -> Result<Vec<Rational>> {
    strings.iter().map(|s| parse_rational(s)).collect()
}
