//! Sobolev-type orthogonality
//! `⟨p, r⟩ = ⟨𝒰, pr⟩ + λ ⟨𝒱, D_ν^m p · D_ν^m r⟩` with λ > 0,
//! and two independent constructions of its monic orthogonal sequence:
//!
//! * the **Gram route**: exact Gram–Schmidt against the inner product, valid
//!   for any positive definite pair, coherent or not;
//! * the **recursive route**: when the pair carries a coherence relation of
//!   order (m, 0), the norms `s_n` and connection coefficients `c_{j,n}`
//!   satisfy a closed descending recursion that rebuilds the sequence with
//!   no Gram matrix at all.
//!
//! The two routes must agree coefficient-exactly; that cross-check is the
//! central oracle of the crate. The λ→∞ limit sequence is computed directly
//! from its split orthogonality conditions rather than as a limit.

use crate::calculus::{self, NuParam};
use crate::coherence::{coherence_lhs, coherence_residual, CoherenceData};
use crate::error::{Error, Result};
use crate::functional::MomentFunctional;
use crate::linalg;
use crate::poly::Poly;
use crate::rational::Rational;
use crate::smop::{smop_from_moments, Smop};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// The data defining the bilinear form: the two functionals, the derivative
/// order m ≥ 1, the lattice parameter and the weight λ > 0.
#[derive(Clone, Debug)]
pub struct SobolevContext {
    pub u: MomentFunctional,
    pub v: MomentFunctional,
    pub m: usize,
    pub nu: NuParam,
    pub lambda: Rational,
}

impl SobolevContext {
    pub fn new(
        u: MomentFunctional,
        v: MomentFunctional,
        m: usize,
        nu: NuParam,
        lambda: Rational,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("sobolev order m must be >= 1".into()));
        }
        if lambda <= Rational::zero() {
            return Err(Error::Domain("lambda must be positive".into()));
        }
        Ok(SobolevContext {
            u,
            v,
            m,
            nu,
            lambda,
        })
    }

    /// Positive definiteness of both functionals on the working prefix:
    /// 𝒰 up to `n_max`, 𝒱 up to `n_max − m`.
    pub fn validate_prefix(&self, n_max: usize) -> Result<()> {
        let ur = self.u.hankel_regularity(n_max)?;
        if ur.positive_definite_prefix != Some(n_max) {
            return Err(Error::NotPositiveDefinite {
                index: ur.positive_definite_prefix.map_or(0, |p| p + 1),
            });
        }
        if n_max >= self.m {
            let vr = self.v.hankel_regularity(n_max - self.m)?;
            if vr.positive_definite_prefix != Some(n_max - self.m) {
                return Err(Error::NotPositiveDefinite {
                    index: vr.positive_definite_prefix.map_or(0, |p| p + 1),
                });
            }
        }
        Ok(())
    }
}

/// `⟨𝒰, pr⟩ + λ⟨𝒱, D_ν^m p · D_ν^m r⟩`, exact.
pub fn sobolev_inner(p: &Poly, r: &Poly, ctx: &SobolevContext) -> Result<Rational> {
    let base = ctx.u.apply(&(p * r))?;
    let dp = calculus::dnu_iter(p, &ctx.nu, ctx.m);
    let dr = calculus::dnu_iter(r, &ctx.nu, ctx.m);
    if dp.is_zero() || dr.is_zero() {
        return Ok(base);
    }
    Ok(base + &ctx.lambda * ctx.v.apply(&(&dp * &dr))?)
}

/// Exact Gram matrix `[⟨x^i, x^j⟩]_{i,j=0..n}`. Entries with i < m or j < m
/// reduce to plain moments `u_{i+j}`; the matrix is symmetric.
pub fn sobolev_gram(ctx: &SobolevContext, n: usize) -> Result<linalg::Matrix> {
    let derivs: Vec<Poly> = (0..=n)
        .map(|i| calculus::dnu_iter(&Poly::monomial(i, Rational::one()), &ctx.nu, ctx.m))
        .collect();
    let mut matrix = vec![vec![Rational::zero(); n + 1]; n + 1];
    for i in 0..=n {
        for j in i..=n {
            let mut w = ctx.u.moment(i + j)?;
            if !derivs[i].is_zero() && !derivs[j].is_zero() {
                w += &ctx.lambda * ctx.v.apply(&(&derivs[i] * &derivs[j]))?;
            }
            matrix[i][j] = w.clone();
            matrix[j][i] = w;
        }
    }
    Ok(matrix)
}

/// A monic Sobolev-orthogonal sequence with its norms and, once a coherence
/// route has filled them, the connection coefficients `c_{j,n}` of the
/// relation at level n (multiplying `S_{n−j+m}`).
#[derive(Clone, Debug)]
pub struct SobolevBasis {
    polys: Vec<Poly>,
    s_norms: Vec<Rational>,
    c: BTreeMap<(usize, usize), Rational>,
}

impl SobolevBasis {
    pub fn n_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> Result<&Poly> {
        self.polys.get(n).ok_or_else(|| {
            Error::IncompleteData(format!("basis stores 0..={}, asked {n}", self.n_max()))
        })
    }

    pub fn s_norms(&self) -> &[Rational] {
        &self.s_norms
    }

    pub fn s_norm(&self, n: usize) -> Result<&Rational> {
        self.s_norms.get(n).ok_or_else(|| {
            Error::IncompleteData(format!("norms store 0..={}, asked {n}", self.n_max()))
        })
    }

    /// `c_{j,n}`, with the conventions `c_{0,n} = 1` and `c_{j,n} = 0` for
    /// `j > n` or unfilled entries.
    pub fn connection(&self, j: usize, n: usize) -> Rational {
        if j == 0 {
            return Rational::one();
        }
        if j > n {
            return Rational::zero();
        }
        self.c.get(&(j, n)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn connection_entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.c.iter()
    }

    pub fn connection_width(&self) -> usize {
        self.c.keys().map(|&(j, _)| j).max().unwrap_or(0)
    }
}

/// Gram route: exact Gram–Schmidt of `1, x, x², …` against the Sobolev inner
/// product. Fails with the first index whose leading principal minor is not
/// positive. The connection map is left empty; coherence routes fill it.
pub fn sobolev_basis_gram(ctx: &SobolevContext, n_max: usize) -> Result<SobolevBasis> {
    ctx.validate_prefix(n_max)?;
    let mut polys: Vec<Poly> = Vec::with_capacity(n_max + 1);
    let mut s_norms: Vec<Rational> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let xn = Poly::monomial(n, Rational::one());
        let mut s = xn.clone();
        for i in 0..n {
            let coeff = sobolev_inner(&xn, &polys[i], ctx)? / &s_norms[i];
            s = s - polys[i].scale(&coeff);
        }
        let norm = sobolev_inner(&s, &s, ctx)?;
        if norm <= Rational::zero() {
            return Err(Error::NotPositiveDefinite { index: n });
        }
        polys.push(s);
        s_norms.push(norm);
    }
    // low degrees coincide with the plain orthogonal sequence
    if ctx.m > 0 && n_max + 1 > 0 {
        let upto = n_max.min(ctx.m - 1);
        let p = smop_from_moments(&ctx.u, upto)?;
        for n in 0..=upto {
            if p.poly(n)? != &polys[n] {
                return Err(Error::Inconsistency(format!(
                    "S_{n} differs from P_{n} below the derivative order"
                )));
            }
        }
    }
    Ok(SobolevBasis {
        polys,
        s_norms,
        c: BTreeMap::new(),
    })
}

/// The λ→∞ limit sequence, characterized by its split orthogonality
/// conditions: `⟨𝒰, T_n x^i⟩ = 0` for `i < min(n, m)` and
/// `⟨𝒱, D_ν^m T_n · x^j⟩ = 0` for `j < n − m`.
#[derive(Clone, Debug)]
pub struct LimitBasis {
    polys: Vec<Poly>,
}

impl LimitBasis {
    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> Result<&Poly> {
        self.polys.get(n).ok_or_else(|| {
            Error::IncompleteData(format!(
                "limit basis stores 0..={}, asked {n}",
                self.polys.len() - 1
            ))
        })
    }
}

/// Solves the `min(n,m) + max(n−m, 0) = n` linear conditions for each monic
/// `T_n` directly. The system is uniquely solvable for positive definite
/// pairs on the working prefix; a singular system reports its degree.
pub fn limit_basis(ctx: &SobolevContext, n_max: usize) -> Result<LimitBasis> {
    ctx.validate_prefix(n_max)?;
    let mut polys = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let derivs: Vec<Poly> = (0..=n)
            .map(|k| calculus::dnu_iter(&Poly::monomial(k, Rational::one()), &ctx.nu, ctx.m))
            .collect();
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n);
        let mut rhs: Vec<Rational> = Vec::with_capacity(n);
        for i in 0..n.min(ctx.m) {
            let row = (0..n)
                .map(|k| ctx.u.moment(k + i))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            rhs.push(-ctx.u.moment(n + i)?);
        }
        for j in 0..n.saturating_sub(ctx.m) {
            let row = (0..n)
                .map(|k| ctx.v.apply(&derivs[k].mul_xpow(j)))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            rhs.push(-ctx.v.apply(&derivs[n].mul_xpow(j))?);
        }
        let solution = linalg::solve(&rows, &rhs).ok_or(Error::SingularSystem { index: n })?;
        if !linalg::null_space(&rows).is_empty() {
            return Err(Error::SingularSystem { index: n });
        }
        let mut coeffs = solution;
        coeffs.push(Rational::one());
        polys.push(Poly::from_coeffs(coeffs));
    }
    Ok(LimitBasis { polys })
}

#[derive(Clone, Debug)]
pub struct LimitLinkEntry {
    pub n: usize,
    /// `D_ν^m T_{n+m} / η_{n,m,ν} = Q_n` coefficient-exactly.
    pub derivative_link_ok: bool,
    /// The expansion of `Q_n` over the derived P sequence has the predicted
    /// inner-product coefficients.
    pub expansion_ok: bool,
}

#[derive(Clone, Debug)]
pub struct LimitLinkReport {
    pub entries: Vec<LimitLinkEntry>,
}

impl LimitLinkReport {
    pub fn pass(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.derivative_link_ok && e.expansion_ok)
    }
}

/// Checks the two links between the limit sequence and the 𝒱-sequence: the
/// normalized m-th derivative of `T_{n+m}` must equal `Q_n`, and the
/// expansion of `Q_n` over the derived P sequence must carry the coefficients
/// `(η_{j,m,ν}/η_{n,m,ν}) ⟨𝒰, T_{n+m} P_{j+m}⟩ / ⟨𝒰, P²_{j+m}⟩`.
pub fn verify_limit_link(
    ctx: &SobolevContext,
    t: &LimitBasis,
    p: &Smop,
    q: &Smop,
    n_max: usize,
) -> Result<LimitLinkReport> {
    let derived = p.derived(ctx.m, &ctx.nu)?;
    let mut entries = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let eta_n = calculus::dnu_monic_factor(n, ctx.m, &ctx.nu)?;
        let lowered = calculus::dnu_iter(t.poly(n + ctx.m)?, &ctx.nu, ctx.m).scale(&eta_n.recip());
        let derivative_link_ok = &lowered == q.poly(n)?;

        let coeffs = q.poly(n)?.expand_in_monic_basis(&derived.polys()[..=n])?;
        let mut expansion_ok = coeffs[n].is_one();
        for (j, found) in coeffs.iter().enumerate().take(n) {
            let eta_j = calculus::dnu_monic_factor(j, ctx.m, &ctx.nu)?;
            let predicted = (eta_j / &eta_n)
                * ctx.u.apply(&(t.poly(n + ctx.m)? * p.poly(j + ctx.m)?))?
                / p.norm(j + ctx.m)?;
            expansion_ok &= found == &predicted;
        }
        entries.push(LimitLinkEntry {
            n,
            derivative_link_ok,
            expansion_ok,
        });
    }
    Ok(LimitLinkReport { entries })
}

/// `ã_{i,n} = (η_{n,m,ν}/η_{n−i,m,ν}) a_{i,n}`, the coefficient the
/// antiderivative step attaches to `P_{n−i+m}`.
fn a_tilde(c: &CoherenceData, nu: &NuParam, i: usize, n: usize) -> Result<Rational> {
    if i > n {
        return Ok(Rational::zero());
    }
    let m = c.p_order;
    Ok(
        calculus::dnu_monic_factor(n, m, nu)? / calculus::dnu_monic_factor(n - i, m, nu)?
            * c.a(i, n),
    )
}

/// `b̃_{i,n} = η_{n,m,ν} b_{i,n}`.
fn b_tilde(c: &CoherenceData, nu: &NuParam, i: usize, n: usize) -> Result<Rational> {
    if i > n {
        return Ok(Rational::zero());
    }
    Ok(calculus::dnu_monic_factor(n, c.p_order, nu)? * c.b(i, n))
}

/// The left side of the connection relation at level n:
/// `P_{n+m} + Σ_{i=1..M} ã_{i,n} P_{n−i+m}`.
fn connection_lhs(p: &Smop, c: &CoherenceData, nu: &NuParam, n: usize) -> Result<Poly> {
    let m = c.p_order;
    let mut acc = p.poly(n + m)?.clone();
    for i in 1..=c.p_width.min(n) {
        acc = acc + p.poly(n - i + m)?.scale(&a_tilde(c, nu, i, n)?);
    }
    Ok(acc)
}

/// The source term of the norm/coefficient recursion:
/// `ζ_{j,n} = Σ_{i=j..M} ã_{i,n+j} ã_{i−j,n} ⟨𝒰,P²_{n+j−i+m}⟩
///          + λ Σ_{i=j..N} b̃_{i,n+j} b̃_{i−j,n} ⟨𝒱,Q²_{n+j−i}⟩`.
pub fn recursion_zeta(
    ctx: &SobolevContext,
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    j: usize,
    n: usize,
) -> Result<Rational> {
    let m = c.p_order;
    let t = n + j;
    let mut acc = Rational::zero();
    for i in j..=c.p_width {
        if i > t || i - j > n {
            continue;
        }
        let term = a_tilde(c, &ctx.nu, i, t)? * a_tilde(c, &ctx.nu, i - j, n)?;
        if !term.is_zero() {
            acc += term * p.norm(t - i + m)?;
        }
    }
    let mut vacc = Rational::zero();
    for i in j..=c.q_width {
        if i > t || i - j > n {
            continue;
        }
        let term = b_tilde(c, &ctx.nu, i, t)? * b_tilde(c, &ctx.nu, i - j, n)?;
        if !term.is_zero() {
            vacc += term * q.norm(t - i)?;
        }
    }
    Ok(acc + &ctx.lambda * vacc)
}

/// Recursive route: computes every `s_n` and `c_{j,n}` from the coherence
/// data alone, then rebuilds `S_{n+m}` from the connection relation. No Gram
/// matrix is formed anywhere.
///
/// For each level t the coefficients `c_{j,t}` are evaluated in descending j,
/// so the `c_{j+ℓ,t}` needed on the right are already known; the j = 0 row
/// then yields `s_{t+m}`.
pub fn sobolev_basis_recursive(
    ctx: &SobolevContext,
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    n_max: usize,
) -> Result<SobolevBasis> {
    if c.q_order != 0 {
        return Err(Error::Domain(
            "recursive route needs a coherence relation of order (m, 0)".into(),
        ));
    }
    if c.p_order != ctx.m {
        return Err(Error::Domain(
            "coherence derivative order must match the inner product order".into(),
        ));
    }
    let m = ctx.m;
    let width = c.p_width.max(c.q_width);
    if n_max < m {
        // nothing beyond the seed range
        let p_small = smop_from_moments(&ctx.u, n_max)?;
        return Ok(SobolevBasis {
            polys: p_small.polys().to_vec(),
            s_norms: p_small.norms().to_vec(),
            c: BTreeMap::new(),
        });
    }
    let levels = n_max - m;
    if c.n_max < levels {
        return Err(Error::IncompleteData(format!(
            "coherence data stores n_max = {}, need {levels}",
            c.n_max
        )));
    }

    let mut s_norms: Vec<Rational> = (0..m).map(|t| p.norm(t).cloned()).collect::<Result<_>>()?;
    let mut polys: Vec<Poly> = (0..m).map(|t| p.poly(t).cloned()).collect::<Result<_>>()?;
    let mut conn: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let get = |map: &BTreeMap<(usize, usize), Rational>, j: usize, n: usize| -> Rational {
        if j == 0 {
            Rational::one()
        } else if j > n {
            Rational::zero()
        } else {
            map.get(&(j, n)).cloned().unwrap_or_else(Rational::zero)
        }
    };

    for t in 0..=levels {
        for j in (1..=width).rev() {
            if t < j {
                continue; // c_{j,t} = 0 by the seed
            }
            let n = t - j;
            let mut val = recursion_zeta(ctx, p, q, c, j, n)?;
            for l in 1..=(width - j) {
                if l > n {
                    continue;
                }
                let c_l_n = get(&conn, l, n);
                let c_jl_t = get(&conn, j + l, t);
                if c_l_n.is_zero() || c_jl_t.is_zero() {
                    continue;
                }
                val -= c_l_n * c_jl_t * &s_norms[n + m - l];
            }
            let denom = &s_norms[n + m];
            if denom.is_zero() {
                return Err(Error::NotPositiveDefinite { index: n + m });
            }
            conn.insert((j, t), val / denom);
        }
        // j = 0 row yields the next norm
        let mut norm = recursion_zeta(ctx, p, q, c, 0, t)?;
        for l in 1..=width {
            if l > t {
                continue;
            }
            let c_l_t = get(&conn, l, t);
            if c_l_t.is_zero() {
                continue;
            }
            norm -= &c_l_t * &c_l_t * &s_norms[t + m - l];
        }
        if norm.is_zero() {
            return Err(Error::NotPositiveDefinite { index: t + m });
        }
        s_norms.push(norm);
        // S_{t+m} = connection LHS − Σ_{j≥1} c_{j,t} S_{t−j+m}
        let mut s = connection_lhs(p, c, &ctx.nu, t)?;
        for j in 1..=width.min(t) {
            let cv = get(&conn, j, t);
            if !cv.is_zero() {
                s = s - polys[t - j + m].scale(&cv);
            }
        }
        polys.push(s);
    }

    Ok(SobolevBasis {
        polys,
        s_norms,
        c: conn,
    })
}

/// The nonvanishing criterion for the extreme connection coefficient in the
/// balanced case M = N = K:
/// `a_{K,n} ⟨𝒰,P²_{n−K+m}⟩ + λ η²_{n−K,m,ν} b_{K,n} ⟨𝒱,Q²_{n−K}⟩`.
pub fn extreme_coeff_criterion(
    ctx: &SobolevContext,
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    n: usize,
) -> Result<Rational> {
    let k = c.p_width.max(c.q_width);
    if n < k {
        return Err(Error::Domain("criterion defined for n >= K".into()));
    }
    let m = c.p_order;
    let eta = calculus::dnu_monic_factor(n - k, m, &ctx.nu)?;
    Ok(c.a(k, n) * p.norm(n - k + m)? + &ctx.lambda * &eta * &eta * c.b(k, n) * q.norm(n - k)?)
}

/// Inner-product route for the connection coefficients: fills `c_{j,n}` by
///
/// ```text
/// c_{j,n} = η_{n,m,ν}/s_{n−j+m} · [ Σ_{i=j..M} a_{i,n}/η_{n−i,m,ν} ⟨𝒰, P_{n−i+m} S_{n−j+m}⟩
///                                  + λ Σ_{i=j..N} b_{i,n} ⟨𝒱, Q_{n−i} D_ν^m S_{n−j+m}⟩ ]
/// ```
///
/// then verifies the connection relation coefficient-exactly on the whole
/// range and checks the extreme-coefficient case predicates. A nonzero
/// relation residual means a broken precondition and is an error.
pub fn connection_coeffs_inner(
    ctx: &SobolevContext,
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    basis: &SobolevBasis,
    n_max: usize,
) -> Result<SobolevBasis> {
    if c.q_order != 0 {
        return Err(Error::Domain(
            "connection coefficients need a coherence relation of order (m, 0)".into(),
        ));
    }
    if c.p_order != ctx.m {
        return Err(Error::Domain(
            "coherence derivative order must match the inner product order".into(),
        ));
    }
    let m = ctx.m;
    let width = c.p_width.max(c.q_width);
    if basis.n_max() < n_max + m {
        return Err(Error::IncompleteData(format!(
            "basis stores 0..={}, need {}",
            basis.n_max(),
            n_max + m
        )));
    }
    let mut out = basis.clone();
    out.c.clear();
    for n in 0..=n_max {
        let eta_n = calculus::dnu_monic_factor(n, m, &ctx.nu)?;
        for j in 1..=width.min(n) {
            let s_target = basis.s_norm(n - j + m)?;
            let mut total = Rational::zero();
            for i in j..=c.p_width.min(n) {
                let a = c.a(i, n);
                if a.is_zero() {
                    continue;
                }
                let eta_i = calculus::dnu_monic_factor(n - i, m, &ctx.nu)?;
                total += a / eta_i
                    * ctx
                        .u
                        .apply(&(p.poly(n - i + m)? * basis.poly(n - j + m)?))?;
            }
            let ds = calculus::dnu_iter(basis.poly(n - j + m)?, &ctx.nu, m);
            let mut vtotal = Rational::zero();
            for i in j..=c.q_width.min(n) {
                let b = c.b(i, n);
                if b.is_zero() {
                    continue;
                }
                vtotal += b * ctx.v.apply(&(q.poly(n - i)? * &ds))?;
            }
            total += &ctx.lambda * vtotal;
            let value = &eta_n * total / s_target;
            if !value.is_zero() {
                out.c.insert((j, n), value);
            }
        }
    }

    // the relation itself must close exactly
    for n in 0..=n_max {
        let lhs = connection_lhs(p, c, &ctx.nu, n)?;
        let mut rhs = basis.poly(n + m)?.clone();
        for j in 1..=width.min(n) {
            let cv = out.connection(j, n);
            if !cv.is_zero() {
                rhs = rhs + basis.poly(n - j + m)?.scale(&cv);
            }
        }
        if lhs != rhs {
            return Err(Error::Inconsistency(format!(
                "connection relation fails at level {n}"
            )));
        }
    }

    // extreme-coefficient case predicates
    for n in width.max(1)..=n_max {
        if width == 0 {
            break;
        }
        let c_top = out.connection(width, n);
        let predicate = match c.p_width.cmp(&c.q_width) {
            std::cmp::Ordering::Greater => (!c.a(c.p_width, n).is_zero()).then_some(true),
            std::cmp::Ordering::Less => (!c.b(c.q_width, n).is_zero()).then_some(true),
            std::cmp::Ordering::Equal => {
                if c.a(width, n).is_zero() || c.b(width, n).is_zero() {
                    None
                } else {
                    Some(!extreme_coeff_criterion(ctx, p, q, c, n)?.is_zero())
                }
            }
        };
        if let Some(expect_nonzero) = predicate {
            if expect_nonzero == c_top.is_zero() {
                return Err(Error::Inconsistency(format!(
                    "extreme connection coefficient at level {n} contradicts its predicate"
                )));
            }
        }
    }
    Ok(out)
}

/// Converse direction: given the connection relation with its `a` and `c`
/// coefficients, recover the Q-side coherence coefficients
/// `b_{j,n} = ⟨𝒱, R_n Q_{n−j}⟩ / ⟨𝒱, Q²_{n−j}⟩` and re-verify the coherence
/// relation. Returns the recovered data together with the levels n ≥ K where
/// the extreme `b_{K,n}` vanishes (reported, not asserted, since the
/// coherence order is then undetermined).
pub fn coherence_from_connection(
    ctx: &SobolevContext,
    p: &Smop,
    q: &Smop,
    a_side: &CoherenceData,
    basis: &SobolevBasis,
    n_max: usize,
) -> Result<(CoherenceData, Vec<usize>)> {
    if a_side.q_order != 0 || a_side.p_order != ctx.m {
        return Err(Error::Domain(
            "converse needs a coherence relation of order (m, 0)".into(),
        ));
    }
    let m = ctx.m;
    let width = basis.connection_width().max(a_side.q_width);

    // the hypothesis: the connection relation holds with the supplied a, c
    for n in 0..=n_max {
        let lhs = connection_lhs(p, a_side, &ctx.nu, n)?;
        let mut rhs = basis.poly(n + m)?.clone();
        for j in 1..=width.min(n) {
            let cv = basis.connection(j, n);
            if !cv.is_zero() {
                rhs = rhs + basis.poly(n - j + m)?.scale(&cv);
            }
        }
        if lhs != rhs {
            return Err(Error::ConverseHypothesis(format!(
                "connection relation fails at level {n}"
            )));
        }
    }

    let mut data = CoherenceData::new(a_side.p_width, width, m, 0, n_max);
    for (&(i, n), v) in a_side.a_entries() {
        if n <= n_max {
            data.set_a(i, n, v.clone());
        }
    }
    let mut vanishing = Vec::new();
    for n in 0..=n_max {
        let r_n = coherence_lhs(p, &data, &ctx.nu, n)?;
        let coeffs = q.expand(&r_n)?;
        if !coeffs[n].is_one() {
            return Err(Error::ConverseHypothesis(format!(
                "expansion of the derived relation is not monic at level {n}"
            )));
        }
        for (idx, coeff) in coeffs.iter().enumerate().take(n) {
            let j = n - idx;
            if j > width {
                if !coeff.is_zero() {
                    return Err(Error::ConverseHypothesis(format!(
                        "coefficient beyond the claimed width at level {n}, index {idx}"
                    )));
                }
            } else if !coeff.is_zero() {
                data.set_b(j, n, coeff.clone());
            }
        }
        if n >= width && data.b(width, n).is_zero() {
            vanishing.push(n);
        }
    }

    let residual = coherence_residual(p, q, &data, &ctx.nu)?;
    if residual.iter().any(|r| !r.is_zero()) {
        return Err(Error::ConverseHypothesis(
            "recovered coefficients do not satisfy the coherence relation".into(),
        ));
    }
    Ok((data, vanishing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::rational::{rat, rat_i64};
    use num_traits::Signed;

    fn om1() -> NuParam {
        NuParam::omega(rat_i64(1)).unwrap()
    }

    fn charlier_ctx(lambda: Rational) -> SobolevContext {
        let u = families::charlier(rat_i64(1)).unwrap();
        SobolevContext::new(u.clone(), u, 1, om1(), lambda).unwrap()
    }

    fn charlier_smop(n_max: usize) -> Smop {
        smop_from_moments(&families::charlier(rat_i64(1)).unwrap(), n_max).unwrap()
    }

    #[test]
    fn context_validation() {
        let u = families::charlier(rat_i64(1)).unwrap();
        assert!(SobolevContext::new(u.clone(), u.clone(), 0, om1(), rat_i64(1)).is_err());
        assert!(SobolevContext::new(u.clone(), u.clone(), 1, om1(), rat_i64(0)).is_err());
        assert!(SobolevContext::new(u.clone(), u, 1, om1(), rat(-1, 2)).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let ctx = charlier_ctx(rat_i64(1));
        // constants see only the plain moment
        assert_eq!(
            sobolev_inner(&Poly::one(), &Poly::one(), &ctx).unwrap(),
            rat_i64(1)
        );
        // ⟨x, x⟩ = u_2 + λ v_0
        assert_eq!(
            sobolev_inner(&Poly::x(), &Poly::x(), &ctx).unwrap(),
            rat_i64(3)
        );
        // ⟨P_2, P_2⟩ = ξ_2 + λ·4·ξ_1 = 2 + 4
        let p2 = Poly::from_i64(&[1, -3, 1]);
        assert_eq!(sobolev_inner(&p2, &p2, &ctx).unwrap(), rat_i64(6));
    }

    #[test]
    fn gram_matrix_entries() {
        let ctx = charlier_ctx(rat_i64(1));
        let g = sobolev_gram(&ctx, 3).unwrap();
        // first row is plain moments
        for j in 0..=3 {
            assert_eq!(g[0][j], ctx.u.moment(j).unwrap());
        }
        // (1,1): u_2 + λ η_{0,1}² v_0 = 3
        assert_eq!(g[1][1], rat_i64(3));
        // symmetry
        for i in 0..=3 {
            for j in 0..=3 {
                assert_eq!(g[i][j], g[j][i]);
            }
        }
    }

    #[test]
    fn q_lattice_gram_entries_match_closed_form() {
        // on the q-lattice the m-th derivative of a monomial is a monomial,
        // so the Gram entry collapses to u_{i+j} + λ η_{i-m} η_{j-m} v_{i+j-2m}
        let half = rat(1, 2);
        let nodes: Vec<Rational> = (0..8)
            .map(|k| num_traits::pow::pow(half.clone(), k))
            .collect();
        let wu: Vec<Rational> = (0..8).map(|k| rat(1, 1 + k as i64)).collect();
        let wv: Vec<Rational> = (0..8).map(|k| rat(2, 3 + k as i64)).collect();
        let u = families::discrete(nodes.clone(), wu).unwrap();
        let v = families::discrete(nodes, wv).unwrap();
        let nu = NuParam::q(rat(1, 2)).unwrap();
        for m in [1usize, 2] {
            let ctx = SobolevContext::new(u.clone(), v.clone(), m, nu.clone(), rat(3, 2)).unwrap();
            let g = sobolev_gram(&ctx, 5).unwrap();
            for i in 0..=5usize {
                for j in 0..=5usize {
                    let mut want = u.moment(i + j).unwrap();
                    if i >= m && j >= m {
                        let ei = calculus::dnu_monic_factor(i - m, m, &nu).unwrap();
                        let ej = calculus::dnu_monic_factor(j - m, m, &nu).unwrap();
                        want += rat(3, 2) * ei * ej * v.moment(i + j - 2 * m).unwrap();
                    }
                    assert_eq!(g[i][j], want, "m={m} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn gram_route_reproduces_plain_sequence_in_degenerate_case() {
        // same functional on both slots with m = 1: the derived sequence
        // equals the main one, so S_n = P_n for every λ
        let p = charlier_smop(10);
        for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
            let ctx = charlier_ctx(lam);
            let s = sobolev_basis_gram(&ctx, 10).unwrap();
            for n in 0..=10 {
                assert_eq!(s.poly(n).unwrap(), p.poly(n).unwrap(), "n={n}");
            }
        }
    }

    #[test]
    fn gram_route_norms_match_inner_products() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let v = families::kravchuk(20, rat(1, 2)).unwrap();
        let ctx = SobolevContext::new(u, v, 1, om1(), rat(3, 2)).unwrap();
        let s = sobolev_basis_gram(&ctx, 6).unwrap();
        for n in 0..=6 {
            let direct = sobolev_inner(s.poly(n).unwrap(), s.poly(n).unwrap(), &ctx).unwrap();
            assert_eq!(&direct, s.s_norm(n).unwrap());
            for i in 0..n {
                let xi = Poly::monomial(i, Rational::one());
                assert!(sobolev_inner(s.poly(n).unwrap(), &xi, &ctx)
                    .unwrap()
                    .is_zero());
            }
        }
    }

    #[test]
    fn norms_grow_with_lambda() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let v = families::kravchuk(20, rat(1, 2)).unwrap();
        let lambdas = [rat(1, 2), rat_i64(1), rat_i64(2)];
        let mut previous: Option<Vec<Rational>> = None;
        for lam in lambdas {
            let ctx = SobolevContext::new(u.clone(), v.clone(), 1, om1(), lam).unwrap();
            let s = sobolev_basis_gram(&ctx, 6).unwrap();
            if let Some(prev) = previous {
                for n in 1..=6 {
                    assert!(s.s_norms()[n] > prev[n], "n={n}");
                }
            }
            previous = Some(s.s_norms().to_vec());
        }
    }

    #[test]
    fn limit_basis_low_degrees_are_plain() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let v = families::kravchuk(20, rat(1, 2)).unwrap();
        let ctx = SobolevContext::new(u.clone(), v, 2, om1(), rat_i64(1)).unwrap();
        let t = limit_basis(&ctx, 5).unwrap();
        let p = smop_from_moments(&u, 5).unwrap();
        for n in 0..2 {
            assert_eq!(t.poly(n).unwrap(), p.poly(n).unwrap());
        }
    }

    #[test]
    fn limit_basis_equals_sequence_in_degenerate_case() {
        let ctx = charlier_ctx(rat_i64(1));
        let t = limit_basis(&ctx, 10).unwrap();
        let p = charlier_smop(10);
        for n in 0..=10 {
            assert_eq!(t.poly(n).unwrap(), p.poly(n).unwrap());
        }
    }

    #[test]
    fn gram_route_approaches_limit_basis() {
        // coefficients of S_n at λ = 10^6 agree with T_n to within 10^-3
        let u = families::charlier(rat_i64(1)).unwrap();
        let v = families::charlier(rat_i64(2)).unwrap();
        let big = rat_i64(1_000_000);
        let ctx = SobolevContext::new(u.clone(), v.clone(), 1, om1(), big).unwrap();
        let s = sobolev_basis_gram(&ctx, 6).unwrap();
        let t = limit_basis(&ctx, 6).unwrap();
        let tol = rat(1, 1000);
        for n in 0..=6 {
            for k in 0..=n {
                let diff = (s.poly(n).unwrap().coeff(k) - t.poly(n).unwrap().coeff(k)).abs();
                assert!(diff <= tol, "n={n} k={k} diff={diff}");
            }
        }
    }

    #[test]
    fn limit_link_holds_in_degenerate_case() {
        let ctx = charlier_ctx(rat_i64(1));
        let p = charlier_smop(12);
        let t = limit_basis(&ctx, 9).unwrap();
        let report = verify_limit_link(&ctx, &t, &p, &p, 8).unwrap();
        assert!(report.pass());
    }

    #[test]
    fn limit_link_detects_corruption() {
        let ctx = charlier_ctx(rat_i64(1));
        let p = charlier_smop(12);
        let t = limit_basis(&ctx, 9).unwrap();
        let mut corrupted = t.polys().to_vec();
        corrupted[3] = corrupted[3].clone() + Poly::x();
        let bad = LimitBasis { polys: corrupted };
        let report = verify_limit_link(&ctx, &bad, &p, &p, 8).unwrap();
        assert!(!report.entries[2].derivative_link_ok);
        assert!(!report.pass());
    }

    fn synthetic_pair(n_max: usize) -> CoherenceData {
        CoherenceData::constant_pair(1, 1, 1, 0, n_max, &Rational::one())
    }

    #[test]
    fn zeta_hand_values() {
        let p = charlier_smop(14);
        for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
            let ctx = charlier_ctx(lam.clone());
            let c = synthetic_pair(12);
            // ζ_{0,1} = 6 + 8λ, ζ_{1,1} = 3 + 6λ
            assert_eq!(
                recursion_zeta(&ctx, &p, &p, &c, 0, 1).unwrap(),
                rat_i64(6) + rat_i64(8) * &lam
            );
            assert_eq!(
                recursion_zeta(&ctx, &p, &p, &c, 1, 1).unwrap(),
                rat_i64(3) + rat_i64(6) * &lam
            );
        }
    }

    #[test]
    fn recursion_hand_values() {
        let p = charlier_smop(14);
        for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
            let ctx = charlier_ctx(lam.clone());
            let c = synthetic_pair(12);
            let basis = sobolev_basis_recursive(&ctx, &p, &p, &c, 13).unwrap();
            // s_1 = 1 + λ, s_2 = 2 + 4λ
            assert_eq!(basis.s_norms()[1], rat_i64(1) + &lam);
            assert_eq!(basis.s_norms()[2], rat_i64(2) + rat_i64(4) * &lam);
            // c_{1,1} = 2, c_{1,2} = 3/2, generally (n+1)/n
            assert_eq!(basis.connection(1, 1), rat_i64(2));
            assert_eq!(basis.connection(1, 2), rat(3, 2));
            for n in 1..=10usize {
                assert_eq!(
                    basis.connection(1, n),
                    Rational::new(((n + 1) as i64).into(), (n as i64).into()),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn inner_route_matches_recursion_on_synthetic_pair() {
        let p = charlier_smop(14);
        let lam = rat(1, 2);
        let ctx = charlier_ctx(lam);
        let c = synthetic_pair(12);
        let gram = sobolev_basis_gram(&ctx, 13).unwrap();
        let filled = connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12).unwrap();
        let rec = sobolev_basis_recursive(&ctx, &p, &p, &c, 13).unwrap();
        for n in 0..=13 {
            assert_eq!(filled.poly(n).unwrap(), rec.poly(n).unwrap(), "poly {n}");
            assert_eq!(
                filled.s_norm(n).unwrap(),
                rec.s_norm(n).unwrap(),
                "norm {n}"
            );
        }
        for n in 1..=12 {
            assert_eq!(filled.connection(1, n), rec.connection(1, n), "c(1,{n})");
        }
    }

    #[test]
    fn case_predicate_on_synthetic_pair() {
        let p = charlier_smop(14);
        let ctx = charlier_ctx(rat_i64(1));
        let c = synthetic_pair(12);
        // a ξ_2 + λ η² b ξ_1 = 2 + 4 = 6 at n = 2, λ = 1
        assert_eq!(
            extreme_coeff_criterion(&ctx, &p, &p, &c, 2).unwrap(),
            rat_i64(6)
        );
    }

    #[test]
    fn degenerate_pair_connection_is_empty() {
        let p = charlier_smop(14);
        let ctx = charlier_ctx(rat_i64(2));
        let c = CoherenceData::new(0, 0, 1, 0, 12);
        let gram = sobolev_basis_gram(&ctx, 13).unwrap();
        let filled = connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12).unwrap();
        assert_eq!(filled.connection_entries().count(), 0);
        let rec = sobolev_basis_recursive(&ctx, &p, &p, &c, 13).unwrap();
        for n in 0..=13 {
            assert_eq!(rec.poly(n).unwrap(), p.poly(n).unwrap());
        }
    }

    #[test]
    fn converse_recovers_synthetic_coefficients() {
        let p = charlier_smop(14);
        let ctx = charlier_ctx(rat_i64(1));
        let c = synthetic_pair(12);
        let gram = sobolev_basis_gram(&ctx, 13).unwrap();
        let filled = connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12).unwrap();
        let (recovered, vanishing) =
            coherence_from_connection(&ctx, &p, &p, &c, &filled, 10).unwrap();
        assert!(vanishing.is_empty());
        for n in 1..=10 {
            assert_eq!(recovered.b(1, n), rat_i64(1), "n={n}");
        }
        let res = coherence_residual(&p, &p, &recovered, &ctx.nu).unwrap();
        assert!(res.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn converse_on_degenerate_pair_is_empty() {
        let p = charlier_smop(14);
        let ctx = charlier_ctx(rat_i64(1));
        let c = CoherenceData::new(0, 0, 1, 0, 12);
        let gram = sobolev_basis_gram(&ctx, 13).unwrap();
        let filled = connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12).unwrap();
        let (recovered, vanishing) =
            coherence_from_connection(&ctx, &p, &p, &c, &filled, 10).unwrap();
        assert_eq!(recovered.b_entries().count(), 0);
        assert!(vanishing.is_empty());
    }

    #[test]
    fn converse_rejects_corrupted_connection() {
        let p = charlier_smop(14);
        let ctx = charlier_ctx(rat_i64(1));
        let c = synthetic_pair(12);
        let gram = sobolev_basis_gram(&ctx, 13).unwrap();
        let mut filled = connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12).unwrap();
        filled.c.insert((1, 4), rat_i64(7));
        assert!(matches!(
            coherence_from_connection(&ctx, &p, &p, &c, &filled, 10),
            Err(Error::ConverseHypothesis(_))
        ));
    }
}
