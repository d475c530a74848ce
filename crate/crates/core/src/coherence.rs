//! Coherence relations between two monic orthogonal sequences and the
//! distributional identities they force.
//!
//! Two sequences are coherently related when their normalized derived
//! sequences satisfy, for every n,
//!
//! ```text
//! P^{[m,ν]}_n + Σ_{i=1..M} a_{i,n} P^{[m,ν]}_{n−i}
//!   = Q^{[k,ν]}_n + Σ_{i=1..N} b_{i,n} Q^{[k,ν]}_{n−i}
//! ```
//!
//! with nonzero extreme coefficients. When the dual-basis gate matrix built
//! from the coefficients is nonsingular, the two functionals are linked by a
//! distributional relation `D_{ν*}^{m−k}[φ𝒱] = ψ𝒰` and by a rational
//! modification `ϕ𝒰 = ρ𝒱`; both are realized here as finite-degree solvers
//! plus verifiers, usable whether or not the gate hypothesis holds.

use crate::calculus::{self, NuParam};
use crate::error::{Error, Result};
use crate::functional::MomentFunctional;
use crate::linalg;
use crate::poly::Poly;
use crate::rational::Rational;
use crate::semiclassical::PearsonPair;
use crate::smop::Smop;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Coefficient data of a coherence relation. The implicit conventions
/// `a_{0,n} = b_{0,n} = 1` and `a_{i,n} = 0` for `i > n` are applied by the
/// accessors; only `1 ≤ i ≤ width` entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceData {
    /// Number of extra terms on the P side (M).
    pub p_width: usize,
    /// Number of extra terms on the Q side (N).
    pub q_width: usize,
    /// Derivative order on the P side (m).
    pub p_order: usize,
    /// Derivative order on the Q side (k).
    pub q_order: usize,
    pub n_max: usize,
    a: BTreeMap<(usize, usize), Rational>,
    b: BTreeMap<(usize, usize), Rational>,
}

impl CoherenceData {
    pub fn new(
        p_width: usize,
        q_width: usize,
        p_order: usize,
        q_order: usize,
        n_max: usize,
    ) -> Self {
        CoherenceData {
            p_width,
            q_width,
            p_order,
            q_order,
            n_max,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
        }
    }

    /// Synthetic data with every stored coefficient equal to `value`.
    pub fn constant_pair(
        p_width: usize,
        q_width: usize,
        p_order: usize,
        q_order: usize,
        n_max: usize,
        value: &Rational,
    ) -> Self {
        let mut c = CoherenceData::new(p_width, q_width, p_order, q_order, n_max);
        for n in 0..=n_max {
            for i in 1..=p_width.min(n) {
                c.set_a(i, n, value.clone());
            }
            for i in 1..=q_width.min(n) {
                c.set_b(i, n, value.clone());
            }
        }
        c
    }

    pub fn set_a(&mut self, i: usize, n: usize, value: Rational) {
        debug_assert!(1 <= i && i <= self.p_width && i <= n && n <= self.n_max);
        self.a.insert((i, n), value);
    }

    pub fn set_b(&mut self, i: usize, n: usize, value: Rational) {
        debug_assert!(1 <= i && i <= self.q_width && i <= n && n <= self.n_max);
        self.b.insert((i, n), value);
    }

    pub fn a(&self, i: usize, n: usize) -> Rational {
        if i == 0 {
            return Rational::one();
        }
        if i > n || i > self.p_width {
            return Rational::zero();
        }
        self.a.get(&(i, n)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn b(&self, i: usize, n: usize) -> Rational {
        if i == 0 {
            return Rational::one();
        }
        if i > n || i > self.q_width {
            return Rational::zero();
        }
        self.b.get(&(i, n)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn a_entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.a.iter()
    }

    pub fn b_entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.b.iter()
    }

    /// Nonvanishing of the extreme coefficients on the stored range.
    pub fn extremes_ok(&self) -> bool {
        let a_ok = (self.p_width..=self.n_max).all(|n| !self.a(self.p_width, n).is_zero());
        let b_ok = (self.q_width..=self.n_max).all(|n| !self.b(self.q_width, n).is_zero());
        a_ok && b_ok
    }
}

/// Fits coherence coefficients degree by degree, solving the per-n linear
/// system exactly. Succeeds only if every residual is the zero polynomial and
/// the extreme-coefficient invariants hold; `None` otherwise (failure to fit
/// is a valid outcome, not an error).
pub fn coherence_fit(
    p: &Smop,
    q: &Smop,
    p_width: usize,
    q_width: usize,
    p_order: usize,
    q_order: usize,
    nu: &NuParam,
    n_max: usize,
) -> Result<Option<CoherenceData>> {
    let dp = p.derived(p_order, nu)?;
    let dq = q.derived(q_order, nu)?;
    if dp.polys().len() <= n_max || dq.polys().len() <= n_max {
        return Err(Error::IncompleteData(
            "stored sequences too short for the requested fit range".into(),
        ));
    }
    let mut data = CoherenceData::new(p_width, q_width, p_order, q_order, n_max);
    for n in 0..=n_max {
        let ka = p_width.min(n);
        let kb = q_width.min(n);
        let target = dq.poly(n)? - dp.poly(n)?;
        // rows: coefficients of x^0..x^{n-1}; columns: a_1..a_ka, b_1..b_kb
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for d in 0..n {
            let mut row = Vec::with_capacity(ka + kb);
            for i in 1..=ka {
                row.push(dp.poly(n - i)?.coeff(d));
            }
            for i in 1..=kb {
                row.push(-dq.poly(n - i)?.coeff(d));
            }
            rows.push(row);
            rhs.push(target.coeff(d));
        }
        let Some(particular) = linalg::solve(&rows, &rhs) else {
            return Ok(None);
        };
        // When the per-n solution space has free directions, prefer a
        // representative whose extreme coefficients are nonzero; subsets of
        // the canonical kernel basis are tried in a fixed order.
        let kernel = linalg::null_space(&rows);
        let extremes_nonzero = |x: &[Rational]| {
            let a_ok = ka == 0 || n < p_width || !x[ka - 1].is_zero();
            let b_ok = kb == 0 || n < q_width || !x[ka + kb - 1].is_zero();
            a_ok && b_ok
        };
        let mut solution = particular.clone();
        if !extremes_nonzero(&solution) && kernel.len() <= 8 {
            'search: for mask in 1u32..(1u32 << kernel.len()) {
                let mut cand = particular.clone();
                for (bit, v) in kernel.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        for (c, kv) in cand.iter_mut().zip(v) {
                            *c += kv;
                        }
                    }
                }
                if extremes_nonzero(&cand) {
                    solution = cand;
                    break 'search;
                }
            }
        }
        for i in 1..=ka {
            data.set_a(i, n, solution[i - 1].clone());
        }
        for i in 1..=kb {
            data.set_b(i, n, solution[ka + i - 1].clone());
        }
    }
    if !data.extremes_ok() {
        return Ok(None);
    }
    Ok(Some(data))
}

/// The left side `R_n = Σ_{i=0..M} a_{i,n} P^{[m,ν]}_{n−i}` of the coherence
/// relation.
pub fn coherence_lhs(p: &Smop, c: &CoherenceData, nu: &NuParam, n: usize) -> Result<Poly> {
    let dp = p.derived(c.p_order, nu)?;
    let mut acc = Poly::zero();
    for i in 0..=c.p_width.min(n) {
        acc = acc + dp.poly(n - i)?.scale(&c.a(i, n));
    }
    Ok(acc)
}

/// Per-n polynomial residual (left minus right) of the coherence relation;
/// all zero iff the relation holds on the stored range.
pub fn coherence_residual(
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    nu: &NuParam,
) -> Result<Vec<Poly>> {
    let dq = q.derived(c.q_order, nu)?;
    let mut out = Vec::with_capacity(c.n_max + 1);
    for n in 0..=c.n_max {
        let lhs = coherence_lhs(p, c, nu, n)?;
        let mut rhs = Poly::zero();
        for i in 0..=c.q_width.min(n) {
            rhs = rhs + dq.poly(n - i)?.scale(&c.b(i, n));
        }
        out.push(lhs - rhs);
    }
    Ok(out)
}

/// The square gate matrix of order `M+N` built from the coherence
/// coefficients (`a_{j−i,j}` on the first N rows, `b_{j−i+N,j}` on the last M
/// rows), together with its exact determinant. A nonzero determinant is the
/// hypothesis under which the distributional relation exists at the stated
/// degrees.
pub fn dual_basis_matrix(c: &CoherenceData) -> Result<(linalg::Matrix, Rational)> {
    let size = c.p_width + c.q_width;
    if size > 0 && c.n_max + 1 < size {
        return Err(Error::IncompleteData(format!(
            "gate matrix of order {size} needs coefficients up to n = {}, stored n_max = {}",
            size - 1,
            c.n_max
        )));
    }
    let mut matrix = vec![vec![Rational::zero(); size]; size];
    for i in 0..size {
        if i < c.q_width {
            for j in i..=(c.p_width + i).min(size - 1) {
                matrix[i][j] = c.a(j - i, j);
            }
        } else {
            for j in (i - c.q_width)..=i {
                matrix[i][j] = c.b(j + c.q_width - i, j);
            }
        }
    }
    let det = linalg::determinant(&matrix);
    Ok((matrix, det))
}

/// A distributional relation between two functionals, verified on moments
/// `0..=verified_degree`.
///
/// * `order ≥ 1`: `D_{ν*}^order [phi·𝒱] = psi·𝒰` (needs the stored ν),
/// * `order = 0`: the rational modification `phi·𝒰 = psi·𝒱`.
#[derive(Clone, Debug)]
pub struct DistributionalRelation {
    pub order: usize,
    pub phi: Poly,
    pub psi: Poly,
    pub verified_degree: usize,
    pub nu: Option<NuParam>,
}

impl DistributionalRelation {
    /// Moment residuals of the relation up to `deg_check`.
    pub fn residual(
        &self,
        u: &MomentFunctional,
        v: &MomentFunctional,
        deg_check: usize,
    ) -> Result<Vec<Rational>> {
        let (lhs, rhs): (MomentFunctional, MomentFunctional) = if self.order == 0 {
            (u.poly_mul(&self.phi), v.poly_mul(&self.psi))
        } else {
            let nu = self.nu.as_ref().ok_or_else(|| {
                Error::Inconsistency(
                    "relation of positive order lacks its lattice parameter".into(),
                )
            })?;
            (
                v.poly_mul(&self.phi).dnu_iter(&nu.dual(), self.order),
                u.poly_mul(&self.psi),
            )
        };
        (0..=deg_check)
            .map(|n| Ok(lhs.moment(n)? - rhs.moment(n)?))
            .collect()
    }

    pub fn verify(
        &self,
        u: &MomentFunctional,
        v: &MomentFunctional,
        deg_check: usize,
    ) -> Result<bool> {
        Ok(self.residual(u, v, deg_check)?.iter().all(|r| r.is_zero()))
    }
}

/// Scales a null-space vector so the leading block (the φ coefficients)
/// starts with 1 at its first nonzero entry; `None` if that block vanishes.
fn normalize_first_block(vec: &[Rational], block_len: usize) -> Option<Vec<Rational>> {
    let pivot = vec[..block_len].iter().find(|c| !c.is_zero())?;
    let inv = pivot.clone().recip();
    Some(vec.iter().map(|c| c * &inv).collect())
}

/// Finds nonzero (ϕ, ρ) with `ϕ𝒰 = ρ𝒱` on the full check window
/// `0..=deg_phi+deg_rho+guard+5`, searching degree caps in ascending total
/// degree so a minimal-degree solution wins. Normalized so the first nonzero
/// coefficient of ϕ is 1.
pub fn solve_rational_modification(
    u: &MomentFunctional,
    v: &MomentFunctional,
    deg_phi: usize,
    deg_rho: usize,
    guard: usize,
) -> Result<Option<DistributionalRelation>> {
    let deg_check = deg_phi + deg_rho + guard + 5;
    let mut grid: Vec<(usize, usize)> = (0..=deg_phi)
        .flat_map(|dp| (0..=deg_rho).map(move |dr| (dp, dr)))
        .collect();
    grid.sort_by_key(|&(dp, dr)| (dp + dr, dp));
    for (dp, dr) in grid {
        let mut rows = Vec::with_capacity(deg_check + 1);
        for n in 0..=deg_check {
            let mut row = Vec::with_capacity(dp + dr + 2);
            for kk in 0..=dp {
                row.push(u.moment(n + kk)?);
            }
            for kk in 0..=dr {
                row.push(-v.moment(n + kk)?);
            }
            rows.push(row);
        }
        for basis_vec in linalg::null_space(&rows) {
            let Some(scaled) = normalize_first_block(&basis_vec, dp + 1) else {
                continue;
            };
            let phi = Poly::from_coeffs(scaled[..=dp].to_vec());
            let psi = Poly::from_coeffs(scaled[dp + 1..].to_vec());
            let rel = DistributionalRelation {
                order: 0,
                phi,
                psi,
                verified_degree: deg_check,
                nu: None,
            };
            if rel.verify(u, v, deg_check)? {
                return Ok(Some(rel));
            }
        }
    }
    Ok(None)
}

/// Finds nonzero (φ, ψ) with `D_{ν*}^order [φ𝒱] = ψ𝒰` on moments
/// `0..=deg_phi+deg_psi+guard+5`. Normalization as in
/// [`solve_rational_modification`]; when the null space has dimension above
/// one the canonical reduced-echelon basis vector with the smallest free
/// column is taken.
pub fn solve_distributional_relation(
    u: &MomentFunctional,
    v: &MomentFunctional,
    order: usize,
    deg_phi: usize,
    deg_psi: usize,
    nu: &NuParam,
    guard: usize,
) -> Result<Option<DistributionalRelation>> {
    if order == 0 {
        return Err(Error::Domain(
            "order must be positive; use solve_rational_modification for order zero".into(),
        ));
    }
    let deg_check = deg_phi + deg_psi + guard + 5;
    let sign = if order % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    };
    let mut rows = Vec::with_capacity(deg_check + 1);
    for n in 0..=deg_check {
        // ⟨D_{ν*}^r [φ𝒱], x^n⟩ = (−1)^r ⟨𝒱, φ·D_ν^r x^n⟩
        let probe = calculus::dnu_iter(&Poly::monomial(n, Rational::one()), nu, order);
        let mut row = Vec::with_capacity(deg_phi + deg_psi + 2);
        for kk in 0..=deg_phi {
            row.push(&sign * v.apply(&probe.mul_xpow(kk))?);
        }
        for kk in 0..=deg_psi {
            row.push(-u.moment(n + kk)?);
        }
        rows.push(row);
    }
    for basis_vec in linalg::null_space(&rows) {
        let Some(scaled) = normalize_first_block(&basis_vec, deg_phi + 1) else {
            continue;
        };
        let phi = Poly::from_coeffs(scaled[..=deg_phi].to_vec());
        let psi = Poly::from_coeffs(scaled[deg_phi + 1..].to_vec());
        let rel = DistributionalRelation {
            order,
            phi,
            psi,
            verified_degree: deg_check,
            nu: Some(nu.clone()),
        };
        if rel.verify(u, v, deg_check)? {
            return Ok(Some(rel));
        }
    }
    Ok(None)
}

/// Convenience wrapper applying the coherence degrees `deg φ = M+k+n`,
/// `deg ψ = N+m+n` for the relation of order `m − k` (the rational
/// modification when the orders match).
pub fn relation_at_coherence_degrees(
    u: &MomentFunctional,
    v: &MomentFunctional,
    c: &CoherenceData,
    nu: &NuParam,
    n: usize,
    guard: usize,
) -> Result<Option<DistributionalRelation>> {
    if c.p_order < c.q_order {
        return Err(Error::Domain(
            "coherence degrees assume p_order >= q_order".into(),
        ));
    }
    let deg_phi = c.p_width + c.q_order + n;
    let deg_psi = c.q_width + c.p_order + n;
    let order = c.p_order - c.q_order;
    if order == 0 {
        solve_rational_modification(u, v, deg_psi, deg_phi, guard)
    } else {
        solve_distributional_relation(u, v, order, deg_phi, deg_psi, nu, guard)
    }
}

#[derive(Clone, Debug)]
pub enum LeadingCoeffReport {
    /// The gate hypothesis fails or the relation degrees do not line up.
    NotApplicable { reason: String },
    Checked {
        found: Rational,
        predicted: Rational,
        pass: bool,
    },
}

impl LeadingCoeffReport {
    pub fn pass(&self) -> bool {
        matches!(self, LeadingCoeffReport::Checked { pass: true, .. })
    }
}

/// Verifies the ratio of the leading coefficients of (ψ, φ) against the
/// closed-form prediction
/// `(−1)^m η_{N+n,m,ν} b_{N,M+N+n} / ⟨𝒰,P²_{N+m+n}⟩` over
/// `(−1)^k η_{M+n,k,ν} a_{M,M+N+n} / ⟨𝒱,Q²_{M+k+n}⟩`; ratios are
/// normalization independent.
pub fn leading_coeff_check(
    p: &Smop,
    q: &Smop,
    c: &CoherenceData,
    rel: &DistributionalRelation,
    nu: &NuParam,
    n: usize,
) -> Result<LeadingCoeffReport> {
    let (m, k) = (c.p_order, c.q_order);
    let (big_m, big_n) = (c.p_width, c.q_width);
    let (_, det) = dual_basis_matrix(c)?;
    if (big_m + big_n) > 0 && det.is_zero() {
        return Ok(LeadingCoeffReport::NotApplicable {
            reason: "gate matrix is singular".into(),
        });
    }
    let want_phi = big_m + k + n;
    let want_psi = big_n + m + n;
    if rel.phi.degree() != Some(want_phi) || rel.psi.degree() != Some(want_psi) {
        return Ok(LeadingCoeffReport::NotApplicable {
            reason: format!(
                "relation degrees {:?}/{:?} do not match coherence degrees {want_phi}/{want_psi}",
                rel.phi.degree(),
                rel.psi.degree()
            ),
        });
    }
    if c.n_max < big_m + big_n + n {
        return Err(Error::IncompleteData(
            "coefficient data too short for the leading-coefficient check".into(),
        ));
    }
    let sign = |t: usize| {
        if t % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        }
    };
    let psi_pred =
        sign(m) * calculus::dnu_monic_factor(big_n + n, m, nu)? * c.b(big_n, big_m + big_n + n)
            / p.norm(big_n + m + n)?;
    let phi_pred =
        sign(k) * calculus::dnu_monic_factor(big_m + n, k, nu)? * c.a(big_m, big_m + big_n + n)
            / q.norm(big_m + k + n)?;
    if phi_pred.is_zero() {
        return Ok(LeadingCoeffReport::NotApplicable {
            reason: "predicted φ leading coefficient vanishes".into(),
        });
    }
    let predicted = psi_pred / phi_pred;
    let found = rel.psi.leading().unwrap() / rel.phi.leading().unwrap();
    let pass = found == predicted;
    Ok(LeadingCoeffReport::Checked {
        found,
        predicted,
        pass,
    })
}

/// Outcome of the converse window check at one degree.
#[derive(Clone, Debug)]
pub struct ConverseWindowReport {
    pub n: usize,
    /// Window for the expansion over the once-derived P sequence.
    pub lhs_window_ok: bool,
    /// Window for the expansion over the Q sequence.
    pub rhs_window_ok: bool,
    /// Extreme coefficients at the top index are nonzero.
    pub extreme_ok: bool,
    pub sigma_deg: usize,
    pub tau_deg: usize,
    pub phi_deg: usize,
    pub rho_deg: usize,
    pub s: usize,
}

impl ConverseWindowReport {
    pub fn pass(&self) -> bool {
        self.lhs_window_ok && self.rhs_window_ok && self.extreme_ok
    }
}

/// Converse construction check: given a Pearson pair `D_ν(σ𝒱) = τ𝒱` for the
/// second functional and a rational relation `ϕ𝒰 = ρ𝒱`, the expansion of
///
/// ```text
/// G = D_{ν*}[ ϕ(x) · σ(shifted by +1 in ν) · Q_{n+1}(x) ]
/// ```
///
/// must be supported on `[n−r−ℓ, n+ȷ+ℓ]` over the once-ν*-derived P sequence
/// and on `[n−ȷ−s, n+ȷ+ℓ]` over the Q sequence, with nonzero extremes at the
/// top (ℓ, t, ȷ, r are the degrees of σ, τ, ϕ, ρ and `s = max(ℓ−2, t−1)`).
pub fn converse_window_check(
    p: &Smop,
    q: &Smop,
    pearson: &PearsonPair,
    rel: &DistributionalRelation,
    nu: &NuParam,
    n: usize,
) -> Result<ConverseWindowReport> {
    if rel.order != 0 {
        return Err(Error::Domain(
            "converse check needs an order-zero rational relation".into(),
        ));
    }
    let ell = pearson.sigma.degree().unwrap_or(0);
    let t = pearson
        .tau
        .degree()
        .ok_or_else(|| Error::Domain("pearson pair requires nonzero tau".into()))?;
    let jot = rel.phi.degree().unwrap_or(0);
    let r = rel.psi.degree().unwrap_or(0);
    let s = (ell as i64 - 2).max(t as i64 - 1).max(0) as usize;

    let top = n + jot + ell;
    if p.n_max() < top + 1 || q.n_max() < top.max(n + 1) {
        return Err(Error::IncompleteData(
            "stored sequences too short for the converse window check".into(),
        ));
    }

    let dual = nu.dual();
    let f = &(&rel.phi * &calculus::arg_shift(&pearson.sigma, nu, 1)) * q.poly(n + 1)?;
    let g = calculus::dnu(&f, &dual);

    let derived = p.derived(1, &dual)?;
    let lhs_coeffs = g.expand_in_monic_basis(&derived.polys()[..=top])?;
    let rhs_coeffs = g.expand_in_monic_basis(&q.polys()[..=top])?;

    let lhs_lo = n.saturating_sub(r + ell);
    let rhs_lo = n.saturating_sub(jot + s);
    let lhs_window_ok = lhs_coeffs
        .iter()
        .enumerate()
        .all(|(i, cf)| (lhs_lo..=top).contains(&i) || cf.is_zero());
    let rhs_window_ok = rhs_coeffs
        .iter()
        .enumerate()
        .all(|(i, cf)| (rhs_lo..=top).contains(&i) || cf.is_zero());
    let extreme_ok = !lhs_coeffs[top].is_zero() && !rhs_coeffs[top].is_zero();

    Ok(ConverseWindowReport {
        n,
        lhs_window_ok,
        rhs_window_ok,
        extreme_ok,
        sigma_deg: ell,
        tau_deg: t,
        phi_deg: jot,
        rho_deg: r,
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::rational::{rat, rat_i64};
    use crate::semiclassical::pearson_solve;
    use crate::smop::smop_from_moments;

    fn om1() -> NuParam {
        NuParam::omega(rat_i64(1)).unwrap()
    }

    fn charlier_smop(mu: i64, n_max: usize) -> Smop {
        let u = families::charlier(rat_i64(mu)).unwrap();
        smop_from_moments(&u, n_max).unwrap()
    }

    #[test]
    fn pure_lowering_fits_with_empty_maps() {
        let p = charlier_smop(1, 11);
        let c = coherence_fit(&p, &p, 0, 0, 1, 0, &om1(), 10)
            .unwrap()
            .expect("lowering coherence");
        assert_eq!(c.a_entries().count(), 0);
        assert_eq!(c.b_entries().count(), 0);
        let res = coherence_residual(&p, &p, &c, &om1()).unwrap();
        assert!(res.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn identity_relation_fits() {
        let p = charlier_smop(1, 6);
        let c = coherence_fit(&p, &p, 0, 0, 0, 0, &om1(), 6).unwrap();
        assert!(c.is_some());
    }

    #[test]
    fn distinct_parameters_do_not_fit_at_zero_width() {
        let p = charlier_smop(1, 6);
        let q = charlier_smop(2, 6);
        let c = coherence_fit(&p, &q, 0, 0, 1, 0, &om1(), 5).unwrap();
        assert!(c.is_none());
    }

    #[test]
    fn synthetic_pair_residual_is_zero() {
        let p = charlier_smop(1, 11);
        let c = CoherenceData::constant_pair(1, 1, 1, 0, 10, &Rational::one());
        let res = coherence_residual(&p, &p, &c, &om1()).unwrap();
        assert!(res.iter().all(|r| r.is_zero()));

        // breaking one coefficient leaves exactly -C_{n-1} as residual
        let mut broken = c.clone();
        for n in 1..=10 {
            broken.set_b(1, n, rat_i64(2));
        }
        let res = coherence_residual(&p, &p, &broken, &om1()).unwrap();
        for (n, r) in res.iter().enumerate().skip(1) {
            let expect = -p.poly(n - 1).unwrap().clone();
            assert_eq!(r, &expect, "n={n}");
        }
    }

    #[test]
    fn synthetic_pairs_hold_across_widths_and_parameters() {
        let om = om1();
        for mu in [rat_i64(1), rat(1, 2)] {
            let u = families::charlier(mu).unwrap();
            let p = smop_from_moments(&u, 11).unwrap();
            for width in [1usize, 2] {
                let c = CoherenceData::constant_pair(width, width, 1, 0, 10, &Rational::one());
                let res = coherence_residual(&p, &p, &c, &om).unwrap();
                assert!(res.iter().all(|r| r.is_zero()));
            }
        }
    }

    #[test]
    fn steered_fit_recovers_nonzero_extremes() {
        let p = charlier_smop(1, 7);
        let c = coherence_fit(&p, &p, 1, 1, 1, 0, &om1(), 6)
            .unwrap()
            .expect("fit should steer extremes away from zero");
        assert!(c.extremes_ok());
        let res = coherence_residual(&p, &p, &c, &om1()).unwrap();
        assert!(res.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn wrapper_applies_coherence_degrees() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let c = CoherenceData::new(0, 0, 1, 0, 6);
        let rel = relation_at_coherence_degrees(&u, &u, &c, &om1(), 0, 10)
            .unwrap()
            .unwrap();
        assert_eq!(rel.order, 1);
        assert_eq!(rel.phi, Poly::one());
        assert_eq!(rel.psi, Poly::from_i64(&[1, -1]));

        // matching orders yield the rational modification instead
        let c0 = CoherenceData::new(0, 0, 0, 0, 6);
        let rel = relation_at_coherence_degrees(&u, &u, &c0, &om1(), 0, 10)
            .unwrap()
            .unwrap();
        assert_eq!(rel.order, 0);
        assert_eq!(rel.phi, Poly::one());
        assert_eq!(rel.psi, Poly::one());
    }

    #[test]
    fn gate_matrix_patterns() {
        // (M, N) = (1, 0): single entry b_{0,0} = 1
        let c = CoherenceData::new(1, 0, 1, 0, 5);
        let (m, det) = dual_basis_matrix(&c).unwrap();
        assert_eq!(m, vec![vec![rat_i64(1)]]);
        assert_eq!(det, rat_i64(1));

        // (M, N) = (1, 1) with a_{1,1} = 2, b_{1,1} = 3
        let mut c = CoherenceData::new(1, 1, 1, 0, 5);
        for n in 1..=5 {
            c.set_a(1, n, rat_i64(2));
            c.set_b(1, n, rat_i64(3));
        }
        let (m, det) = dual_basis_matrix(&c).unwrap();
        assert_eq!(
            m,
            vec![vec![rat_i64(1), rat_i64(2)], vec![rat_i64(1), rat_i64(3)]]
        );
        assert_eq!(det, rat_i64(1));

        // the synthetic equal pair is singular
        let c = CoherenceData::constant_pair(1, 1, 1, 0, 5, &rat_i64(1));
        let (_, det) = dual_basis_matrix(&c).unwrap();
        assert!(det.is_zero());
    }

    #[test]
    fn gate_matrix_requires_enough_data() {
        let c = CoherenceData::new(2, 2, 1, 0, 2);
        assert!(matches!(
            dual_basis_matrix(&c),
            Err(Error::IncompleteData(_))
        ));
    }

    #[test]
    fn rational_modification_trivial_and_shifted() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let rel = solve_rational_modification(&u, &u, 0, 0, 10)
            .unwrap()
            .unwrap();
        assert_eq!(rel.phi, Poly::one());
        assert_eq!(rel.psi, Poly::one());

        let v = u.poly_mul(&Poly::x());
        let rel = solve_rational_modification(&u, &v, 1, 0, 10)
            .unwrap()
            .unwrap();
        assert_eq!(rel.phi, Poly::x());
        assert_eq!(rel.psi, Poly::one());
        assert!(rel.verify(&u, &v, 20).unwrap());
    }

    #[test]
    fn rational_modification_distinct_families_none() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let v = families::charlier(rat_i64(2)).unwrap();
        assert!(solve_rational_modification(&u, &v, 0, 0, 10)
            .unwrap()
            .is_none());
    }

    #[test]
    fn distributional_relation_first_order() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let rel = solve_distributional_relation(&u, &u, 1, 0, 1, &om1(), 10)
            .unwrap()
            .unwrap();
        assert_eq!(rel.phi, Poly::one());
        assert_eq!(rel.psi, Poly::from_i64(&[1, -1]));
        assert!(rel.verify(&u, &u, 20).unwrap());
    }

    #[test]
    fn distributional_relation_degenerate_caps() {
        let u = families::charlier(rat_i64(1)).unwrap();
        assert!(solve_distributional_relation(&u, &u, 1, 0, 0, &om1(), 10)
            .unwrap()
            .is_none());
    }

    #[test]
    fn distributional_relation_second_order() {
        let u = families::charlier(rat_i64(1)).unwrap();
        let rel = solve_distributional_relation(&u, &u, 2, 1, 2, &om1(), 10)
            .unwrap()
            .unwrap();
        assert!(!rel.phi.is_zero());
        assert!(rel.verify(&u, &u, 20).unwrap());
    }

    #[test]
    fn leading_coefficients_match_prediction() {
        let p = charlier_smop(1, 6);
        let c = CoherenceData::new(0, 0, 1, 0, 6);
        let u = families::charlier(rat_i64(1)).unwrap();
        let rel = solve_distributional_relation(&u, &u, 1, 0, 1, &om1(), 10)
            .unwrap()
            .unwrap();
        let report = leading_coeff_check(&p, &p, &c, &rel, &om1(), 0).unwrap();
        match &report {
            LeadingCoeffReport::Checked {
                found, predicted, ..
            } => {
                assert_eq!(found, &rat_i64(-1));
                assert_eq!(predicted, &rat_i64(-1));
            }
            other => panic!("expected checked report, got {other:?}"),
        }
        assert!(report.pass());
    }

    #[test]
    fn leading_coeff_guards() {
        let p = charlier_smop(1, 6);
        let u = families::charlier(rat_i64(1)).unwrap();
        let rel = solve_distributional_relation(&u, &u, 1, 0, 1, &om1(), 10)
            .unwrap()
            .unwrap();
        // singular gate
        let c = CoherenceData::constant_pair(1, 1, 1, 0, 6, &rat_i64(1));
        let report = leading_coeff_check(&p, &p, &c, &rel, &om1(), 0).unwrap();
        assert!(matches!(report, LeadingCoeffReport::NotApplicable { .. }));
        // mismatched degrees
        let c = CoherenceData::new(0, 0, 1, 0, 6);
        let report = leading_coeff_check(&p, &p, &c, &rel, &om1(), 3).unwrap();
        assert!(matches!(report, LeadingCoeffReport::NotApplicable { .. }));
    }

    #[test]
    fn converse_windows_pass_for_charlier() {
        let p = charlier_smop(1, 12);
        let u = families::charlier(rat_i64(1)).unwrap();
        let pair = pearson_solve(&u, &om1(), 1, 1, 10).unwrap().unwrap();
        let rel = DistributionalRelation {
            order: 0,
            phi: Poly::one(),
            psi: Poly::one(),
            verified_degree: 20,
            nu: None,
        };
        for n in [0usize, 2, 4, 8] {
            let report = converse_window_check(&p, &p, &pair, &rel, &om1(), n).unwrap();
            assert_eq!(report.s, 0);
            assert!(report.pass(), "n={n}: {report:?}");
        }
    }

    #[test]
    fn converse_windows_fail_for_wrong_sigma() {
        let p = charlier_smop(1, 12);
        let pair = PearsonPair {
            sigma: Poly::from_i64(&[0, 0, 1]),
            tau: Poly::from_i64(&[1, -1]),
        };
        let rel = DistributionalRelation {
            order: 0,
            phi: Poly::one(),
            psi: Poly::one(),
            verified_degree: 20,
            nu: None,
        };
        let mut any_fail = false;
        for n in 2..=8 {
            let report = converse_window_check(&p, &p, &pair, &rel, &om1(), n).unwrap();
            any_fail |= !report.pass();
        }
        assert!(any_fail);
    }

    #[test]
    fn brute_force_gate_matrix_assembly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let p = charlier_smop(1, 9);
        let q = charlier_smop(2, 9);
        let om = om1();
        for &(big_m, big_n) in &[
            (1usize, 0usize),
            (0, 1),
            (1, 1),
            (2, 1),
            (1, 2),
            (3, 0),
            (2, 0),
            (0, 3),
        ] {
            let mut c = CoherenceData::new(big_m, big_n, 1, 0, 8);
            for n in 0..=8 {
                for i in 1..=big_m.min(n) {
                    c.set_a(i, n, rat(rng.gen_range(1..=9), rng.gen_range(1..=4)));
                }
                for i in 1..=big_n.min(n) {
                    c.set_b(i, n, rat(rng.gen_range(1..=9), rng.gen_range(1..=4)));
                }
            }
            let (gate, _) = dual_basis_matrix(&c).unwrap();

            // Brute force: expansion coefficients of the two sides of the
            // relation over the two derived bases.
            let dp = p.derived(1, &om).unwrap();
            let dq = q.derived(0, &om).unwrap();
            let size = big_m + big_n;
            let mut brute = vec![vec![Rational::zero(); size]; size];
            for j in 0..size {
                let mut lhs = Poly::zero();
                for i in 0..=big_m.min(j) {
                    lhs = lhs + dp.poly(j - i).unwrap().scale(&c.a(i, j));
                }
                let lhs_coeffs = lhs.expand_in_monic_basis(&dp.polys()[..=j]).unwrap();
                let mut rhs = Poly::zero();
                for i in 0..=big_n.min(j) {
                    rhs = rhs + dq.poly(j - i).unwrap().scale(&c.b(i, j));
                }
                let rhs_coeffs = rhs.expand_in_monic_basis(&dq.polys()[..=j]).unwrap();
                for i in 0..big_n {
                    brute[i][j] = lhs_coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                }
                for i in 0..big_m {
                    brute[big_n + i][j] = rhs_coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                }
            }
            assert_eq!(gate, brute, "(M,N)=({big_m},{big_n})");
        }
    }
}
