//! The cross-check battery: every identity the crate is built around, run as
//! a pass/fail table. All checks are exact; a tolerance appears only in the
//! λ→∞ convergence probe, which is corroborative rather than defining.
//!
//! The integration suite asserts each outcome; the command-line front end
//! prints the table.

use crate::calculus::NuParam;
use crate::coherence::{
    coherence_residual, converse_window_check, dual_basis_matrix, leading_coeff_check,
    solve_distributional_relation, solve_rational_modification, CoherenceData,
    DistributionalRelation, LeadingCoeffReport,
};
use crate::error::Result;
use crate::families;
use crate::functional::{leibniz_expand, MomentFunctional};
use crate::poly::Poly;
use crate::rational::{rat, rat_i64, rational_str, Rational};
use crate::semiclassical::{class_estimate, dual_pearson_sigma, pearson_residual, pearson_solve};
use crate::smop::{smop_from_moments, Smop};
use crate::sobolev::{
    coherence_from_connection, connection_coeffs_inner, limit_basis, recursion_zeta,
    sobolev_basis_gram, sobolev_basis_recursive, sobolev_inner, verify_limit_link, SobolevContext,
};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckResult = std::result::Result<(), String>;

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn outcome(name: &'static str, body: impl FnOnce() -> CheckResult) -> CheckOutcome {
    match body() {
        Ok(()) => CheckOutcome {
            name,
            passed: true,
            detail: "ok".into(),
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn om1() -> NuParam {
    NuParam::omega(rat_i64(1)).unwrap()
}

fn charlier_smop(mu: Rational, n_max: usize) -> std::result::Result<Smop, String> {
    lift(families::charlier(mu).and_then(|u| smop_from_moments(&u, n_max)))
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    let deg = rng.gen_range(0..=max_deg);
    let mut coeffs: Vec<Rational> = (0..=deg)
        .map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
        .collect();
    if coeffs[deg].is_zero() {
        coeffs[deg] = Rational::one();
    }
    Poly::from_coeffs(coeffs)
}

/// The once-derived sequence of each Charlier functional is the sequence
/// itself, degree by degree, for several parameters.
pub fn charlier_lowering() -> CheckOutcome {
    outcome("charlier-lowering", || {
        for mu in [rat_i64(1), rat(1, 2), rat_i64(3)] {
            let p = charlier_smop(mu.clone(), 16)?;
            let d = lift(p.derived(1, &om1()))?;
            for n in 0..=15 {
                if lift(d.poly(n))? != lift(p.poly(n))? {
                    return Err(format!("lowering fails at mu={}, n={n}", rational_str(&mu)));
                }
            }
        }
        Ok(())
    })
}

/// The product-rule expansion of `D_ν^m [p𝒰]` equals the compositional
/// route on moments 0..=20 for random inputs over both lattices.
pub fn leibniz_identities() -> CheckOutcome {
    outcome("leibniz-identities", || {
        let functionals = [
            lift(families::charlier(rat_i64(1)))?,
            lift(families::kravchuk(10, rat(1, 2)))?,
        ];
        let params = [
            lift(NuParam::omega(rat_i64(1)))?,
            lift(NuParam::omega(rat_i64(-2)))?,
            lift(NuParam::q(rat_i64(2)))?,
            lift(NuParam::q(rat(1, 3)))?,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..25 {
            let p = random_poly(&mut rng, 3);
            let m = rng.gen_range(0..=3);
            for nu in &params {
                for u in &functionals {
                    let expansion = lift(leibniz_expand(&p, u, m, nu))?;
                    let compositional = u.poly_mul(&p).dnu_iter(nu, m);
                    if !lift(expansion.moments_equal(&compositional, 20))? {
                        return Err(format!(
                            "case {case}: m={m}, nu={nu}, p={p:?} disagrees with composition"
                        ));
                    }
                }
            }
        }
        Ok(())
    })
}

/// Every Pearson pair the solver finds verifies under the dual parameter
/// after the σ̃ transform, at the same checked degree.
pub fn pearson_duality() -> CheckOutcome {
    outcome("pearson-duality", || {
        let guard = 10usize;
        let cases: Vec<(MomentFunctional, &str)> = vec![
            (lift(families::charlier(rat_i64(1)))?, "charlier(1)"),
            (lift(families::kravchuk(20, rat(1, 2)))?, "kravchuk(20,1/2)"),
            (
                lift(families::charlier(rat_i64(1)))?.poly_mul(&Poly::x()),
                "x*charlier(1)",
            ),
        ];
        let mut found = 0usize;
        for (u, label) in &cases {
            for (ds, dt) in [(1usize, 1usize), (2, 1), (2, 2), (3, 2)] {
                let Some(pair) = lift(pearson_solve(u, &om1(), ds, dt, guard))? else {
                    continue;
                };
                found += 1;
                let deg_check = ds + dt + guard + 5;
                let tilde = dual_pearson_sigma(&pair.sigma, &pair.tau, &om1());
                let res = lift(pearson_residual(
                    u,
                    &om1().dual(),
                    &tilde,
                    &pair.tau,
                    deg_check,
                ))?;
                if res.iter().any(|r| !r.is_zero()) {
                    return Err(format!(
                        "dual transform fails for {label} at degrees ({ds},{dt})"
                    ));
                }
            }
        }
        if found == 0 {
            return Err("no pearson pairs found to transform".into());
        }
        Ok(())
    })
}

fn q_lattice(weight_base: i64) -> Result<MomentFunctional> {
    let half = rat(1, 2);
    let nodes: Vec<Rational> = (0..12)
        .map(|k| num_traits::pow::pow(half.clone(), k))
        .collect();
    let weights: Vec<Rational> = (0..12)
        .map(|k| num_traits::pow::pow(rat(1, weight_base), k + 1))
        .collect();
    families::discrete(nodes, weights)
}

/// Gram-route orthogonality `⟨S_n, x^i⟩ = 0` holds exactly for a spread of
/// contexts over both lattices, including a non-coherent pair.
pub fn sobolev_orthogonality() -> CheckOutcome {
    outcome("sobolev-orthogonality", || {
        let contexts: Vec<(MomentFunctional, MomentFunctional, NuParam, &str)> = vec![
            (
                lift(families::charlier(rat_i64(1)))?,
                lift(families::charlier(rat_i64(1)))?,
                om1(),
                "charlier/charlier",
            ),
            (
                lift(families::charlier(rat_i64(1)))?,
                lift(families::kravchuk(20, rat(1, 2)))?,
                om1(),
                "charlier/kravchuk",
            ),
            (
                lift(q_lattice(2))?,
                lift(q_lattice(3))?,
                lift(NuParam::q(rat(1, 2)))?,
                "q-lattice/q-lattice",
            ),
        ];
        for (u, v, nu, label) in contexts {
            for m in [1usize, 2] {
                for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
                    let ctx = lift(SobolevContext::new(
                        u.clone(),
                        v.clone(),
                        m,
                        nu.clone(),
                        lam.clone(),
                    ))?;
                    let s = lift(sobolev_basis_gram(&ctx, 10))?;
                    for n in 0..=10usize {
                        for i in 0..n {
                            let xi = Poly::monomial(i, Rational::one());
                            let ip = lift(sobolev_inner(lift(s.poly(n))?, &xi, &ctx))?;
                            if !ip.is_zero() {
                                return Err(format!(
                                    "{label}: <S_{n}, x^{i}> != 0 at m={m}, lambda={}",
                                    rational_str(&lam)
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// In the degenerate coherent case the Sobolev sequence, the plain sequence
/// and the λ→∞ limit all coincide, and the derivative link to the 𝒱-sequence
/// holds.
pub fn degenerate_coherence() -> CheckOutcome {
    outcome("degenerate-coherence", || {
        let p = charlier_smop(rat_i64(1), 12)?;
        for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
            let u = lift(families::charlier(rat_i64(1)))?;
            let ctx = lift(SobolevContext::new(u.clone(), u, 1, om1(), lam.clone()))?;
            let s = lift(sobolev_basis_gram(&ctx, 10))?;
            let t = lift(limit_basis(&ctx, 11))?;
            for n in 0..=10usize {
                let pn = lift(p.poly(n))?;
                if lift(s.poly(n))? != pn || lift(t.poly(n))? != pn {
                    return Err(format!(
                        "S, P, T disagree at n={n}, lambda={}",
                        rational_str(&lam)
                    ));
                }
            }
            let report = lift(verify_limit_link(&ctx, &t, &p, &p, 10))?;
            if !report.pass() {
                return Err(format!("limit link fails at lambda={}", rational_str(&lam)));
            }
        }
        Ok(())
    })
}

fn synthetic_pair(width: usize, m: usize, n_max: usize) -> CoherenceData {
    CoherenceData::constant_pair(width, width, m, 0, n_max, &Rational::one())
}

/// Inner-product and recursion formulas for the connection coefficients agree
/// and reproduce the closed forms on the synthetic balanced pair.
pub fn connection_cross_validation() -> CheckOutcome {
    outcome("connection-cross-validation", || {
        let p = charlier_smop(rat_i64(1), 14)?;
        let c = synthetic_pair(1, 1, 12);
        for lam in [rat(1, 2), rat_i64(1), rat_i64(2)] {
            let u = lift(families::charlier(rat_i64(1)))?;
            let ctx = lift(SobolevContext::new(u.clone(), u, 1, om1(), lam.clone()))?;
            let gram = lift(sobolev_basis_gram(&ctx, 13))?;
            let filled = lift(connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12))?;
            let rec = lift(sobolev_basis_recursive(&ctx, &p, &p, &c, 13))?;
            for n in 1..=10usize {
                let expect = Rational::new(((n + 1) as i64).into(), (n as i64).into());
                if filled.connection(1, n) != expect || rec.connection(1, n) != expect {
                    return Err(format!(
                        "c(1,{n}) != (n+1)/n at lambda={}",
                        rational_str(&lam)
                    ));
                }
            }
            for n in 0..=13usize {
                if lift(filled.s_norm(n))? != lift(rec.s_norm(n))? {
                    return Err(format!("norms disagree at {n}"));
                }
            }
            let hand = [
                (filled.connection(1, 2), rat(3, 2)),
                (lift(filled.s_norm(1))?.clone(), rat_i64(1) + &lam),
                (
                    lift(filled.s_norm(2))?.clone(),
                    rat_i64(2) + rat_i64(4) * &lam,
                ),
                (
                    lift(recursion_zeta(&ctx, &p, &p, &c, 0, 1))?,
                    rat_i64(6) + rat_i64(8) * &lam,
                ),
                (
                    lift(recursion_zeta(&ctx, &p, &p, &c, 1, 1))?,
                    rat_i64(3) + rat_i64(6) * &lam,
                ),
            ];
            for (i, (got, want)) in hand.iter().enumerate() {
                if got != want {
                    return Err(format!(
                        "hand-checked value {i} mismatch at lambda={}: got {}, want {}",
                        rational_str(&lam),
                        rational_str(got),
                        rational_str(want)
                    ));
                }
            }
        }
        Ok(())
    })
}

/// Gram route and recursion route produce identical polynomials and norms on
/// the synthetic balanced pairs across widths and orders.
pub fn route_equivalence() -> CheckOutcome {
    outcome("route-equivalence", || {
        let p = charlier_smop(rat_i64(1), 13)?;
        for width in [1usize, 2] {
            for m in [1usize, 2] {
                let c = synthetic_pair(width, m, 10);
                for lam in [rat(1, 2), rat_i64(2)] {
                    let u = lift(families::charlier(rat_i64(1)))?;
                    let ctx = lift(SobolevContext::new(u.clone(), u, m, om1(), lam.clone()))?;
                    let gram = lift(sobolev_basis_gram(&ctx, 10))?;
                    let rec = lift(sobolev_basis_recursive(&ctx, &p, &p, &c, 10))?;
                    for n in 0..=10usize {
                        if lift(gram.poly(n))? != lift(rec.poly(n))? {
                            return Err(format!(
                                "polys differ at n={n}, width={width}, m={m}, lambda={}",
                                rational_str(&lam)
                            ));
                        }
                        if lift(gram.s_norm(n))? != lift(rec.s_norm(n))? {
                            return Err(format!(
                                "norms differ at n={n}, width={width}, m={m}, lambda={}",
                                rational_str(&lam)
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// The converse direction recovers the Q-side coefficients of the synthetic
/// pair and the recovered relation closes.
pub fn converse_round_trip() -> CheckOutcome {
    outcome("converse-round-trip", || {
        let p = charlier_smop(rat_i64(1), 14)?;
        let u = lift(families::charlier(rat_i64(1)))?;
        let ctx = lift(SobolevContext::new(u.clone(), u, 1, om1(), rat_i64(1)))?;
        let c = synthetic_pair(1, 1, 12);
        let gram = lift(sobolev_basis_gram(&ctx, 13))?;
        let filled = lift(connection_coeffs_inner(&ctx, &p, &p, &c, &gram, 12))?;
        let (recovered, vanishing) =
            lift(coherence_from_connection(&ctx, &p, &p, &c, &filled, 10))?;
        if !vanishing.is_empty() {
            return Err(format!("unexpected vanishing extremes at {vanishing:?}"));
        }
        for n in 1..=10usize {
            if recovered.b(1, n) != rat_i64(1) {
                return Err(format!("recovered b(1,{n}) != 1"));
            }
        }
        let res = lift(coherence_residual(&p, &p, &recovered, &om1()))?;
        if res.iter().any(|r| !r.is_zero()) {
            return Err("recovered coherence residual nonzero".into());
        }
        Ok(())
    })
}

/// Gate-matrix assembly against brute-force expansion, the rational
/// modification solver, the order-one distributional solver with a deep
/// re-verification, and the leading-coefficient ratio.
pub fn distributional_machinery() -> CheckOutcome {
    outcome("distributional-machinery", || {
        // gate matrix vs brute force on random coefficient sets
        let p = charlier_smop(rat_i64(1), 9)?;
        let q = charlier_smop(rat_i64(2), 9)?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (big_m, big_n) in [(1usize, 0usize), (0, 1), (1, 1), (2, 1), (1, 2), (3, 0)] {
            let mut c = CoherenceData::new(big_m, big_n, 1, 0, 8);
            for n in 0..=8 {
                for i in 1..=big_m.min(n) {
                    c.set_a(i, n, rat(rng.gen_range(1..=9), rng.gen_range(1..=4)));
                }
                for i in 1..=big_n.min(n) {
                    c.set_b(i, n, rat(rng.gen_range(1..=9), rng.gen_range(1..=4)));
                }
            }
            let (gate, _) = lift(dual_basis_matrix(&c))?;
            let dp = lift(p.derived(1, &om1()))?;
            let dq = lift(q.derived(0, &om1()))?;
            let size = big_m + big_n;
            for j in 0..size {
                let mut lhs = Poly::zero();
                for i in 0..=big_m.min(j) {
                    lhs = lhs + lift(dp.poly(j - i))?.scale(&c.a(i, j));
                }
                let lhs_coeffs = lift(lhs.expand_in_monic_basis(&dp.polys()[..=j]))?;
                let mut rhs = Poly::zero();
                for i in 0..=big_n.min(j) {
                    rhs = rhs + lift(dq.poly(j - i))?.scale(&c.b(i, j));
                }
                let rhs_coeffs = lift(rhs.expand_in_monic_basis(&dq.polys()[..=j]))?;
                for i in 0..size {
                    let want = if i < big_n {
                        lhs_coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
                    } else {
                        rhs_coeffs
                            .get(i - big_n)
                            .cloned()
                            .unwrap_or_else(Rational::zero)
                    };
                    if gate[i][j] != want {
                        return Err(format!(
                            "gate entry ({i},{j}) mismatch for (M,N)=({big_m},{big_n})"
                        ));
                    }
                }
            }
        }

        // rational modification: x𝒰 = 𝒱
        let u = lift(families::charlier(rat_i64(1)))?;
        let v = u.poly_mul(&Poly::x());
        let rel = lift(solve_rational_modification(&u, &v, 1, 0, 10))?
            .ok_or("no rational modification found")?;
        if rel.phi != Poly::x() || rel.psi != Poly::one() {
            return Err("rational modification is not (x, 1)".into());
        }

        // order-one relation with deep re-verification
        let rel = lift(solve_distributional_relation(&u, &u, 1, 0, 1, &om1(), 14))?
            .ok_or("no order-one relation found")?;
        if rel.verified_degree < 20 || !lift(rel.verify(&u, &u, 20))? {
            return Err("order-one relation fails at degree 20".into());
        }
        let c00 = CoherenceData::new(0, 0, 1, 0, 6);
        let p1 = charlier_smop(rat_i64(1), 6)?;
        let report = lift(leading_coeff_check(&p1, &p1, &c00, &rel, &om1(), 0))?;
        if !matches!(report, LeadingCoeffReport::Checked { pass: true, .. }) {
            return Err(format!("leading coefficient check failed: {report:?}"));
        }
        Ok(())
    })
}

/// The converse window check passes on the lowering family with its Pearson
/// pair, degree by degree, and the deliberately wrong σ breaks it.
pub fn converse_window() -> CheckOutcome {
    outcome("converse-window", || {
        let p = charlier_smop(rat_i64(1), 12)?;
        let u = lift(families::charlier(rat_i64(1)))?;
        let pair = lift(pearson_solve(&u, &om1(), 1, 1, 10))?.ok_or("no pearson pair")?;
        let rel = DistributionalRelation {
            order: 0,
            phi: Poly::one(),
            psi: Poly::one(),
            verified_degree: 20,
            nu: None,
        };
        for n in 2..=8usize {
            let report = lift(converse_window_check(&p, &p, &pair, &rel, &om1(), n))?;
            if !report.pass() {
                return Err(format!("window fails at n={n}: {report:?}"));
            }
        }
        let wrong = crate::semiclassical::PearsonPair {
            sigma: Poly::from_i64(&[0, 0, 1]),
            tau: Poly::from_i64(&[1, -1]),
        };
        let mut any_fail = false;
        for n in 2..=8usize {
            let report = lift(converse_window_check(&p, &p, &wrong, &rel, &om1(), n))?;
            any_fail |= !report.pass();
        }
        if !any_fail {
            return Err("negative control passed unexpectedly".into());
        }
        Ok(())
    })
}

/// Class estimates for the classical families and the perturbed negative
/// control.
pub fn class_estimates() -> CheckOutcome {
    outcome("class-estimates", || {
        let u = lift(families::charlier(rat_i64(1)))?;
        if lift(class_estimate(&u, &om1(), 3))? != Some(0) {
            return Err("charlier class estimate != 0".into());
        }
        let k = lift(families::kravchuk(20, rat(1, 2)))?;
        if lift(class_estimate(&k, &om1(), 3))? != Some(0) {
            return Err("kravchuk class estimate != 0".into());
        }
        let mut values: Vec<Rational> = (0..=30)
            .map(|n| u.moment(n))
            .collect::<Result<_>>()
            .map_err(|e| e.to_string())?;
        values[4] += Rational::one();
        let perturbed = MomentFunctional::from_moments(values);
        if lift(class_estimate(&perturbed, &om1(), 1))?.is_some() {
            return Err("perturbed moments unexpectedly semiclassical".into());
        }
        Ok(())
    })
}

/// Runs the whole battery in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        charlier_lowering(),
        leibniz_identities(),
        pearson_duality(),
        sobolev_orthogonality(),
        degenerate_coherence(),
        connection_cross_validation(),
        route_equivalence(),
        converse_round_trip(),
        distributional_machinery(),
        converse_window(),
        class_estimates(),
    ]
}
