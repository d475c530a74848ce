//! Subcommand implementations. Each returns the process exit code: 0 for
//! success, 1 for a computation that ran but found nothing (or failed), 2 for
//! an exact cross-check mismatch.

use crate::output::{emit, poly_rows};
use crate::{
    BenchArgs, CoherenceFitArgs, CoherenceVerifyArgs, Command, Method, PearsonArgs, SmopArgs,
    SobolevArgs,
};
use anyhow::{anyhow, bail, Context, Result};
use nucalc::coherence::{coherence_fit, coherence_residual, CoherenceData};
use nucalc::families::FunctionalSpec;
use nucalc::functional::MomentFunctional;
use nucalc::rational::{bit_length, parse_rational, rational_str, Rational};
use nucalc::smop::{smop_from_moments, Smop};
use nucalc::sobolev::{sobolev_basis_gram, sobolev_basis_recursive, SobolevBasis, SobolevContext};
use serde::Deserialize;
use serde_json::json;
use std::time::Instant;

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Smop(args) => run_smop(args),
        Command::Pearson(args) => run_pearson(args),
        Command::CoherenceFit(args) => run_coherence_fit(args),
        Command::CoherenceVerify(args) => run_coherence_verify(args),
        Command::Sobolev(args) => run_sobolev(args),
        Command::VerifySuite => run_verify_suite(),
        Command::Bench(args) => run_bench(args),
    }
}

/// A functional argument is either inline JSON or a path to a JSON file.
fn load_functional(arg: &str) -> Result<MomentFunctional> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    let spec = FunctionalSpec::from_json(&text)?;
    Ok(spec.build()?)
}

fn polys_json(polys: &[nucalc::Poly]) -> serde_json::Value {
    json!(polys.iter().map(|p| p.to_strings()).collect::<Vec<_>>())
}

fn rationals_json(values: &[Rational]) -> serde_json::Value {
    json!(values.iter().map(rational_str).collect::<Vec<_>>())
}

fn run_smop(args: SmopArgs) -> Result<u8> {
    let u = load_functional(&args.functional)?;
    let p = smop_from_moments(&u, args.n)?;
    let moments: Vec<Rational> = (0..=2 * args.n + 1)
        .map(|k| u.moment(k))
        .collect::<nucalc::Result<_>>()?;
    let mut doc = json!({
        "n_max": args.n,
        "moments": rationals_json(&moments),
        "polys": polys_json(p.polys()),
        "alpha": rationals_json(p.alpha()),
        "beta": rationals_json(p.betas()),
        "norms": rationals_json(p.norms()),
    });
    if let Some(order) = args.derived_order {
        let nu = args
            .nu
            .as_ref()
            .ok_or_else(|| anyhow!("--derived-order requires --nu"))?;
        let d = p.derived(order, nu)?;
        doc.as_object_mut().unwrap().insert(
            "derived".into(),
            json!({
                "order": order,
                "nu": nu.to_string(),
                "polys": polys_json(d.polys()),
            }),
        );
    }
    emit(&args.output, doc, Some(poly_rows(p.polys())))?;
    Ok(0)
}

fn run_pearson(args: PearsonArgs) -> Result<u8> {
    let u = load_functional(&args.functional)?;
    let found = nucalc::semiclassical::pearson_solve(
        &u,
        &args.nu,
        args.deg_sigma,
        args.deg_tau,
        args.guard,
    )?;
    let Some(pair) = found else {
        eprintln!("no pearson pair at the given degrees");
        return Ok(1);
    };
    let checked_degree = args.deg_sigma + args.deg_tau + args.guard + 5;
    let doc = json!({
        "sigma": pair.sigma.to_strings(),
        "tau": pair.tau.to_strings(),
        "class_bound": pair.class_bound(),
        "checked_degree": checked_degree,
        "nu": args.nu.to_string(),
    });
    emit(&args.output, doc, None)?;
    Ok(0)
}

fn coherence_json(c: &CoherenceData) -> serde_json::Value {
    let a: Vec<serde_json::Value> = c
        .a_entries()
        .map(|(&(i, n), v)| json!([i, n, rational_str(v)]))
        .collect();
    let b: Vec<serde_json::Value> = c
        .b_entries()
        .map(|(&(i, n), v)| json!([i, n, rational_str(v)]))
        .collect();
    json!({
        "M": c.p_width,
        "N": c.q_width,
        "m": c.p_order,
        "k": c.q_order,
        "n_max": c.n_max,
        "a": a,
        "b": b,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoherenceJson {
    #[serde(rename = "M")]
    width_p: usize,
    #[serde(rename = "N")]
    width_q: usize,
    m: usize,
    k: usize,
    n_max: usize,
    a: Vec<(usize, usize, String)>,
    b: Vec<(usize, usize, String)>,
}

fn parse_coherence(arg: &str) -> Result<CoherenceData> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    let raw: CoherenceJson = serde_json::from_str(&text).context("coherence data")?;
    let mut c = CoherenceData::new(raw.width_p, raw.width_q, raw.m, raw.k, raw.n_max);
    for (i, n, v) in &raw.a {
        if *i == 0 || *i > raw.width_p || i > n || *n > raw.n_max {
            bail!("coherence entry a[{i},{n}] out of range");
        }
        c.set_a(*i, *n, parse_rational(v)?);
    }
    for (i, n, v) in &raw.b {
        if *i == 0 || *i > raw.width_q || i > n || *n > raw.n_max {
            bail!("coherence entry b[{i},{n}] out of range");
        }
        c.set_b(*i, *n, parse_rational(v)?);
    }
    Ok(c)
}

fn run_coherence_fit(args: CoherenceFitArgs) -> Result<u8> {
    let u = load_functional(&args.u)?;
    let v = load_functional(&args.v)?;
    let p = smop_from_moments(&u, args.n + args.order_p)?;
    let q = smop_from_moments(&v, args.n + args.order_q)?;
    let fit = coherence_fit(
        &p,
        &q,
        args.width_p,
        args.width_q,
        args.order_p,
        args.order_q,
        &args.nu,
        args.n,
    )?;
    let Some(c) = fit else {
        eprintln!("no coherence at the given orders");
        return Ok(1);
    };
    emit(&args.output, coherence_json(&c), None)?;
    Ok(0)
}

fn run_coherence_verify(args: CoherenceVerifyArgs) -> Result<u8> {
    let c = parse_coherence(&args.data)?;
    let u = load_functional(&args.u)?;
    let v = load_functional(&args.v)?;
    let p = smop_from_moments(&u, c.n_max + c.p_order)?;
    let q = smop_from_moments(&v, c.n_max + c.q_order)?;
    let residuals = coherence_residual(&p, &q, &c, &args.nu)?;
    let bad: Vec<usize> = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_zero())
        .map(|(n, _)| n)
        .collect();
    let doc = json!({
        "verified": bad.is_empty(),
        "n_max": c.n_max,
        "failing_levels": bad,
        "extremes_ok": c.extremes_ok(),
    });
    emit(&args.output, doc, None)?;
    if residuals.iter().all(|r| r.is_zero()) {
        Ok(0)
    } else {
        eprintln!("coherence relation fails at the listed levels");
        Ok(1)
    }
}

fn basis_json(method: &str, basis: &SobolevBasis) -> serde_json::Value {
    let connection: Vec<serde_json::Value> = basis
        .connection_entries()
        .map(|(&(j, n), v)| json!([j, n, rational_str(v)]))
        .collect();
    json!({
        "method": method,
        "n_max": basis.n_max(),
        "polys": polys_json(basis.polys()),
        "s_norms": rationals_json(basis.s_norms()),
        "connection": connection,
    })
}

/// Builds the sequences and coherence data the recursion route needs.
fn recursion_inputs(
    ctx: &SobolevContext,
    width_p: usize,
    width_q: usize,
    n: usize,
) -> Result<(Smop, Smop, CoherenceData)> {
    let levels = n.saturating_sub(ctx.m);
    let p = smop_from_moments(&ctx.u, n.max(ctx.m))?;
    let q = smop_from_moments(&ctx.v, levels)?;
    let fit = coherence_fit(&p, &q, width_p, width_q, ctx.m, 0, &ctx.nu, levels)?;
    let c = fit.ok_or_else(|| anyhow!("no coherence at the given orders"))?;
    Ok((p, q, c))
}

fn run_sobolev(args: SobolevArgs) -> Result<u8> {
    let u = load_functional(&args.u)?;
    let v = load_functional(&args.v)?;
    let ctx = SobolevContext::new(u, v, args.m, args.nu.clone(), args.lambda.clone())?;
    let (doc, rows, code) = match args.method {
        Method::Gram => {
            let basis = sobolev_basis_gram(&ctx, args.n)?;
            (basis_json("gram", &basis), poly_rows(basis.polys()), 0u8)
        }
        Method::Recursion => {
            let (p, q, c) = recursion_inputs(&ctx, args.width_p, args.width_q, args.n)?;
            let basis = sobolev_basis_recursive(&ctx, &p, &q, &c, args.n)?;
            (
                basis_json("recursion", &basis),
                poly_rows(basis.polys()),
                0u8,
            )
        }
        Method::Both => {
            let gram = sobolev_basis_gram(&ctx, args.n)?;
            let (p, q, c) = recursion_inputs(&ctx, args.width_p, args.width_q, args.n)?;
            let rec = sobolev_basis_recursive(&ctx, &p, &q, &c, args.n)?;
            let mut mismatch = None;
            for n in 0..=args.n {
                if gram.poly(n)? != rec.poly(n)? || gram.s_norm(n)? != rec.s_norm(n)? {
                    mismatch = Some(n);
                    break;
                }
            }
            if let Some(n) = mismatch {
                eprintln!("cross-check mismatch: routes disagree at degree {n}");
                return Ok(2);
            }
            (basis_json("both", &rec), poly_rows(rec.polys()), 0u8)
        }
    };
    emit(&args.output, doc, Some(rows))?;
    Ok(code)
}

fn run_verify_suite() -> Result<u8> {
    let outcomes = nucalc::verify::run_all();
    let mut all_pass = true;
    for o in &outcomes {
        println!("{:<30} {}", o.name, if o.passed { "pass" } else { "fail" });
        if !o.passed {
            all_pass = false;
            println!("  detail: {}", o.detail);
        }
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn max_bits(basis: &SobolevBasis, n: usize) -> u64 {
    basis
        .poly(n)
        .map(|p| p.coeffs().iter().map(bit_length).max().unwrap_or(0))
        .unwrap_or(0)
}

fn run_bench(args: BenchArgs) -> Result<u8> {
    let u = load_functional(&args.u)?;
    let v = load_functional(&args.v)?;
    let ctx = SobolevContext::new(u, v, args.m, args.nu.clone(), args.lambda.clone())?;

    let start = Instant::now();
    let gram = sobolev_basis_gram(&ctx, args.n)?;
    let gram_ms = start.elapsed().as_millis();

    let (p, q, c) = recursion_inputs(&ctx, args.width_p, args.width_q, args.n)?;
    let start = Instant::now();
    let rec = sobolev_basis_recursive(&ctx, &p, &q, &c, args.n)?;
    let recursion_ms = start.elapsed().as_millis();

    let rows: Vec<serde_json::Value> = (0..=args.n)
        .map(|n| {
            json!({
                "n": n,
                "gram_coeff_bits": max_bits(&gram, n),
                "recursion_coeff_bits": max_bits(&rec, n),
            })
        })
        .collect();
    let doc = json!({
        "n_max": args.n,
        "gram_ms": gram_ms as u64,
        "recursion_ms": recursion_ms as u64,
        "rows": rows,
    });
    emit(&args.output, doc, None)?;
    Ok(0)
}
