//! The ten acceptance criteria, one pass/fail line each.

// `!(x < tol)` is deliberate: a NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::index::sample;
use rand::seq::IndexedRandom;
use rand::Rng;
use veesys::builders::sum_zero_coords;
use veesys::catalog::{verify_known_equivalences, verify_t4_identifications, Group, Strata};
use veesys::equivalence::are_equivalent;
use veesys::frobenius::{max_wdvv_residual, Frobenius};
use veesys::restriction::{limit_check, restrict, subsystem_of, tangency_check};
use veesys::sampling;
use veesys::veecheck::check_vee;
use veesys::{linalg, CovectorSystem, TolerancePolicy};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn policy() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn try_build(spec: &str) -> Result<CovectorSystem, String> {
    veesys::builders::build_str(spec).map_err(|e| format!("{spec}: {e}"))
}

fn is_vee(spec: &str) -> Result<bool, String> {
    let a = try_build(spec)?;
    check_vee(&a, &policy()).map(|r| r.is_vee).map_err(|e| format!("{spec}: {e}"))
}

fn equiv(a: &CovectorSystem, b: &CovectorSystem) -> Result<bool, String> {
    are_equivalent(a, b, &policy()).map_err(|e| e.to_string())
}

fn coxeter_vee_and_wdvv() -> Outcome {
    let mut specs = vec!["A:n=4".to_string(), "D:n=4".into(), "E6".into(), "E7".into(), "E8".into()];
    specs.extend(["0", "0.5", "1", "2"].map(|l| format!("B:n=4,lambda={l}")));
    specs.extend(["0.5", "1", "sqrt(2)"].map(|l| format!("F4:lambda={l}")));
    specs.extend(["H3", "H4", "I2:m=7"].map(String::from));
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let a = try_build(spec)?;
        let report = check_vee(&a, &policy()).map_err(|e| e.to_string())?;
        ensure!(report.is_vee, "{spec}: vee residual {:e}", report.max_residual);
        let w = max_wdvv_residual(&a, 20, &policy()).map_err(|e| e.to_string())?;
        ensure!(w < 1e-8, "{spec}: WDVV residual {w:e}");
        worst = worst.max(w);
    }
    Ok(format!("{} systems, max WDVV residual {worst:.1e}", specs.len()))
}

fn fn_spec(n: usize, l2: f64, m2: f64) -> String {
    format!("Fn:n={n},lambda={},M={}", l2.sqrt(), m2.sqrt())
}

fn fn_type_locus() -> Outcome {
    let m2s = [0.25, 0.5, 1.0, 2.0];
    let loci = [(5, Some((6.0, 1.0))), (6, Some((4.0, 0.5))), (7, None)];
    for (n, locus) in loci {
        for l2 in 1..=10 {
            for m2 in m2s {
                let expected = locus == Some((f64::from(l2), m2));
                let got = is_vee(&fn_spec(n, f64::from(l2), m2))?;
                ensure!(got == expected, "n={n}, L^2={l2}, M^2={m2}: vee={got}");
            }
        }
        if let Some((l2, m2)) = locus {
            for (dl, dm) in [(1e-6, 0.0), (-1e-6, 0.0), (0.0, 1e-6), (0.0, -1e-6)] {
                ensure!(
                    !is_vee(&fn_spec(n, l2 + dl, m2 + dm))?,
                    "n={n}: still vee after shifting (L^2, M^2) by ({dl}, {dm})"
                );
            }
        }
    }
    Ok("120 grid points; both loci flip under 1e-6 shifts".into())
}

fn counts() -> Outcome {
    let expected = [
        ("F3_1:lambda=1", 13),
        ("F3_2:lambda=1", 13),
        ("Fn:n=5,lambda=sqrt(6),M=1", 41),
        ("Fn:n=6,lambda=2,M=1/sqrt(2)", 68),
        ("T4:M=1", 18),
        ("T4:M=1/sqrt(2)", 17),
    ];
    for (spec, n) in expected {
        let got = try_build(spec)?.len();
        ensure!(got == n, "{spec}: {got} covectors, expected {n}");
    }
    let even = e8_even();
    ensure!(even.len() == 120, "even-sign E_8 has {} covectors", even.len());
    ensure!(equiv(&even, &try_build("E8")?)?, "even-sign E_8 not equivalent to E_8");
    Ok("13, 13, 41, 68, 18, 17, 120; even-sign E_8 = E_8".into())
}

fn four_dimensional_family() -> Outcome {
    for m2 in [0.6, 0.75, 1.0, 1.5, 2.0] {
        let m = f64::sqrt(m2);
        ensure!(is_vee(&format!("T4:M={m}"))?, "M^2={m2}: not vee");
        let (l, k) = veesys::builders::t4_parameters(m).map_err(|e| e.to_string())?;
        for (l2, k2) in [(1.01 * l * l, k * k), (l * l, 1.01 * k * k)] {
            let spec = format!("T4raw:lambda={},K={},M={m}", l2.sqrt(), k2.sqrt());
            ensure!(!is_vee(&spec)?, "M^2={m2}: still vee after a 1% change ({spec})");
        }
    }
    let e7 = Strata::new(Group::E7, 1.0, &policy()).map_err(|e| e.to_string())?;
    let e6 = Strata::new(Group::E6, 1.0, &policy()).map_err(|e| e.to_string())?;
    let e7a3 = e7.get("A_3").map_err(|e| e.to_string())?;
    let e6a1a1 = e6.get("A_1×A_1").map_err(|e| e.to_string())?;
    ensure!(equiv(&try_build("T4:M=1")?, e7a3)?, "M^2=1 is not (E_7, A_3)");
    ensure!(equiv(&try_build("T4:M=sqrt(0.5)")?, e6a1a1)?, "M^2=1/2 is not (E_6, A_1×A_1)");
    let off = try_build("T4:M=0.8")?;
    ensure!(!equiv(&off, e7a3)? && !equiv(&off, e6a1a1)?, "M^2=0.64 matches a Coxeter restriction");
    Ok("5 values vee, 10 perturbations fail, identifications hold".into())
}

fn restriction_closure() -> Outcome {
    let corpus: Vec<CovectorSystem> = corpus().into_iter().filter(|a| a.dim >= 3).collect();
    let mut rng = sampling::rng(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let a = corpus.choose(&mut rng).expect("corpus is nonempty");
        let k = rng.random_range(1..=a.dim - 2);
        let picks: Vec<Vec<f64>> = sample(&mut rng, a.len(), k).iter().map(|i| a.covectors[i].coords.clone()).collect();
        let b = subsystem_of(a, &picks, policy().eps_rank);
        let r = restrict(a, &b, &policy()).map_err(|e| format!("trial {trial} ({}): {e}", a.name))?;
        let report = check_vee(&r.system, &policy()).map_err(|e| e.to_string())?;
        ensure!(
            report.is_vee,
            "trial {trial}: {} along {b:?} has residual {:e}",
            a.name,
            report.max_residual
        );
        worst = worst.max(report.max_residual);
    }
    Ok(format!("200 trials, max residual {worst:.1e}"))
}

fn identity_tables() -> Outcome {
    let start = Instant::now();
    let p = verify_known_equivalences(&policy()).map_err(|e| e.to_string())?;
    let t = verify_t4_identifications(&policy()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    if let Some(l) = p.lines.iter().chain(&t.lines).find(|l| !l.passed) {
        return Err(format!("{} ({})", l.statement, l.detail));
    }
    ensure!(t.lines.len() == 8, "{} identification lines", t.lines.len());
    ensure!(secs <= 60.0, "took {secs:.1} s");
    Ok(format!("{} + {} lines in {secs:.2} s", p.lines.len(), t.lines.len()))
}

/// Random composition of `total` into `parts` positive integers.
fn composition<R: Rng>(rng: &mut R, total: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = sample(rng, total - 1, parts - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Differences `e_a - e_b` of consecutive coordinates inside each block, starting at `offset`.
fn block_generators(blocks: &[usize], offset: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut gens = Vec::new();
    let mut start = offset;
    for &c in blocks {
        for k in start..start + c - 1 {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v[k + 1] = -1.0;
            gens.push(v);
        }
        start += c;
    }
    gens
}

fn list(c: &[usize]) -> String {
    c.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn deformed_families() -> Outcome {
    let mut rng = sampling::rng(77);
    let a5 = try_build("A:n=5")?;
    for _ in 0..5 {
        let parts = rng.random_range(2..=5);
        let c = composition(&mut rng, 6, parts);
        let gens: Vec<Vec<f64>> = block_generators(&c, 0, 6).iter().map(|g| sum_zero_coords(g)).collect();
        let b = subsystem_of(&a5, &gens, policy().eps_rank);
        let r = restrict(&a5, &b, &policy()).map_err(|e| e.to_string())?;
        let target = try_build(&format!("An_def:c={}", list(&c)))?;
        ensure!(equiv(&r.system, &target)?, "A_5 partition {c:?}");
    }
    for lambda in [0.0, 1.0, 2.0] {
        let b5 = try_build(&format!("B:n=5,lambda={lambda}"))?;
        for _ in 0..5 {
            let c0 = loop {
                let c0 = rng.random_range(0..=3);
                if !(lambda == 0.0 && c0 == 1) {
                    break c0;
                }
            };
            let rest = 5 - c0;
            let parts = rng.random_range(2..=rest.min(4));
            let c = composition(&mut rng, rest, parts);
            let mut gens = block_generators(&c, c0, 5);
            gens.extend((0..c0).map(|i| linalg::unit(5, i)));
            let b = subsystem_of(&b5, &gens, policy().eps_rank);
            let r = restrict(&b5, &b, &policy()).map_err(|e| e.to_string())?;
            let gamma = (lambda * lambda + 2.0 * c0 as f64 - 2.0) / 2.0;
            let target = try_build(&format!("Bn_def:gamma={gamma},c={}", list(&c)))?;
            ensure!(equiv(&r.system, &target)?, "B_5({lambda}) with c0={c0}, c={c:?}");
        }
    }
    Ok("5 A_5 partitions and 15 B_5 partitions match".into())
}

fn algebra_properties() -> Outcome {
    let mut systems: Vec<(CovectorSystem, bool)> = corpus().into_iter().map(|a| (a, true)).collect();
    systems.extend(NON_VEE.iter().map(|s| (build(s), false)));
    let mut worst_assoc: f64 = 0.0;
    let mut negative_max: f64 = 0.0;
    for (a, vee) in &systems {
        let fr = Frobenius::new(a, &policy()).map_err(|e| e.to_string())?;
        let mut rng = sampling::rng(3);
        for _ in 0..20 {
            let x = sampling::regular_point_from(&mut rng, a, policy().eps_regular).map_err(|e| e.to_string())?;
            let mut vs: Vec<Vec<f64>> = (0..3).map(|_| gaussian(&mut rng, a.dim)).collect();
            for v in &mut vs {
                let n = linalg::norm(v);
                v.iter_mut().for_each(|c| *c /= n);
            }
            let (u, v, w) = (&vs[0], &vs[1], &vs[2]);
            let uv = fr.multiply(&x, u, v).map_err(|e| e.to_string())?;
            ensure!(uv == fr.multiply(&x, v, u).map_err(|e| e.to_string())?, "{}: not commutative", a.name);
            let xv = fr.multiply(&x, &x, v).map_err(|e| e.to_string())?;
            let unit = linalg::norm(&linalg::sub(&xv, v));
            ensure!(unit < 1e-10, "{}: |x*v - v| = {unit:e}", a.name);
            let frob = fr.frobenius_residual(&x, u, v, w).map_err(|e| e.to_string())?;
            ensure!(frob < 1e-10, "{}: Frobenius residual {frob:e}", a.name);
            let assoc = fr.associativity_residual(&x, u, v, w).map_err(|e| e.to_string())?;
            if *vee {
                ensure!(assoc < 1e-9, "{}: associativity residual {assoc:e}", a.name);
                worst_assoc = worst_assoc.max(assoc);
            } else if a.name.starts_with("Fn") && a.dim == 5 {
                negative_max = negative_max.max(assoc);
            }
        }
    }
    ensure!(negative_max > 1e-4, "negative example associativity only {negative_max:e}");
    Ok(format!(
        "{} systems x 20 points; associativity {worst_assoc:.1e} on vee-systems, {negative_max:.2} on the negative example",
        systems.len()
    ))
}

fn limit_and_tangency_checks() -> Outcome {
    let systems = [try_build("A:n=3")?, try_build("B:n=3,lambda=1")?, try_build("F4:lambda=1")?];
    let mut rng = sampling::rng(31);
    let (mut worst_limit, mut worst_tangency): (f64, f64) = (0.0, 0.0);
    for config in 0..10 {
        let a = &systems[config % systems.len()];
        let alpha = rng.random_range(0..a.len());
        let b = subsystem_of(a, &[a.covectors[alpha].coords.clone()], policy().eps_rank);
        let r = restrict(a, &b, &policy()).map_err(|e| e.to_string())?;
        // the deviation is first order in delta with a constant ~ 1/margin^2, so x0 is kept well off the walls
        let y = sampling::regular_point_from(&mut rng, &r.system, 0.05).map_err(|e| e.to_string())?;
        let x0 = r.lift(&y);
        let u = r.lift(&gaussian(&mut rng, r.system.dim));
        let v = r.lift(&gaussian(&mut rng, r.system.dim));
        let p = TolerancePolicy::with_seed(config as u64);
        let lim = limit_check(a, &b, &x0, &u, &v, &p).map_err(|e| e.to_string())?;
        ensure!(lim <= 1e-4, "{} config {config}: limit deviation {lim:e}", a.name);
        worst_limit = worst_limit.max(lim);

        let normal = vec![a.covectors[alpha].coords.clone()];
        let x = project_off(&gaussian(&mut rng, a.dim), &normal, a.dim);
        let u = project_off(&gaussian(&mut rng, a.dim), &normal, a.dim);
        let v = project_off(&gaussian(&mut rng, a.dim), &normal, a.dim);
        let t = tangency_check(a, alpha, &x, &u, &v, &policy()).map_err(|e| e.to_string())?;
        ensure!(t <= 1e-9, "{} config {config}: tangency {t:e}", a.name);
        worst_tangency = worst_tangency.max(t);
    }
    Ok(format!("10 configurations; limit {worst_limit:.1e}, tangency {worst_tangency:.1e}"))
}

fn finite_differences() -> Outcome {
    let mut rng = sampling::rng(55);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let spec = VEE_CORPUS.choose(&mut rng).expect("corpus is nonempty");
        let a = try_build(spec)?;
        let fr = Frobenius::new(&a, &policy()).map_err(|e| e.to_string())?;
        let x = sampling::regular_point_from(&mut rng, &a, 0.05).map_err(|e| e.to_string())?;
        let dir = gaussian(&mut rng, a.dim);
        let fd = finite_difference_third(&a, &x, &dir, 1e-4 * linalg::norm(&x));
        let exact = fr.fa_matrix(&x, &dir).map_err(|e| e.to_string())?.m;
        let rel = (&fd - &exact).amax() / exact.amax();
        ensure!(rel < 1e-5, "{spec}: relative error {rel:e}");
        worst = worst.max(rel);
    }
    Ok(format!("5 triples, max relative error {worst:.1e}"))
}

/// Written to the raw stderr handle so the lines show up without `--nocapture`.
fn report(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("Coxeter systems are vee-systems and solve WDVV", coxeter_vee_and_wdvv),
        ("F_n-type vee locus", fn_type_locus),
        ("covector counts", counts),
        ("four-dimensional family and its identifications", four_dimensional_family),
        ("restrictions of vee-systems are vee-systems", restriction_closure),
        ("identity tables", identity_tables),
        ("deformed families as restrictions of A_5 and B_5", deformed_families),
        ("Frobenius algebra properties", algebra_properties),
        ("limit and tangency checks", limit_and_tangency_checks),
        ("third derivatives against finite differences", finite_differences),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => report(&format!("[PASS] criterion {}: {name} ({detail})", i + 1)),
            Err(why) => {
                report(&format!("[FAIL] criterion {}: {name}: {why}", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
