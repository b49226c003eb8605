mod common;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use veesys::equivalence::are_equivalent;
use veesys::frobenius::fa_matrix;
use veesys::gram::{gram, gram_of_rows};
use veesys::linalg;
use veesys::restriction::{limit_check_at, restrict, restrict_along, subsystem_of, tangency_check};
use veesys::sampling;
use veesys::veecheck::check_vee;
use veesys::{CovectorSystem, TolerancePolicy, VeeError};

use common::*;

fn policy() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Closed subsystem generated by `k` random covectors, or `None` if it fills the space.
fn random_subsystem<R: Rng>(rng: &mut R, a: &CovectorSystem, k: usize) -> Option<Vec<usize>> {
    let picks: Vec<Vec<f64>> = sample(rng, a.len(), k).iter().map(|i| a.covectors[i].coords.clone()).collect();
    let b = subsystem_of(a, &picks, 1e-9);
    (a.rank(1e-9) > linalg::orthonormal_span(&picks, a.dim, 1e-9).len()).then_some(b)
}

fn basis_matrix(basis: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, basis.len(), |i, j| basis[j][i])
}

#[test]
fn restrictions_of_vee_systems_are_vee_systems() {
    let mut rng = sampling::rng(5);
    for a in corpus().iter().filter(|a| a.dim >= 3) {
        for _ in 0..3 {
            let k = rng.random_range(1..=a.dim - 2);
            let Some(b) = random_subsystem(&mut rng, a, k) else { continue };
            let r = restrict(a, &b, &policy()).unwrap();
            let report = check_vee(&r.system, &policy()).unwrap();
            assert!(report.is_vee, "{} along {b:?}: residual {:e}", a.name, report.max_residual);
        }
    }
}

#[test]
fn gram_of_restriction_is_gram_restricted_to_the_subspace() {
    let mut rng = sampling::rng(6);
    for spec in ["E7", "F4:lambda=0.7", "Fn:n=5,lambda=2,M=1", "H4", "Bn_def:gamma=0.5,c=1,2,1"] {
        let a = build(spec);
        let b = random_subsystem(&mut rng, &a, 1).unwrap();
        let r = restrict(&a, &b, &policy()).unwrap();
        let merged = gram(&r.system, 1e-9).unwrap().g;
        let image_rows: Vec<&[f64]> = r.images.iter().map(|(_, v)| v.as_slice()).collect();
        let unmerged = gram_of_rows(&image_rows, r.system.dim, 1e-9).unwrap().g;
        assert!((&merged - &unmerged).amax() < 1e-12 * merged.amax(), "{spec}");
        let p = basis_matrix(&r.subspace.basis, a.dim);
        let restricted = p.transpose() * gram(&a, 1e-9).unwrap().g * &p;
        assert!((&merged - &restricted).amax() < 1e-10 * merged.amax(), "{spec}");
    }
}

#[test]
fn restricted_third_derivatives_sum_the_surviving_covectors() {
    let mut rng = sampling::rng(7);
    for spec in ["E6", "F4:lambda=0.7", "Fn:n=5,lambda=2,M=1", "D:n=5"] {
        let a = build(spec);
        let b = random_subsystem(&mut rng, &a, 2).unwrap();
        let r = restrict(&a, &b, &policy()).unwrap();
        let y = sampling::regular_point_from(&mut rng, &r.system, 0.01).unwrap();
        let t = gaussian(&mut rng, r.system.dim);
        let x = r.lift(&y);
        let dir = r.lift(&t);
        let mut expected = DMatrix::zeros(a.dim, a.dim);
        for (i, g) in a.covectors.iter().enumerate() {
            if b.contains(&i) {
                continue;
            }
            let col = linalg::to_dvector(g);
            expected += (g.eval(&dir) / g.eval(&x)) * &col * col.transpose();
        }
        let p = basis_matrix(&r.subspace.basis, a.dim);
        let expected = p.transpose() * expected * &p;
        let got = fa_matrix(&r.system, &y, &t, &policy()).unwrap().m;
        assert!((&got - &expected).amax() < 1e-9 * expected.amax(), "{spec}");
    }
}

#[test]
fn restricting_in_two_steps_equals_restricting_once() {
    let mut rng = sampling::rng(8);
    let mut checked = 0;
    for spec in ["E7", "E8", "F4:lambda=0.7", "B:n=5,lambda=1.5", "H4", "Fn:n=6,lambda=2,M=1/sqrt(2)"] {
        let a = build(spec);
        let b1 = random_subsystem(&mut rng, &a, 1).unwrap();
        let r1 = restrict(&a, &b1, &policy()).unwrap();
        if r1.system.dim < 3 {
            continue;
        }
        let Some(b2) = random_subsystem(&mut rng, &r1.system, 1) else { continue };
        let r2 = restrict(&r1.system, &b2, &policy()).unwrap();
        let mut gens: Vec<Vec<f64>> = b1.iter().map(|&i| a.covectors[i].coords.clone()).collect();
        gens.extend(b2.iter().map(|&j| r1.lift(&r1.system.covectors[j])));
        let b = subsystem_of(&a, &gens, 1e-9);
        let direct = restrict(&a, &b, &policy()).unwrap();
        assert!(are_equivalent(&r2.system, &direct.system, &policy()).unwrap(), "{spec}");
        checked += 1;
    }
    assert!(checked >= 4);
}

#[test]
fn small_examples() {
    // A_3 along a root: three covectors of lengths sqrt2, sqrt3, sqrt3 (two merges)
    let a3 = build("A:n=3");
    let r = restrict_along(&a3, &[vec![1.0, -1.0, 0.0, 0.0]].map(|v| veesys::builders::sum_zero_coords(&v)), &policy())
        .unwrap();
    assert_eq!(r.system.len(), 3);
    assert_eq!(r.merges().count(), 2);
    assert!(are_equivalent(&r.system, &build("An_def:c=2,1,1"), &policy()).unwrap());

    // F_4 along the long root 2 L e_1
    let l: f64 = 0.7;
    let f4 = build("F4:lambda=0.7");
    let r = restrict_along(&f4, &[vec![1.0, 0.0, 0.0, 0.0]], &policy()).unwrap();
    assert_eq!(r.system.len(), 13);
    let longest = r.system.max_norm();
    assert!((longest - (4.0 * l * l + 2.0).sqrt()).abs() < 1e-12);
    assert!(are_equivalent(&r.system, &build("F3_1:lambda=0.7"), &policy()).unwrap());

    // E_8 along e7 +- e8
    let e8 = build("E8");
    let mut u = vec![0.0; 8];
    u[6] = 1.0;
    u[7] = 1.0;
    let mut w = u.clone();
    w[7] = -1.0;
    let r = restrict_along(&e8, &[u, w], &policy()).unwrap();
    assert_eq!((r.system.dim, r.system.len()), (6, 68));
    assert!(are_equivalent(&r.system, &build("Fn:n=6,lambda=2,M=1/sqrt(2)"), &policy()).unwrap());
}

#[test]
fn f6_to_f5_to_f4_chain() {
    let f6 = build("Fn:n=6,lambda=2,M=1/sqrt(2)");
    let f5 = restrict_along(&f6, &[linalg::unit(6, 5)], &policy()).unwrap().system;
    assert!(are_equivalent(&f5, &build("Fn:n=5,lambda=sqrt(6),M=1"), &policy()).unwrap());
    let f4 = restrict_along(&f5, &[linalg::unit(5, 4)], &policy()).unwrap().system;
    // e_i +- e_j, sqrt8 e_i and sqrt2 (e_1 +- ... +- e_4): the member L = sqrt2
    assert!(are_equivalent(&f4, &build("F4:lambda=sqrt(2)"), &policy()).unwrap());
}

#[test]
fn errors_and_degenerate_inputs() {
    let a3 = build("A:n=3");
    let all: Vec<usize> = (0..a3.len()).collect();
    assert!(matches!(restrict(&a3, &all, &policy()), Err(VeeError::EmptySubspace)));
    assert!(matches!(restrict(&a3, &[99], &policy()), Err(VeeError::InvalidSpec(_))));
    let f4 = build("F4:lambda=1");
    let u = vec![0.3, 0.1, -0.7, 0.2];
    assert!(matches!(restrict_along(&f4, &[u], &policy()), Err(VeeError::Precondition(_))));
}

#[test]
fn limit_converges_at_first_order() {
    let a = build("B:n=4,lambda=1");
    let b = subsystem_of(&a, &[linalg::unit(4, 0)], 1e-9);
    let r = restrict(&a, &b, &policy()).unwrap();
    let mut rng = sampling::rng(9);
    let x0 = r.lift(&sampling::regular_point_from(&mut rng, &r.system, 0.05).unwrap());
    let u = r.lift(&gaussian(&mut rng, r.system.dim));
    let v = r.lift(&gaussian(&mut rng, r.system.dim));
    let errs: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&d| limit_check_at(&a, &b, &x0, &u, &v, d, &policy()).unwrap())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((5.0..20.0).contains(&ratio), "errors {errs:?}");
    }
}

#[test]
fn tangency_fails_off_the_vee_locus() {
    let a = build("Fn:n=5,lambda=2,M=1");
    let mut rng = sampling::rng(10);
    let mut worst: f64 = 0.0;
    for alpha in [0, 5, a.len() - 1] {
        let normal = vec![a.covectors[alpha].coords.clone()];
        let x = project_off(&gaussian(&mut rng, 5), &normal, 5);
        let u = project_off(&gaussian(&mut rng, 5), &normal, 5);
        let v = project_off(&gaussian(&mut rng, 5), &normal, 5);
        worst = worst.max(tangency_check(&a, alpha, &x, &u, &v, &policy()).unwrap());
    }
    assert!(worst > 1e-4, "{worst:e}");
}
