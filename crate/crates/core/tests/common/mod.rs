#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use veesys::builders::build_str;
use veesys::linalg;
use veesys::sampling;
use veesys::CovectorSystem;

/// Vee-systems used across the property tests.
pub const VEE_CORPUS: &[&str] = &[
    "A:n=4",
    "B:n=4,lambda=0.5",
    "B:n=3,lambda=0",
    "D:n=4",
    "F4:lambda=1",
    "F4:lambda=sqrt(2)",
    "E6",
    "E7",
    "E8",
    "H3",
    "H4",
    "I2:m=7",
    "Fn:n=5,lambda=sqrt(6),M=1",
    "Fn:n=6,lambda=2,M=1/sqrt(2)",
    "T4:M=1",
    "T4:M=sqrt(0.6)",
    "T4_eij:M=0.9",
    "T4_long:M=1.2",
    "F3_1:lambda=0.8",
    "F3_2:lambda=0.3",
    "An_def:c=2,1,3,0.5",
    "Bn_def:gamma=0.5,c=1,2,1",
];

/// Systems that are not vee-systems.
pub const NON_VEE: &[&str] = &["Fn:n=5,lambda=2,M=1", "Fn:n=6,lambda=sqrt(3),M=1", "Fn:n=7,lambda=2,M=0.5"];

pub fn build(spec: &str) -> CovectorSystem {
    build_str(spec).unwrap_or_else(|e| panic!("{spec}: {e}"))
}

pub fn corpus() -> Vec<CovectorSystem> {
    VEE_CORPUS.iter().map(|s| build(s)).collect()
}

pub fn e8_even() -> CovectorSystem {
    veesys::builders::build_e8_even_sign_variant()
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    linalg::orthogonal_from(m)
}

pub fn random_invertible(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let sv = m.clone().singular_values();
        if sv.min() > 0.3 * sv.max() {
            return m;
        }
    }
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    sampling::gaussian_vector(rng, dim)
}

/// Gradient of `(1/4) sum a(x)^2 log a(x)^2`: `(1/2) sum a(x) (log a(x)^2 + 1) a`.
pub fn prepotential_gradient(system: &CovectorSystem, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; system.dim];
    for c in &system.covectors {
        let s = c.eval(x);
        linalg::axpy(0.5 * s * ((s * s).ln() + 1.0), c, &mut g);
    }
    g
}

/// `d^3 F (a, e_p, e_q)` from mixed central differences of the analytic gradient
/// with step `h` along `a` and `e_q`.
pub fn finite_difference_third(system: &CovectorSystem, x: &[f64], a: &[f64], h: f64) -> DMatrix<f64> {
    let n = system.dim;
    let mut out = DMatrix::zeros(n, n);
    for q in 0..n {
        let eq = linalg::unit(n, q);
        let at = |s: f64, t: f64| {
            let mut y = x.to_vec();
            linalg::axpy(s, a, &mut y);
            linalg::axpy(t, &eq, &mut y);
            prepotential_gradient(system, &y)
        };
        let (pp, pm, mp, mm) = (at(h, h), at(h, -h), at(-h, h), at(-h, -h));
        for p in 0..n {
            out[(p, q)] = (pp[p] - pm[p] - mp[p] + mm[p]) / (4.0 * h * h);
        }
    }
    out
}

/// A vector `v` made orthogonal to every row of `rows`.
pub fn project_off(v: &[f64], rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let basis = linalg::orthonormal_span(rows, dim, 1e-12);
    let mut out = v.to_vec();
    for b in &basis {
        let c = linalg::dot(&out, b);
        linalg::axpy(-c, b, &mut out);
    }
    out
}
