//! Seeded sampling of points off the hyperplane arrangement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, VeeError};
use crate::linalg;
use crate::system::{CovectorSystem, Point};
use crate::tolerance::TolerancePolicy;

pub const MAX_DRAWS: usize = 10_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Smallest `|a(x)| / (|a| |x|)` over the given covectors.
pub fn regularity_margin<'a>(covectors: impl IntoIterator<Item = &'a [f64]>, x: &[f64]) -> f64 {
    let nx = linalg::norm(x);
    covectors
        .into_iter()
        .map(|a| linalg::dot(a, x).abs() / (linalg::norm(a) * nx))
        .fold(f64::INFINITY, f64::min)
}

/// Draws Gaussian combinations of `basis` until every covector in `covectors` is
/// bounded away from zero by `eps_regular`.
pub fn sample_regular_in<R: Rng + ?Sized>(
    rng: &mut R,
    covectors: &[&[f64]],
    basis: &[Vec<f64>],
    dim: usize,
    eps_regular: f64,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_DRAWS {
        let coeffs = gaussian_vector(rng, basis.len());
        let mut x = vec![0.0; dim];
        for (c, b) in coeffs.iter().zip(basis) {
            linalg::axpy(*c, b, &mut x);
        }
        if linalg::norm(&x) == 0.0 {
            continue;
        }
        if regularity_margin(covectors.iter().copied(), &x) >= eps_regular {
            return Ok(x);
        }
    }
    Err(VeeError::SamplingExhausted {
        attempts: MAX_DRAWS,
        eps_regular,
    })
}

/// A point of the arrangement complement, deterministic in `policy.rng_seed`.
pub fn random_regular_point(system: &CovectorSystem, policy: &TolerancePolicy) -> Result<Point> {
    let mut rng = rng(policy.rng_seed);
    regular_point_from(&mut rng, system, policy.eps_regular)
}

/// Same as [`random_regular_point`] but drawing from a caller-owned generator, so
/// that sequences of points can be produced from a single seed.
pub fn regular_point_from<R: Rng + ?Sized>(
    rng: &mut R,
    system: &CovectorSystem,
    eps_regular: f64,
) -> Result<Point> {
    let rows: Vec<&[f64]> = system.covectors.iter().map(|c| c.coords.as_slice()).collect();
    let basis: Vec<Vec<f64>> = (0..system.dim).map(|i| linalg::unit(system.dim, i)).collect();
    sample_regular_in(rng, &rows, &basis, system.dim, eps_regular).map(Point::new)
}

/// `count` regular points drawn from one seeded stream.
pub fn regular_points(system: &CovectorSystem, policy: &TolerancePolicy, count: usize) -> Result<Vec<Point>> {
    let mut rng = rng(policy.rng_seed);
    (0..count)
        .map(|_| regular_point_from(&mut rng, system, policy.eps_regular))
        .collect()
}
