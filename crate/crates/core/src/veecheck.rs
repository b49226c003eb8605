//! Decides the vee-conditions: for every 2-plane `P` of the dual space and every
//! `a` in `P n A`, the vector `sum_{b in P n A} b(a^v) b^v` must be proportional to
//! `a^v`.

use serde::Serialize;

use crate::error::Result;
use crate::gram::{gram, GramForm};
use crate::linalg;
use crate::system::{Covector, CovectorSystem};
use crate::tolerance::TolerancePolicy;

/// The maximal set of system covectors lying in one 2-plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneClass {
    /// Indices into the system, ascending.
    pub members: Vec<usize>,
    /// Orthonormal basis of the plane.
    pub basis: [Vec<f64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub plane: Vec<usize>,
    pub alpha: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneLambda {
    pub plane: Vec<usize>,
    pub alpha: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VeeReport {
    pub is_vee: bool,
    pub violations: Vec<Violation>,
    pub lambdas: Vec<PlaneLambda>,
    pub gram_condition_number: f64,
    pub plane_count: usize,
    pub max_residual: f64,
}

/// Groups the covectors by the 2-planes they span. Every unordered pair of covectors
/// lies in exactly one returned class.
pub fn plane_partition(system: &CovectorSystem, eps_rank: f64) -> Vec<PlaneClass> {
    let n = system.len();
    let rows = system.rows();
    let norms: Vec<f64> = rows.iter().map(|r| linalg::norm(r)).collect();
    let mut covered = vec![false; n * n];
    let mut classes = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if covered[i * n + j] {
                continue;
            }
            let basis = linalg::orthonormal_span(&[rows[i].clone(), rows[j].clone()], system.dim, eps_rank);
            debug_assert_eq!(basis.len(), 2);
            let members: Vec<usize> = (0..n)
                .filter(|&k| k == i || k == j || linalg::distance_to_span(&rows[k], &basis) <= eps_rank * norms[k])
                .collect();
            for &a in &members {
                for &b in &members {
                    covered[a * n + b] = true;
                }
            }
            let mut it = basis.into_iter();
            let b0 = it.next().unwrap_or_default();
            let b1 = it.next().unwrap_or_default();
            classes.push(PlaneClass {
                members,
                basis: [b0, b1],
            });
        }
    }
    classes
}

/// Proportionality test inside one plane for one member; returns (lambda, relative residual).
fn plane_residual(alpha: usize, members: &[usize], rows: &[Vec<f64>], vees: &[Vec<f64>]) -> (f64, f64) {
    let a = &vees[alpha];
    let dim = a.len();
    let mut v = vec![0.0; dim];
    let mut scale = 0.0;
    for &b in members {
        let c = linalg::dot(&rows[b], a);
        linalg::axpy(c, &vees[b], &mut v);
        scale += c.abs() * linalg::norm(&vees[b]);
    }
    let lambda = linalg::dot(&v, a) / linalg::dot(a, a);
    let mut r = v;
    linalg::axpy(-lambda, a, &mut r);
    (lambda, linalg::norm(&r) / scale)
}

/// Runs the vee-conditions on every plane class.
///
/// The residual of a member `a` is `|v - l a^v| / sum_b |b(a^v)| |b^v|` with `l` the
/// least-squares coefficient, which is invariant under rescaling of the system and
/// under orthogonal changes of coordinates.
pub fn check_vee(system: &CovectorSystem, policy: &TolerancePolicy) -> Result<VeeReport> {
    let form = gram(system, policy.eps_rank)?;
    Ok(check_vee_with(system, &form, policy))
}

pub fn check_vee_with(system: &CovectorSystem, form: &GramForm, policy: &TolerancePolicy) -> VeeReport {
    let rows = system.rows();
    let vees: Vec<Vec<f64>> = rows.iter().map(|r| form.cvee(r)).collect();
    let planes = plane_partition(system, policy.eps_rank);
    let mut violations = Vec::new();
    let mut lambdas = Vec::new();
    let mut max_residual: f64 = 0.0;
    for plane in &planes {
        for &alpha in &plane.members {
            let (lambda, residual) = plane_residual(alpha, &plane.members, &rows, &vees);
            max_residual = max_residual.max(residual);
            if residual > policy.eps_residual {
                violations.push(Violation {
                    plane: plane.members.clone(),
                    alpha,
                    residual,
                });
            }
            lambdas.push(PlaneLambda {
                plane: plane.members.clone(),
                alpha,
                lambda,
            });
        }
    }
    VeeReport {
        is_vee: violations.is_empty(),
        violations,
        lambdas,
        gram_condition_number: form.condition_number(),
        plane_count: planes.len(),
        max_residual,
    }
}

/// Returns `l` when `sum a (x) a = l Id` in Euclidean coordinates, up to relative `tol`.
pub fn check_well_distributed(set: &[Covector], dim: usize, tol: f64) -> Option<f64> {
    if set.is_empty() {
        return None;
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for a in set {
        let v = linalg::to_dvector(a);
        m += &v * v.transpose();
    }
    let lambda = m.trace() / dim as f64;
    let dev = (m - nalgebra::DMatrix::identity(dim, dim) * lambda).amax();
    (dev <= tol * lambda.abs()).then_some(lambda)
}

/// Splits `set` into two non-empty mutually orthogonal blocks when possible.
///
/// The first block is the connected component of `set[0]` in the graph joining
/// non-orthogonal covectors; the second block is everything else.
pub fn check_reducible(set: &[Covector], tol: f64) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = set.len();
    if n < 2 {
        return None;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && linalg::dot(&set[i], &set[j]).abs() > tol * set[i].norm() * set[j].norm() {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let first: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
    let second: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    (!second.is_empty()).then_some((first, second))
}

/// The geometric form of the vee-test: after changing coordinates so that the Gram
/// form becomes the identity, the system must be well-distributed and every plane
/// class must be reducible or well-distributed inside its plane.
pub fn check_vee_geometric(system: &CovectorSystem, policy: &TolerancePolicy) -> Result<bool> {
    let form = gram(system, policy.eps_rank)?;
    let eig = linalg::sym_eigen(&form.g);
    let inv_sqrt = linalg::sym_function(&eig, |l| 1.0 / l.sqrt());
    let normalized: Vec<Covector> = system
        .covectors
        .iter()
        .map(|c| Covector::new(linalg::to_vec(&(&inv_sqrt * linalg::to_dvector(c)))))
        .collect();
    let tol = policy.eps_residual;
    if check_well_distributed(&normalized, system.dim, tol).is_none() {
        return Ok(false);
    }
    for plane in plane_partition(system, policy.eps_rank) {
        let span = linalg::orthonormal_span(
            &plane.members.iter().map(|&i| normalized[i].coords.clone()).collect::<Vec<_>>(),
            system.dim,
            policy.eps_rank,
        );
        let in_plane: Vec<Covector> = plane
            .members
            .iter()
            .map(|&i| Covector::new(span.iter().map(|b| linalg::dot(b, &normalized[i])).collect()))
            .collect();
        let ok = check_reducible(&in_plane, tol).is_some()
            || check_well_distributed(&in_plane, 2, tol).is_some();
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
