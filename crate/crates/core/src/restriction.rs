//! Restriction of a system to the intersection subspace `L_B` of a subsystem `B`.
//!
//! Covectors are identified with vectors through the Euclidean form, so restricting
//! `g` to `L_B` is orthogonal projection followed by coordinates in an orthonormal
//! basis of `L_B`. Collinear images are merged into one covector `lambda g` with
//! `lambda^2 = sum lambda_i^2`.

use serde::Serialize;

use crate::error::{Result, VeeError};
use crate::frobenius::Frobenius;
use crate::gram::gram;
use crate::linalg;
use crate::sampling;
use crate::system::{are_collinear, canonical_direction, Covector, CovectorSystem};
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subspace {
    /// Orthonormal basis of `L_B`.
    pub basis: Vec<Vec<f64>>,
    /// Orthonormal basis of `span(B)`.
    pub normal_basis: Vec<Vec<f64>>,
    pub ambient_dim: usize,
    pub sub_dim: usize,
}

impl Subspace {
    /// `L_B` for the covectors `rows`, with a basis drawn greedily from the projected
    /// standard basis (so coordinate subspaces come out axis-aligned).
    pub fn annihilator_of(rows: &[Vec<f64>], dim: usize, eps: f64) -> Self {
        let normal_basis = linalg::orthonormal_span(rows, dim, eps);
        let basis = linalg::complement_basis(rows, dim, eps);
        Self {
            sub_dim: basis.len(),
            basis,
            normal_basis,
            ambient_dim: dim,
        }
    }

    /// Coordinates of the orthogonal projection of `v` in `basis`.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| linalg::dot(b, v)).collect()
    }

    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (c, b) in coords.iter().zip(&self.basis) {
            linalg::axpy(*c, b, &mut out);
        }
        out
    }

    /// Largest relative component of `v` along `span(B)`.
    pub fn normal_component(&self, v: &[f64]) -> f64 {
        let n = linalg::norm(v);
        if n == 0.0 {
            return 0.0;
        }
        self.normal_basis
            .iter()
            .map(|b| linalg::dot(b, v).abs())
            .fold(0.0, f64::max)
            / n
    }
}

/// One output covector and the source covectors that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeGroup {
    pub sources: Vec<usize>,
    /// Lengths of the individual projected images.
    pub source_scalars: Vec<f64>,
    /// Length of the merged covector.
    pub merged_scalar: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictionResult {
    #[serde(skip)]
    pub system: CovectorSystem,
    /// Indices of `A` forming the closed subsystem `B`.
    pub subsystem: Vec<usize>,
    /// One group per output covector, in output order.
    pub merge_log: Vec<MergeGroup>,
    /// Nonzero projected images before merging, as `(source index, coordinates)`.
    pub images: Vec<(usize, Vec<f64>)>,
    pub subspace: Subspace,
}

impl RestrictionResult {
    /// Groups that actually merged two or more covectors.
    pub fn merges(&self) -> impl Iterator<Item = &MergeGroup> {
        self.merge_log.iter().filter(|g| g.sources.len() > 1)
    }

    /// Ambient vector to restricted coordinates.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.subspace.coordinates(v)
    }

    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        self.subspace.lift(coords)
    }
}

/// Indices of all covectors of `a` lying in `span(u)`.
pub fn subsystem_of(a: &CovectorSystem, u: &[Vec<f64>], eps_rank: f64) -> Vec<usize> {
    let basis = linalg::orthonormal_span(u, a.dim, eps_rank);
    if basis.is_empty() {
        return Vec::new();
    }
    a.covectors
        .iter()
        .enumerate()
        .filter(|(_, c)| linalg::distance_to_span(c, &basis) <= eps_rank * c.norm().max(1.0))
        .map(|(i, _)| i)
        .collect()
}

/// Restricts `a` to `L_B`, where `B` is the subsystem generated by `b_indices`.
pub fn restrict(a: &CovectorSystem, b_indices: &[usize], policy: &TolerancePolicy) -> Result<RestrictionResult> {
    let eps = policy.eps_rank;
    for &i in b_indices {
        if i >= a.len() {
            return Err(VeeError::InvalidSpec(format!(
                "covector index {i} out of range (system has {})",
                a.len()
            )));
        }
    }
    let generators: Vec<Vec<f64>> = b_indices.iter().map(|&i| a.covectors[i].coords.clone()).collect();
    let subsystem = subsystem_of(a, &generators, eps);
    let b_rows: Vec<Vec<f64>> = subsystem.iter().map(|&i| a.covectors[i].coords.clone()).collect();
    let subspace = Subspace::annihilator_of(&b_rows, a.dim, eps);
    if subspace.sub_dim == 0 {
        return Err(VeeError::EmptySubspace);
    }

    let zero_tol = eps * a.max_norm().max(1.0);
    let mut images = Vec::new();
    for (i, c) in a.covectors.iter().enumerate() {
        if subsystem.contains(&i) {
            continue;
        }
        let coords = subspace.coordinates(c);
        if linalg::norm(&coords) > zero_tol {
            images.push((i, coords));
        }
    }
    if images.is_empty() {
        return Err(VeeError::EmptyRestriction);
    }

    // group collinear images; each group keeps the canonical direction of its first member
    let mut groups: Vec<(Covector, MergeGroup)> = Vec::new();
    for (i, coords) in &images {
        let dir = canonical_direction(&Covector::new(coords.clone()), zero_tol)?;
        let len = dir.norm();
        match groups.iter_mut().find(|(d, _)| are_collinear(&d.coords, &dir.coords, eps)) {
            Some((_, g)) => {
                g.sources.push(*i);
                g.source_scalars.push(len);
            }
            None => groups.push((
                dir,
                MergeGroup {
                    sources: vec![*i],
                    source_scalars: vec![len],
                    merged_scalar: len,
                },
            )),
        }
    }
    let mut rows = Vec::with_capacity(groups.len());
    let mut merge_log = Vec::with_capacity(groups.len());
    for (dir, mut g) in groups {
        let mut squares: Vec<f64> = g.source_scalars.iter().map(|l| l * l).collect();
        squares.sort_by(f64::total_cmp);
        g.merged_scalar = squares.iter().sum::<f64>().sqrt();
        rows.push(linalg::scale(&dir, g.merged_scalar / dir.norm()));
        merge_log.push(g);
    }

    let name = format!(
        "{} | restricted along [{}]",
        a.name,
        subsystem.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    let system = CovectorSystem::new(name, subspace.sub_dim, rows, a.params.clone(), eps)?;
    if system.rank(eps) < system.dim {
        // the images span a proper subspace of L_B: shrink L_B to it
        let span = linalg::span_basis_from_standard(&system.rows(), system.dim, eps);
        let basis: Vec<Vec<f64>> = span.iter().map(|s| subspace.lift(s)).collect();
        let reduced = Subspace {
            sub_dim: basis.len(),
            basis,
            ..subspace
        };
        let system = system.reduce_to_span(eps)?;
        let images = images
            .into_iter()
            .map(|(i, _)| (i, reduced.coordinates(&a.covectors[i])))
            .collect();
        return Ok(RestrictionResult {
            system,
            subsystem,
            merge_log,
            images,
            subspace: reduced,
        });
    }
    Ok(RestrictionResult {
        system,
        subsystem,
        merge_log,
        images,
        subspace,
    })
}

/// Restricts along the subsystem spanned by arbitrary covectors `u`.
pub fn restrict_along(a: &CovectorSystem, u: &[Vec<f64>], policy: &TolerancePolicy) -> Result<RestrictionResult> {
    let idx = subsystem_of(a, u, policy.eps_rank);
    if idx.is_empty() {
        return Err(VeeError::Precondition(
            "no covector of the system lies in the span of the given covectors".into(),
        ));
    }
    restrict(a, &idx, policy)
}

/// Step used by [`limit_check`].
pub const LIMIT_STEP: f64 = 1e-6;

/// Compares the full product at `x0 + delta |x0| r` with the lifted restricted
/// product at `x0`, for `x0, u, v` in `L_B` (ambient coordinates) and a seeded
/// random unit direction `r`. Returns `|difference| |x0| / (|u| |v|)`.
pub fn limit_check(
    a: &CovectorSystem,
    b_indices: &[usize],
    x0: &[f64],
    u: &[f64],
    v: &[f64],
    policy: &TolerancePolicy,
) -> Result<f64> {
    limit_check_at(a, b_indices, x0, u, v, LIMIT_STEP, policy)
}

pub fn limit_check_at(
    a: &CovectorSystem,
    b_indices: &[usize],
    x0: &[f64],
    u: &[f64],
    v: &[f64],
    delta: f64,
    policy: &TolerancePolicy,
) -> Result<f64> {
    let res = restrict(a, b_indices, policy)?;
    for (w, what) in [(x0, "x0"), (u, "u"), (v, "v")] {
        if w.len() != a.dim {
            return Err(VeeError::DimensionMismatch {
                expected: a.dim,
                found: w.len(),
            });
        }
        if res.subspace.normal_component(w) > policy.eps_rank.sqrt() {
            return Err(VeeError::Precondition(format!("{what} is not tangent to L_B")));
        }
    }
    let nu = linalg::norm(u);
    let nv = linalg::norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let restricted = Frobenius::new(&res.system, policy)?;
    let y0 = res.project(x0);
    let lifted = res.lift(&restricted.multiply(&y0, &res.project(u), &res.project(v))?);

    let mut rng = sampling::rng(policy.rng_seed);
    let r = sampling::gaussian_vector(&mut rng, a.dim);
    let nx = linalg::norm(x0);
    let mut x = x0.to_vec();
    linalg::axpy(delta * nx / linalg::norm(&r), &r, &mut x);
    let full = Frobenius::new(a, policy)?.multiply(&x, u, v)?;
    Ok(linalg::norm(&linalg::sub(&full, &lifted)) * nx / (nu * nv))
}

/// At `x` on the hyperplane of covector `alpha_index`, computes `alpha(u * v)` with
/// the singular `alpha` term left out, relative to the sum of absolute values of the
/// surviving terms. Zero when `u` or `v` vanishes.
pub fn tangency_check(
    a: &CovectorSystem,
    alpha_index: usize,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    policy: &TolerancePolicy,
) -> Result<f64> {
    if alpha_index >= a.len() {
        return Err(VeeError::InvalidSpec(format!("covector index {alpha_index} out of range")));
    }
    for w in [x, u, v] {
        if w.len() != a.dim {
            return Err(VeeError::DimensionMismatch {
                expected: a.dim,
                found: w.len(),
            });
        }
    }
    let alpha = &a.covectors[alpha_index];
    let tol = policy.eps_rank.sqrt() * alpha.norm();
    for (w, what) in [(x, "x"), (u, "u"), (v, "v")] {
        if alpha.eval(w).abs() > tol * linalg::norm(w) {
            return Err(VeeError::Precondition(format!("{what} is not on the hyperplane of covector {alpha_index}")));
        }
    }
    let form = gram(a, policy.eps_rank)?;
    let alpha_vee = form.cvee(alpha);
    let nx = linalg::norm(x);
    let mut sum = 0.0;
    let mut scale = 0.0;
    for (i, beta) in a.covectors.iter().enumerate() {
        if i == alpha_index {
            continue;
        }
        let bx = beta.eval(x);
        if bx.abs() < policy.eps_rank * beta.norm() * nx {
            return Err(VeeError::SingularPoint { index: i, value: bx });
        }
        let term = beta.eval(u) * beta.eval(v) / bx * beta.eval(&alpha_vee);
        sum += term;
        scale += term.abs();
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(sum.abs() / scale)
}
