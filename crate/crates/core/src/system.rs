//! Covectors, covector systems and evaluation points.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VeeError};
use crate::linalg;

/// A linear functional on the ambient space, stored by its coordinates in the dual
/// of the standard basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Covector {
    pub coords: Vec<f64>,
}

impl Covector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Value of the functional on a vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.coords, x)
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coords)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.coords.iter().map(|c| c * t).collect())
    }
}

impl Deref for Covector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Covector {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

/// A point of the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

/// Returns `v` or `-v`, whichever has a positive first non-negligible coordinate.
///
/// A coordinate counts as negligible when its magnitude is below `eps` times the
/// largest coordinate magnitude, so that rounding noise in a leading slot does not
/// decide the sign.
pub fn canonical_direction(v: &Covector, eps: f64) -> Result<Covector> {
    let max = v.coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max < eps {
        return Err(VeeError::ZeroCovector { eps });
    }
    let lead = v
        .coords
        .iter()
        .copied()
        .find(|c| c.abs() > eps * max)
        .unwrap_or(0.0);
    if lead < 0.0 {
        Ok(v.scaled(-1.0))
    } else {
        Ok(v.clone())
    }
}

/// Sine-like measure of the angle between the lines spanned by `a` and `b`
/// (the chord between the nearer pair of unit vectors).
pub fn line_separation(a: &[f64], b: &[f64]) -> f64 {
    let na = linalg::norm(a);
    let nb = linalg::norm(b);
    let sign = if linalg::dot(a, b) >= 0.0 { 1.0 } else { -1.0 };
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x / na - sign * y / nb;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn are_collinear(a: &[f64], b: &[f64], eps: f64) -> bool {
    line_separation(a, b) < eps
}

/// A named, parameterized finite set of pairwise non-collinear covectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorSystem {
    pub name: String,
    pub dim: usize,
    pub covectors: Vec<Covector>,
    pub params: BTreeMap<String, f64>,
    /// Number of zero covectors discarded at construction.
    pub dropped_zero: usize,
    /// Number of covectors folded into a collinear partner at construction.
    pub merged: usize,
}

impl CovectorSystem {
    /// Builds a system from raw coordinate rows.
    ///
    /// Zero rows are dropped, every row is put in canonical direction, and collinear
    /// rows are merged into one covector whose squared length is the sum of theirs.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        rows: Vec<Vec<f64>>,
        params: BTreeMap<String, f64>,
        eps: f64,
    ) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(VeeError::InvalidSpec("ambient dimension must be positive".into()));
        }
        let scale = rows
            .iter()
            .map(|r| linalg::norm(r))
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut covectors: Vec<Covector> = Vec::with_capacity(rows.len());
        let mut dropped_zero = 0;
        let mut merged = 0;
        for row in rows {
            if row.len() != dim {
                return Err(VeeError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(VeeError::InvalidSpec(format!(
                    "non-finite coordinate in {row:?}"
                )));
            }
            let cv = match canonical_direction(&Covector::new(row), eps * scale) {
                Ok(cv) => cv,
                Err(_) => {
                    dropped_zero += 1;
                    continue;
                }
            };
            if let Some(existing) = covectors
                .iter_mut()
                .find(|e| are_collinear(&e.coords, &cv.coords, eps))
            {
                let n_old = existing.norm();
                let n_new = cv.norm();
                let t = (n_old * n_old + n_new * n_new).sqrt() / n_old;
                *existing = existing.scaled(t);
                merged += 1;
                continue;
            }
            covectors.push(cv);
        }
        if dropped_zero > 0 {
            warn!("{name}: dropped {dropped_zero} zero covector(s)");
        }
        if merged > 0 {
            warn!("{name}: merged {merged} collinear covector(s)");
        }
        Ok(Self {
            name,
            dim,
            covectors,
            params,
            dropped_zero,
            merged,
        })
    }

    pub fn len(&self) -> usize {
        self.covectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covectors.is_empty()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.covectors.iter().map(|c| c.coords.clone()).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.covectors.iter().map(Covector::norm).fold(0.0, f64::max)
    }

    /// Numerical rank of the coordinate matrix.
    pub fn rank(&self, eps: f64) -> usize {
        linalg::orthonormal_span(&self.rows(), self.dim, eps).len()
    }

    /// Applies `t` to every covector (as a coordinate vector) and returns a new system.
    pub fn map_linear(&self, name: impl Into<String>, t: &nalgebra::DMatrix<f64>) -> Result<Self> {
        let rows = self
            .covectors
            .iter()
            .map(|c| {
                let v = t * nalgebra::DVector::from_column_slice(&c.coords);
                v.iter().copied().collect()
            })
            .collect();
        Self::new(name, t.nrows(), rows, self.params.clone(), 1e-9)
    }

    /// Re-expresses the system in an orthonormal basis of the span of its covectors
    /// when that span is a proper subspace.
    pub fn reduce_to_span(self, eps: f64) -> Result<Self> {
        let basis = linalg::span_basis_from_standard(&self.rows(), self.dim, eps);
        if basis.len() == self.dim {
            return Ok(self);
        }
        let rows = self
            .covectors
            .iter()
            .map(|c| basis.iter().map(|b| linalg::dot(b, &c.coords)).collect())
            .collect();
        let mut out = Self::new(self.name, basis.len(), rows, self.params, eps)?;
        out.dropped_zero += self.dropped_zero;
        out.merged += self.merged;
        Ok(out)
    }
}

impl fmt::Display for CovectorSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {}, {} covectors)", self.name, self.dim, self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_direction_examples() {
        let out = canonical_direction(&Covector::new(vec![-1.0, 2.0, 0.0]), 1e-9).unwrap();
        assert_eq!(out.coords, vec![1.0, -2.0, 0.0]);
        let out = canonical_direction(&Covector::new(vec![0.0, 3.0, -1.0]), 1e-9).unwrap();
        assert_eq!(out.coords, vec![0.0, 3.0, -1.0]);
        assert!(matches!(
            canonical_direction(&Covector::new(vec![0.0, 0.0, 0.0]), 1e-9),
            Err(VeeError::ZeroCovector { .. })
        ));
    }

    #[test]
    fn canonical_direction_ignores_rounding_noise_in_leading_slot() {
        let v = Covector::new(vec![-1e-17, -1.0, 1.0]);
        let out = canonical_direction(&v, 1e-9).unwrap();
        assert!(out.coords[1] > 0.0);
    }

    #[test]
    fn constructor_drops_zeros_and_merges_collinear() {
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![-2.0, 0.0],
            vec![1.0, 1.0],
        ];
        let s = CovectorSystem::new("t", 2, rows, BTreeMap::new(), 1e-9).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dropped_zero, 1);
        assert_eq!(s.merged, 1);
        assert!((s.covectors[0].coords[0] - 5.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constructor_rejects_wrong_length() {
        let err = CovectorSystem::new("t", 2, vec![vec![1.0]], BTreeMap::new(), 1e-9);
        assert!(matches!(err, Err(VeeError::DimensionMismatch { .. })));
    }

    #[test]
    fn reduce_to_span_drops_a_dimension() {
        let rows = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0], vec![1.0, 0.0, -1.0]];
        let s = CovectorSystem::new("a2", 3, rows, BTreeMap::new(), 1e-9).unwrap();
        assert_eq!(s.rank(1e-9), 2);
        let r = s.reduce_to_span(1e-9).unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.len(), 3);
        for c in &r.covectors {
            assert!((c.norm() - 2.0_f64.sqrt()).abs() < 1e-12);
        }
    }
}
