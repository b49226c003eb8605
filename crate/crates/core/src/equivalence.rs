//! Equivalence of systems up to invertible linear maps.
//!
//! Both systems are brought to unit Gram form, after which an equivalence is an
//! orthogonal map sending every covector to plus or minus a covector of the other
//! system. Unit Gram form also fixes the overall scale, so equivalence is up to scale.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, VeeError};
use crate::gram::gram;
use crate::linalg;
use crate::system::CovectorSystem;
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    /// Orthogonal map between the unit-Gram normalizations.
    #[serde(serialize_with = "rows")]
    pub map: DMatrix<f64>,
    /// Map between the original coordinates: `T a = +- b` for paired covectors.
    #[serde(serialize_with = "rows")]
    pub raw_map: DMatrix<f64>,
    /// `pairing[i] = (j, s)`: source covector `i` goes to `s` times target covector `j`.
    pub pairing: Vec<(usize, i8)>,
    pub max_error: f64,
}

fn rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        seq.serialize_element(&m.row(i).iter().copied().collect::<Vec<_>>())?;
    }
    seq.end()
}

/// `G^{-1/2}` and `G^{1/2}` of a system, or `IndefiniteForm` if `G` is not positive
/// definite.
fn gram_roots(a: &CovectorSystem, policy: &TolerancePolicy) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let form = gram(a, policy.eps_rank).map_err(|e| match e {
        VeeError::DegenerateForm { .. } => VeeError::IndefiniteForm { min_eigenvalue: 0.0 },
        other => other,
    })?;
    if form.min_eigenvalue() <= 0.0 {
        return Err(VeeError::IndefiniteForm {
            min_eigenvalue: form.min_eigenvalue(),
        });
    }
    let eig = linalg::sym_eigen(&form.g);
    Ok((linalg::sym_function(&eig, |l| 1.0 / l.sqrt()), linalg::sym_function(&eig, f64::sqrt)))
}

/// The system `G^{-1/2} a`, whose Gram form is the identity.
pub fn normalize_to_unit_gram(a: &CovectorSystem, policy: &TolerancePolicy) -> Result<CovectorSystem> {
    let (inv_root, _) = gram_roots(a, policy)?;
    a.map_linear(a.name.clone(), &inv_root)
}

/// Searches for a signed orthogonal matching between the normalizations of `a1`
/// and `a2`.
pub fn equivalent(a1: &CovectorSystem, a2: &CovectorSystem, policy: &TolerancePolicy) -> Result<Option<Certificate>> {
    let (r1, _) = gram_roots(a1, policy)?;
    let (r2, root2) = gram_roots(a2, policy)?;
    if a1.dim != a2.dim || a1.len() != a2.len() {
        return Ok(None);
    }
    let tol = 10.0 * policy.eps_rank;
    let u = normalized_rows(a1, &r1);
    let w = normalized_rows(a2, &r2);
    let Some(q) = Matcher::new(&u, &w, a1.dim, tol).search() else {
        return Ok(None);
    };
    let Some((pairing, max_error)) = verify(&q, &u, &w, tol) else {
        return Ok(None);
    };
    let raw_map = &root2 * &q * &r1;
    Ok(Some(Certificate {
        map: q,
        raw_map,
        pairing,
        max_error,
    }))
}

/// Convenience predicate over [`equivalent`].
pub fn are_equivalent(a1: &CovectorSystem, a2: &CovectorSystem, policy: &TolerancePolicy) -> Result<bool> {
    Ok(equivalent(a1, a2, policy)?.is_some())
}

fn normalized_rows(a: &CovectorSystem, inv_root: &DMatrix<f64>) -> Vec<Vec<f64>> {
    a.covectors
        .iter()
        .map(|c| linalg::to_vec(&(inv_root * linalg::to_dvector(c))))
        .collect()
}

/// Checks that `q` is orthogonal and maps every source row onto a distinct target
/// row up to sign; returns the pairing and the largest deviation.
fn verify(q: &DMatrix<f64>, u: &[Vec<f64>], w: &[Vec<f64>], tol: f64) -> Option<(Vec<(usize, i8)>, f64)> {
    let d = q.nrows();
    let mut max_error = (q.transpose() * q - DMatrix::identity(d, d)).amax();
    if max_error > tol {
        return None;
    }
    let mut used = vec![false; w.len()];
    let mut pairing = Vec::with_capacity(u.len());
    for ui in u {
        let img = linalg::to_vec(&(q * linalg::to_dvector(ui)));
        let mut best: Option<(usize, i8, f64)> = None;
        for (j, wj) in w.iter().enumerate() {
            if used[j] {
                continue;
            }
            for s in [1i8, -1] {
                let err = img
                    .iter()
                    .zip(wj)
                    .map(|(a, b)| (a - f64::from(s) * b).abs())
                    .fold(0.0, f64::max);
                if best.is_none_or(|(_, _, e)| err < e) {
                    best = Some((j, s, err));
                }
            }
        }
        let (j, s, err) = best?;
        if err > tol {
            return None;
        }
        used[j] = true;
        max_error = max_error.max(err);
        pairing.push((j, s));
    }
    Some((pairing, max_error))
}

struct Matcher<'a> {
    u: &'a [Vec<f64>],
    w: &'a [Vec<f64>],
    dim: usize,
    tol: f64,
    /// Source indices forming a basis, in search order.
    order: Vec<usize>,
    /// Target candidates for each source index.
    candidates: Vec<Vec<usize>>,
}

fn gram_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| rows.iter().map(|b| linalg::dot(a, b)).collect())
        .collect()
}

fn signature(row: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = row.iter().map(|x| x.abs()).collect();
    s.sort_by(f64::total_cmp);
    s
}

impl<'a> Matcher<'a> {
    fn new(u: &'a [Vec<f64>], w: &'a [Vec<f64>], dim: usize, tol: f64) -> Self {
        let gu = gram_matrix(u);
        let gw = gram_matrix(w);
        let su: Vec<Vec<f64>> = gu.iter().map(|r| signature(r)).collect();
        let sw: Vec<Vec<f64>> = gw.iter().map(|r| signature(r)).collect();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
        let candidates: Vec<Vec<usize>> = (0..u.len())
            .map(|i| (0..w.len()).filter(|&j| close(&su[i], &sw[j])).collect())
            .collect();

        // most constrained first, each new row independent of the chosen ones and,
        // among those, with the most nonzero inner products against them
        let mut order: Vec<usize> = Vec::with_capacity(dim);
        let mut chosen_rows: Vec<Vec<f64>> = Vec::new();
        while order.len() < dim {
            let basis = linalg::orthonormal_span(&chosen_rows, dim, 1e-8);
            let next = (0..u.len())
                .filter(|i| !order.contains(i))
                .filter(|&i| linalg::distance_to_span(&u[i], &basis) > 1e-6 * linalg::norm(&u[i]))
                .min_by_key(|&i| {
                    let links = order.iter().filter(|&&k| gu[i][k].abs() > tol).count();
                    (candidates[i].len(), usize::MAX - links, i)
                });
            match next {
                Some(i) => {
                    order.push(i);
                    chosen_rows.push(u[i].clone());
                }
                None => break,
            }
        }
        Self {
            u,
            w,
            dim,
            tol,
            order,
            candidates,
        }
    }

    fn search(&self) -> Option<DMatrix<f64>> {
        if self.order.len() < self.dim || self.candidates.iter().any(Vec::is_empty) {
            return None;
        }
        let mut assign: Vec<(usize, f64)> = Vec::with_capacity(self.dim);
        self.extend(&mut assign)
    }

    fn extend(&self, assign: &mut Vec<(usize, f64)>) -> Option<DMatrix<f64>> {
        let depth = assign.len();
        if depth == self.dim {
            return self.reconstruct(assign);
        }
        let i = self.order[depth];
        for &j in &self.candidates[i] {
            if assign.iter().any(|&(t, _)| t == j) {
                continue;
            }
            // a global sign flip is always available, so the first image keeps its sign
            let signs: &[f64] = if depth == 0 { &[1.0] } else { &[1.0, -1.0] };
            for &s in signs {
                let consistent = assign.iter().enumerate().all(|(k, &(t, sk))| {
                    let src = linalg::dot(&self.u[i], &self.u[self.order[k]]);
                    let dst = s * sk * linalg::dot(&self.w[j], &self.w[t]);
                    (src - dst).abs() <= self.tol
                });
                if !consistent {
                    continue;
                }
                assign.push((j, s));
                if let Some(q) = self.extend(assign) {
                    return Some(q);
                }
                assign.pop();
            }
        }
        None
    }

    /// `Q = W U^{-1}` from the basis assignment, accepted only if it passes the
    /// global check.
    fn reconstruct(&self, assign: &[(usize, f64)]) -> Option<DMatrix<f64>> {
        let d = self.dim;
        let src = DMatrix::from_fn(d, d, |r, c| self.u[self.order[c]][r]);
        let dst = DMatrix::from_fn(d, d, |r, c| assign[c].1 * self.w[assign[c].0][r]);
        let q = dst * src.try_inverse()?;
        verify(&q, self.u, self.w, self.tol).map(|_| q)
    }
}
