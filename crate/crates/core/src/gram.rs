//! The quadratic form `G = sum a (x) a` of a covector system and the dual map
//! `a -> a^v = G^{-1} a`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VeeError};
use crate::linalg;
use crate::system::CovectorSystem;

#[derive(Debug, Clone)]
pub struct GramForm {
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Eigenvalues of `g` in ascending order.
    pub eigenvalues: Vec<f64>,
}

impl GramForm {
    /// Ratio of largest to smallest eigenvalue magnitude.
    pub fn condition_number(&self) -> f64 {
        let max = self.eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let min = self.eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
        max / min
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues[0] > 0.0
    }

    /// `G(u, v)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let gu = &self.g * linalg::to_dvector(u);
        linalg::dot(gu.as_slice(), v)
    }

    /// The vector `a^v` with `G(a^v, w) = a(w)` for all `w`.
    pub fn cvee(&self, alpha: &[f64]) -> Vec<f64> {
        linalg::to_vec(&(&self.g_inv * DVector::from_column_slice(alpha)))
    }
}

/// Entry-wise sum of `a_p a_q` with the terms sorted first, which makes the result
/// independent of the order of the covectors.
fn sorted_outer_sum(rows: &[&[f64]], dim: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim, dim);
    let mut terms = Vec::with_capacity(rows.len());
    for p in 0..dim {
        for q in p..dim {
            terms.clear();
            terms.extend(rows.iter().map(|r| r[p] * r[q]));
            terms.sort_by(f64::total_cmp);
            let s: f64 = terms.iter().sum();
            g[(p, q)] = s;
            g[(q, p)] = s;
        }
    }
    g
}

/// Builds `G` from bare coordinate rows.
pub fn gram_of_rows(rows: &[&[f64]], dim: usize, eps_rank: f64) -> Result<GramForm> {
    let g = sorted_outer_sum(rows, dim);
    let eig = linalg::sym_eigen(&g);
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let max_abs = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let rank = eigenvalues
        .iter()
        .filter(|e| e.abs() > eps_rank * max_abs)
        .count();
    if max_abs == 0.0 || rank < dim {
        return Err(VeeError::DegenerateForm { rank, dim });
    }
    let g_inv = linalg::sym_function(&eig, |l| 1.0 / l);
    Ok(GramForm {
        dim,
        g,
        g_inv,
        eigenvalues,
    })
}

/// `G^A = sum_{a in A} a (x) a`.
pub fn gram(system: &CovectorSystem, eps_rank: f64) -> Result<GramForm> {
    let rows: Vec<&[f64]> = system.covectors.iter().map(|c| c.coords.as_slice()).collect();
    gram_of_rows(&rows, system.dim, eps_rank)
}

/// `a^v = G^{-1} a`.
pub fn cvee(alpha: &[f64], form: &GramForm) -> Result<Vec<f64>> {
    if alpha.len() != form.dim {
        return Err(VeeError::DimensionMismatch {
            expected: form.dim,
            found: alpha.len(),
        });
    }
    Ok(form.cvee(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sys(dim: usize, rows: Vec<Vec<f64>>) -> CovectorSystem {
        CovectorSystem::new("t", dim, rows, BTreeMap::new(), 1e-9).unwrap()
    }

    #[test]
    fn single_covector_in_dim_one() {
        let g = gram(&sys(1, vec![vec![2.0_f64.sqrt()]]), 1e-9).unwrap();
        assert!((g.g[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cvee_on_diagonal_form() {
        let g = gram(&sys(2, vec![vec![2.0_f64.sqrt(), 0.0], vec![0.0, 2.0_f64.sqrt()]]), 1e-9).unwrap();
        let v = cvee(&[2.0, 0.0], &g).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn degenerate_form_is_reported() {
        let err = gram(&sys(2, vec![vec![1.0, 0.0]]), 1e-9).unwrap_err();
        assert_eq!(err, VeeError::DegenerateForm { rank: 1, dim: 2 });
    }

    #[test]
    fn gram_times_inverse_is_identity() {
        let g = gram(
            &sys(3, vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]),
            1e-9,
        )
        .unwrap();
        let id = &g.g * &g.g_inv;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-12);
    }
}
