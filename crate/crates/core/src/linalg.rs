//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| x * t).collect()
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

pub fn to_dvector(a: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(a)
}

pub fn to_vec(a: &DVector<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

/// Matrix whose rows are `rows`.
pub fn rows_to_matrix(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j])
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Orthonormal basis of the span of `vectors`, built by pivoted Gram-Schmidt.
///
/// A vector is considered dependent when its residual falls below `eps` times the
/// largest input norm.
pub fn orthonormal_span(vectors: &[Vec<f64>], dim: usize, eps: f64) -> Vec<Vec<f64>> {
    let max_norm = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if max_norm == 0.0 {
        return basis;
    }
    let mut residuals: Vec<Vec<f64>> = vectors.to_vec();
    while basis.len() < dim {
        let (best, best_norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, norm(r)))
            .fold((usize::MAX, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best == usize::MAX || best_norm <= eps * max_norm {
            break;
        }
        let mut q = residuals[best].clone();
        orthogonalize(&mut q, &basis);
        let nq = norm(&q);
        if nq <= eps * max_norm {
            break;
        }
        let q = scale(&q, 1.0 / nq);
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            axpy(-c, &q, r);
        }
        basis.push(q);
    }
    basis
}

/// Greedy Gram-Schmidt on the projections of the standard basis vectors, keeping
/// `target` of them. Ties are broken towards the lower index, which keeps bases
/// aligned with coordinate axes whenever possible.
fn basis_from_projected_standard(projector: &DMatrix<f64>, target: usize) -> Vec<Vec<f64>> {
    let dim = projector.nrows();
    let mut residuals: Vec<Vec<f64>> = (0..dim)
        .map(|i| projector.column(i).iter().copied().collect())
        .collect();
    let mut used = vec![false; dim];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(target);
    while basis.len() < target {
        let norms: Vec<f64> = residuals.iter().map(|r| norm(r)).collect();
        let max = (0..dim)
            .filter(|&i| !used[i])
            .map(|i| norms[i])
            .fold(0.0, f64::max);
        if max == 0.0 {
            break;
        }
        let pick = (0..dim)
            .find(|&i| !used[i] && norms[i] >= max * (1.0 - 1e-9))
            .expect("a maximal residual exists");
        used[pick] = true;
        let mut q = residuals[pick].clone();
        orthogonalize(&mut q, &basis);
        let q = snap_unit(q);
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            axpy(-c, &q, r);
        }
        basis.push(q);
    }
    basis
}

/// Normalizes `q` after clearing entries at rounding-noise level, so that exact
/// coordinate directions come out exact.
fn snap_unit(mut q: Vec<f64>) -> Vec<f64> {
    let n = norm(&q);
    for x in q.iter_mut() {
        if x.abs() < 1e-12 * n {
            *x = 0.0;
        }
    }
    let n = norm(&q);
    scale(&q, 1.0 / n)
}

/// Orthonormal basis of `span(vectors)`, chosen to align with the coordinate axes
/// where the subspace allows it.
pub fn span_basis_from_standard(vectors: &[Vec<f64>], dim: usize, eps: f64) -> Vec<Vec<f64>> {
    let q = orthonormal_span(vectors, dim, eps);
    let k = q.len();
    let mut p = DMatrix::zeros(dim, dim);
    for b in &q {
        let v = to_dvector(b);
        p += &v * v.transpose();
    }
    basis_from_projected_standard(&p, k)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)`.
pub fn complement_basis(vectors: &[Vec<f64>], dim: usize, eps: f64) -> Vec<Vec<f64>> {
    let q = orthonormal_span(vectors, dim, eps);
    let k = q.len();
    let mut p = DMatrix::identity(dim, dim);
    for b in &q {
        let v = to_dvector(b);
        p -= &v * v.transpose();
    }
    basis_from_projected_standard(&p, dim - k)
}

/// Distance from `v` to `span(basis)` for an orthonormal `basis`.
pub fn distance_to_span(v: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut r = v.to_vec();
    orthogonalize(&mut r, basis);
    norm(&r)
}

/// Symmetric eigendecomposition of a (numerically) symmetric matrix.
pub fn sym_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_function(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    v * d * v.transpose()
}

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Orthogonal matrix from the QR factorization of a square matrix, with the sign
/// convention that makes the R diagonal positive.
pub fn orthogonal_from(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}
