//! Numerical verification path through the logarithmic prepotential: third-derivative
//! matrices, the star product `u * v = sum a(u) a(v) / a(x) a^v`, and the WDVV,
//! associativity and Frobenius residuals.
//!
//! Constant convention: `F_a = sum a(a) / a(x) a (x) a` with coefficient one, which
//! is the third derivative of `F = (1/4) sum a(x)^2 log a(x)^2`. With this choice
//! `F_x = G` exactly.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, VeeError};
use crate::gram::{gram, GramForm};
use crate::linalg;
use crate::system::CovectorSystem;
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Serialize)]
pub struct ThirdDerivativeMatrix {
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(serialize_with = "serialize_matrix")]
    pub m: DMatrix<f64>,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Precomputed data for repeated evaluation on one system.
#[derive(Debug, Clone)]
pub struct Frobenius<'a> {
    pub system: &'a CovectorSystem,
    pub form: GramForm,
    vees: Vec<Vec<f64>>,
    eps_rank: f64,
}

impl<'a> Frobenius<'a> {
    pub fn new(system: &'a CovectorSystem, policy: &TolerancePolicy) -> Result<Self> {
        let form = gram(system, policy.eps_rank)?;
        let vees = system.covectors.iter().map(|c| form.cvee(c)).collect();
        Ok(Self {
            system,
            form,
            vees,
            eps_rank: policy.eps_rank,
        })
    }

    fn check_dims(&self, vs: &[&[f64]]) -> Result<()> {
        for v in vs {
            if v.len() != self.system.dim {
                return Err(VeeError::DimensionMismatch {
                    expected: self.system.dim,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    /// `a(x)` for every covector, failing if any is numerically zero.
    pub fn evaluations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(&[x])?;
        let nx = linalg::norm(x);
        self.system
            .covectors
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let v = c.eval(x);
                if v.abs() < self.eps_rank * c.norm() * nx || v == 0.0 {
                    Err(VeeError::SingularPoint { index: i, value: v })
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    pub fn fa_matrix(&self, x: &[f64], a: &[f64]) -> Result<ThirdDerivativeMatrix> {
        self.check_dims(&[a])?;
        let ev = self.evaluations(x)?;
        let dim = self.system.dim;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, &cx) in self.system.covectors.iter().zip(&ev) {
            let w = c.eval(a) / cx;
            for p in 0..dim {
                for q in p..dim {
                    m[(p, q)] += w * c[p] * c[q];
                }
            }
        }
        for p in 0..dim {
            for q in 0..p {
                m[(p, q)] = m[(q, p)];
            }
        }
        Ok(ThirdDerivativeMatrix {
            a: a.to_vec(),
            x: x.to_vec(),
            m,
        })
    }

    fn product_with(&self, ev: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.system.dim];
        for ((c, vee), &cx) in self.system.covectors.iter().zip(&self.vees).zip(ev) {
            // symmetric in (u, v) bit for bit: multiplication commutes in IEEE arithmetic
            let w = (c.eval(u) * c.eval(v)) / cx;
            linalg::axpy(w, vee, &mut out);
        }
        out
    }

    /// `u * v` at `x`.
    pub fn multiply(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(&[u, v])?;
        let ev = self.evaluations(x)?;
        Ok(self.product_with(&ev, u, v))
    }

    /// Largest normalized commutator `|[G^-1 F_i, G^-1 F_j]|_F / max(1, |G^-1 F_i| |G^-1 F_j|)`
    /// over coordinate directions.
    pub fn wdvv_residual(&self, x: &[f64]) -> Result<f64> {
        let dim = self.system.dim;
        let hats: Vec<DMatrix<f64>> = (0..dim)
            .map(|i| {
                self.fa_matrix(x, &linalg::unit(dim, i))
                    .map(|f| &self.form.g_inv * f.m)
            })
            .collect::<Result<_>>()?;
        let norms: Vec<f64> = hats.iter().map(linalg::frobenius_norm).collect();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in i + 1..dim {
                let comm = &hats[i] * &hats[j] - &hats[j] * &hats[i];
                let r = linalg::frobenius_norm(&comm) / (norms[i] * norms[j]).max(1.0);
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    /// `|(u*v)*w - u*(v*w)| |x|^2 / (|u| |v| |w|)`, invariant under rescaling of the
    /// system and of each argument.
    pub fn associativity_residual(&self, x: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        self.check_dims(&[u, v, w])?;
        let ev = self.evaluations(x)?;
        let uv = self.product_with(&ev, u, v);
        let vw = self.product_with(&ev, v, w);
        let left = self.product_with(&ev, &uv, w);
        let right = self.product_with(&ev, u, &vw);
        let denom = linalg::norm(u) * linalg::norm(v) * linalg::norm(w);
        if denom == 0.0 {
            return Ok(0.0);
        }
        let nx = linalg::norm(x);
        Ok(linalg::norm(&linalg::sub(&left, &right)) * nx * nx / denom)
    }

    /// `|G(u*v, w) - G(u, v*w)| |x| / (|G| |u| |v| |w|)`.
    pub fn frobenius_residual(&self, x: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        self.check_dims(&[u, v, w])?;
        let ev = self.evaluations(x)?;
        let uv = self.product_with(&ev, u, v);
        let vw = self.product_with(&ev, v, w);
        let left = self.form.inner(&uv, w);
        let right = self.form.inner(u, &vw);
        let denom = linalg::norm(u) * linalg::norm(v) * linalg::norm(w);
        if denom == 0.0 {
            return Ok(0.0);
        }
        let g_norm = self.form.eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        Ok((left - right).abs() * linalg::norm(x) / (g_norm * denom))
    }
}

pub fn fa_matrix(system: &CovectorSystem, x: &[f64], a: &[f64], policy: &TolerancePolicy) -> Result<ThirdDerivativeMatrix> {
    // The Gram form is not needed for F_a, but a system that does not span is rejected
    // uniformly by every entry point of this module.
    Frobenius::new(system, policy)?.fa_matrix(x, a)
}

pub fn multiply(system: &CovectorSystem, x: &[f64], u: &[f64], v: &[f64], policy: &TolerancePolicy) -> Result<Vec<f64>> {
    Frobenius::new(system, policy)?.multiply(x, u, v)
}

pub fn wdvv_residual(system: &CovectorSystem, x: &[f64], policy: &TolerancePolicy) -> Result<f64> {
    Frobenius::new(system, policy)?.wdvv_residual(x)
}

pub fn associativity_residual(
    system: &CovectorSystem,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    w: &[f64],
    policy: &TolerancePolicy,
) -> Result<f64> {
    Frobenius::new(system, policy)?.associativity_residual(x, u, v, w)
}

pub fn frobenius_residual(
    system: &CovectorSystem,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    w: &[f64],
    policy: &TolerancePolicy,
) -> Result<f64> {
    Frobenius::new(system, policy)?.frobenius_residual(x, u, v, w)
}

/// Largest WDVV residual over `points` seeded regular points.
pub fn max_wdvv_residual(system: &CovectorSystem, points: usize, policy: &TolerancePolicy) -> Result<f64> {
    let fr = Frobenius::new(system, policy)?;
    let xs = crate::sampling::regular_points(system, policy, points)?;
    xs.iter()
        .map(|x| fr.wdvv_residual(x))
        .try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))
}
