//! Hermitian eigendecomposition and singular values by cyclic Jacobi
//! rotations.
//!
//! Jacobi is slow for large matrices but every matrix in this crate is at
//! most a few hundred on a side, and the method delivers eigenvectors that
//! are unitary to working precision, which the positivity and projection
//! code relies on.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Input must be Hermitian to within this (scaled by the largest entry).
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Lambda) V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }
}

fn hermitian_scale(m: &ComplexMatrix) -> f64 {
    m.max_abs().max(1.0)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before rotating, so deviations below
/// [`HERMITIAN_TOL`] are absorbed rather than propagated.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * hermitian_scale(m) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(jacobi_eigen(m.hermitian_part()))
}

/// 2x2 unitary that zeroes the `(p, q)` entry of a Hermitian pivot block
/// `[[app, apq], [conj(apq), aqq]]`; returned as `(j_pp, j_pq, j_qp, j_qq)`.
fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let abs = apq.norm();
    let phase = apq / abs;
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau.is_finite() {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let pc = phase.conj();
    (Complex64::new(c, 0.0), Complex64::new(s, 0.0), -pc * s, pc * c)
}

fn jacobi_eigen(mut a: ComplexMatrix) -> HermitianEigen {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let total: f64 = a.as_slice().iter().map(|z| z.norm_sqr()).sum();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let (jpp, jpq, jqp, jqq) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                {
                    let data = a.as_mut_slice();
                    for k in 0..n {
                        let akp = data[k * n + p];
                        let akq = data[k * n + q];
                        data[k * n + p] = akp * jpp + akq * jqp;
                        data[k * n + q] = akp * jpq + akq * jqq;
                    }
                    for k in 0..n {
                        let apk = data[p * n + k];
                        let aqk = data[q * n + k];
                        data[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                        data[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                    }
                    data[p * n + q] = ZERO;
                    data[q * n + p] = ZERO;
                    data[p * n + p].im = 0.0;
                    data[q * n + q].im = 0.0;
                }
                let vd = v.as_mut_slice();
                for k in 0..n {
                    let vkp = vd[k * n + p];
                    let vkq = vd[k * n + q];
                    vd[k * n + p] = vkp * jpp + vkq * jqp;
                    vd[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min())
}

/// Positive semidefinite to within `tol`: minimum eigenvalue `>= -tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let deviation = m.hermitian_deviation();
    if deviation > tol.max(HERMITIAN_TOL) * hermitian_scale(m) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(jacobi_eigen(m.hermitian_part()).min() >= -tol)
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // orthogonalize the shorter dimension's worth of columns
    let g = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let cols = g.cols();
    let mut columns: Vec<Vec<Complex64>> = (0..cols).map(|j| g.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = columns[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = columns[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = columns[p].iter().zip(&columns[q]).map(|(a, b)| a.conj() * b).sum();
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let (jpp, jpq, jqp, jqq) = jacobi_rotation(alpha, beta, gamma);
                let (lo, hi) = columns.split_at_mut(q);
                for (cp, cq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (gp, gq) = (*cp, *cq);
                    *cp = gp * jpp + gq * jqp;
                    *cq = gp * jpq + gq * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
