//! Multipartite index operations on dense matrices.

use num_complex::Complex64;

use super::dims::DimVector;
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

fn check_square_dims(m: &ComplexMatrix, dims: &DimVector) -> Result<()> {
    if !m.is_square() || m.rows() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not match dims {dims} (side {})",
            m.rows(),
            m.cols(),
            dims.total()
        )));
    }
    Ok(())
}

/// Kronecker product; the left factor indexes the slower-varying party.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    let cols = ac * bc;
    let data = out.as_mut_slice();
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                let row = (i * br + k) * cols + j * bc;
                for l in 0..bc {
                    data[row + l] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Tensor product of local factors in party order.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut it = factors.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, f| tensor(&acc, f)))
}

pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Transposes the local indices of every party in `parties`.
pub fn partial_transpose_parties(m: &ComplexMatrix, dims: &DimVector, parties: &[usize]) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    for &p in parties {
        dims.check_party(p)?;
    }
    let n = dims.total();
    let strides = dims.strides();
    let mut out = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let rm = dims.multi_index(row);
        for col in 0..n {
            let cm = dims.multi_index(col);
            let (mut r2, mut c2) = (row, col);
            for &p in parties {
                // swap the p-th digit between row and column
                let delta = (cm[p] as isize - rm[p] as isize) * strides[p] as isize;
                r2 = (r2 as isize + delta) as usize;
                c2 = (c2 as isize - delta) as usize;
            }
            out[(r2, c2)] = m[(row, col)];
        }
    }
    Ok(out)
}

pub fn partial_transpose(m: &ComplexMatrix, dims: &DimVector, party: usize) -> Result<ComplexMatrix> {
    partial_transpose_parties(m, dims, &[party])
}

/// Traces out a single party.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimVector, party: usize) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    dims.check_party(party)?;
    let mut rest: Vec<usize> = dims.as_slice().to_vec();
    let traced = rest.remove(party);
    let rest_total: usize = rest.iter().product();
    let stride = dims.strides()[party];
    // flat = high * (traced * stride) + digit * stride + low
    let mut out = ComplexMatrix::zeros(rest_total, rest_total);
    let to_full = |r: usize, digit: usize| -> usize {
        let high = r / stride;
        let low = r % stride;
        high * traced * stride + digit * stride + low
    };
    for i in 0..rest_total {
        for j in 0..rest_total {
            let mut acc = ZERO;
            for t in 0..traced {
                acc += m[(to_full(i, t), to_full(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Zero-padding embedding into `new_dims`: every in-range multi-index keeps
/// its entry, all other entries are zero.
///
/// With lexicographic ordering this is a scatter onto a sub-lattice, not a
/// leading principal block, whenever more than one party is padded.
pub fn embed_matrix(m: &ComplexMatrix, dims: &DimVector, new_dims: &DimVector) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    let map = dims.embedding_map(new_dims)?;
    let big = new_dims.total();
    let mut out = ComplexMatrix::zeros(big, big);
    for (i, &bi) in map.iter().enumerate() {
        for (j, &bj) in map.iter().enumerate() {
            out[(bi, bj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Block restriction: keeps the rows and columns whose multi-indices lie in
/// `sub_dims`. Adjoint (and left inverse) of [`embed_matrix`].
pub fn restrict_matrix(m: &ComplexMatrix, dims: &DimVector, sub_dims: &DimVector) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    let map = sub_dims.embedding_map(dims)?;
    let n = map.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

pub fn embed_vector(v: &[Complex64], dims: &DimVector, new_dims: &DimVector) -> Result<Vec<Complex64>> {
    if v.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for dims {dims}",
            v.len()
        )));
    }
    let map = dims.embedding_map(new_dims)?;
    let mut out = vec![ZERO; new_dims.total()];
    for (i, &bi) in map.iter().enumerate() {
        out[bi] = v[i];
    }
    Ok(out)
}

/// Reorders the amplitudes of a pure state into a `d_A x d_B` matrix for the
/// bipartition `side_a | rest`.
pub fn bipartite_reshape(v: &[Complex64], dims: &DimVector, side_a: &[usize]) -> Result<ComplexMatrix> {
    if v.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for dims {dims}",
            v.len()
        )));
    }
    for &p in side_a {
        dims.check_party(p)?;
    }
    let side_b: Vec<usize> = (0..dims.parties()).filter(|p| !side_a.contains(p)).collect();
    let da: usize = side_a.iter().map(|&p| dims.local(p)).product();
    let db: usize = side_b.iter().map(|&p| dims.local(p)).product();
    let mut out = ComplexMatrix::zeros(da, db);
    for (flat, &amp) in v.iter().enumerate() {
        let multi = dims.multi_index(flat);
        let ia = side_a.iter().fold(0, |acc, &p| acc * dims.local(p) + multi[p]);
        let ib = side_b.iter().fold(0, |acc, &p| acc * dims.local(p) + multi[p]);
        out[(ia, ib)] = amp;
    }
    Ok(out)
}
