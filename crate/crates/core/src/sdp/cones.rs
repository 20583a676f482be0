use crate::error::Result;
use crate::linalg::{hermitian_eigen, partial_transpose_parties, ComplexMatrix, DimVector, HERMITIAN_TOL};

/// Nearest positive semidefinite matrix in Frobenius norm: negative
/// eigenvalues are clipped to zero.
pub fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.ensure_hermitian(HERMITIAN_TOL * m.max_abs().max(1.0))?;
    Ok(clip(m))
}

/// Nearest matrix whose partial transpose over `cut` is positive
/// semidefinite.
pub fn project_ppt(m: &ComplexMatrix, dims: &DimVector, cut: &[usize]) -> Result<ComplexMatrix> {
    m.ensure_hermitian(HERMITIAN_TOL * m.max_abs().max(1.0))?;
    clip_ppt(m, dims, cut)
}

pub(crate) fn clip(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_eigen(m)
        .expect("finite Hermitian iterate")
        .map_spectrum(|x| x.max(0.0))
}

pub(crate) fn clip_ppt(m: &ComplexMatrix, dims: &DimVector, cut: &[usize]) -> Result<ComplexMatrix> {
    let pt = partial_transpose_parties(m, dims, cut)?;
    partial_transpose_parties(&clip(&pt), dims, cut)
}
