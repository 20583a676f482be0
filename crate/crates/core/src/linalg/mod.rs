//! Dense complex linear algebra and the multipartite index operations the
//! rest of the crate is built on.

pub mod dims;
pub mod eigen;
pub mod matrix;
pub mod ops;

pub use dims::DimVector;
pub use eigen::{hermitian_eigen, is_psd, min_eigenvalue, singular_values, HermitianEigen, HERMITIAN_TOL};
pub use matrix::{sum_matrices, ComplexMatrix};
pub use ops::{
    embed_matrix, embed_vector, partial_trace, partial_transpose, partial_transpose_parties, restrict_matrix, tensor,
    tensor_all,
};
