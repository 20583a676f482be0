//! Numerical toolkit for multipartite quantum state discrimination.
//!
//! States and POVMs live on `C^{d_1} ⊗ ... ⊗ C^{d_K}` with lexicographic
//! basis ordering (party 0 slowest). The crate builds the standard state
//! families, verifies POVM classes (general, projective, PPT, SEP, LOCC₁),
//! restricts POVMs from a padded system back to the original one, and
//! decides PPT distinguishability with a small dense SDP solver.

pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod par;
pub mod povm;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DimVector};
pub use num_complex::Complex64;
