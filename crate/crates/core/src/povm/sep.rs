use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, restrict_matrix, tensor_all, ComplexMatrix, DimVector};

/// One product term: a local operator for every party, in party order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductTerm(pub Vec<ComplexMatrix>);

impl ProductTerm {
    pub fn tensor(&self) -> Option<ComplexMatrix> {
        tensor_all(&self.0)
    }
}

/// Separable decomposition `M_j = sum_i (A^(1)_{ji} ⊗ ... ⊗ A^(K)_{ji})`
/// for every POVM element. An element may have no terms (the zero operator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SepDecomposition(pub Vec<Vec<ProductTerm>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepCheck {
    /// Largest entrywise gap between an element and its decomposition.
    pub reconstruction_residual: f64,
    /// Smallest eigenvalue over every local factor, clamped above at 0.
    pub min_factor_eigenvalue: f64,
    pub max_factor_hermitian_deviation: f64,
}

impl SepCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.reconstruction_residual <= tol
            && self.min_factor_eigenvalue >= -tol
            && self.max_factor_hermitian_deviation <= tol
    }
}

impl SepDecomposition {
    pub fn elements(&self) -> &[Vec<ProductTerm>] {
        &self.0
    }

    fn check_shapes(&self, dims: &DimVector) -> Result<()> {
        for (j, terms) in self.0.iter().enumerate() {
            for term in terms {
                if term.0.len() != dims.parties() {
                    return Err(Error::InvalidPovm(format!(
                        "element {j}: term has {} factors for {} parties",
                        term.0.len(),
                        dims.parties()
                    )));
                }
                for (s, f) in term.0.iter().enumerate() {
                    if !f.is_square() || f.rows() != dims.local(s) {
                        return Err(Error::InvalidPovm(format!(
                            "element {j}: factor for party {s} is {}x{}, expected side {}",
                            f.rows(),
                            f.cols(),
                            dims.local(s)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The operator described by the terms of element `j`.
    pub fn reconstruct(&self, j: usize, dims: &DimVector) -> Result<ComplexMatrix> {
        self.check_shapes(dims)?;
        let terms = self
            .0
            .get(j)
            .ok_or_else(|| Error::InvalidPovm(format!("witness has no element {j}")))?;
        let n = dims.total();
        let mut acc = ComplexMatrix::zeros(n, n);
        for term in terms {
            acc += &term.tensor().expect("at least one party");
        }
        Ok(acc)
    }

    pub fn check(&self, elements: &[ComplexMatrix], dims: &DimVector) -> Result<SepCheck> {
        if self.0.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "witness describes {} elements, POVM has {}",
                self.0.len(),
                elements.len()
            )));
        }
        self.check_shapes(dims)?;
        let mut residual: f64 = 0.0;
        let mut min_eig: f64 = 0.0;
        let mut max_dev: f64 = 0.0;
        for (j, m) in elements.iter().enumerate() {
            residual = residual.max(self.reconstruct(j, dims)?.max_abs_diff(m));
            for term in &self.0[j] {
                for f in &term.0 {
                    max_dev = max_dev.max(f.hermitian_deviation());
                    min_eig = min_eig.min(min_eigenvalue(&f.hermitian_part())?);
                }
            }
        }
        Ok(SepCheck {
            reconstruction_residual: residual,
            min_factor_eigenvalue: min_eig,
            max_factor_hermitian_deviation: max_dev,
        })
    }

    /// Restricts every local factor to the leading `sub_dims[s]` block.
    pub fn restrict(&self, dims: &DimVector, sub_dims: &DimVector) -> Result<SepDecomposition> {
        sub_dims.padding_to(dims)?;
        self.check_shapes(dims)?;
        let local = |s: usize, d: &DimVector| DimVector::single(d.local(s));
        let elements = self
            .0
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|term| {
                        term.0
                            .iter()
                            .enumerate()
                            .map(|(s, f)| restrict_matrix(f, &local(s, dims)?, &local(s, sub_dims)?))
                            .collect::<Result<Vec<_>>>()
                            .map(ProductTerm)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SepDecomposition(elements))
    }
}
