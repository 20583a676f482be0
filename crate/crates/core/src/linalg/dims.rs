use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local dimensions `(d_1, ..., d_K)` of a multipartite system.
///
/// Flat indices follow lexicographic order with party 0 varying slowest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DimVector(Vec<usize>);

impl TryFrom<Vec<usize>> for DimVector {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        DimVector::new(v)
    }
}

impl From<DimVector> for Vec<usize> {
    fn from(d: DimVector) -> Self {
        d.0
    }
}

impl DimVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("at least one party required".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDims(format!("zero local dimension in {dims:?}")));
        }
        Ok(Self(dims))
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn local(&self, party: usize) -> usize {
        self.0[party]
    }

    /// Total Hilbert-space dimension.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Every `d_k >= 2` with at least two parties.
    pub fn is_nontrivial(&self) -> bool {
        self.parties() >= 2 && self.0.iter().all(|&d| d >= 2)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.0.len());
        multi.iter().zip(&self.0).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = flat % self.0[k];
            flat /= self.0[k];
        }
        out
    }

    pub fn check_party(&self, party: usize) -> Result<()> {
        if party < self.parties() {
            Ok(())
        } else {
            Err(Error::InvalidPartition(format!(
                "party {party} out of range for {} parties",
                self.parties()
            )))
        }
    }

    /// Componentwise `self <= other` with the same number of parties.
    pub fn fits_within(&self, other: &DimVector) -> bool {
        self.parties() == other.parties() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Per-party padding `h_k` such that `self + h = larger`.
    pub fn padding_to(&self, larger: &DimVector) -> Result<Vec<usize>> {
        if self.parties() != larger.parties() {
            return Err(Error::DimensionMismatch(format!(
                "party count {} vs {}",
                self.parties(),
                larger.parties()
            )));
        }
        if !self.fits_within(larger) {
            return Err(Error::DimensionMismatch(format!("{self} does not fit within {larger}")));
        }
        Ok(self.0.iter().zip(&larger.0).map(|(a, b)| b - a).collect())
    }

    /// Flat indices in `larger` of every multi-index of `self`, in order.
    ///
    /// This is the index map behind both the zero-padding embedding and the
    /// block restriction.
    pub fn embedding_map(&self, larger: &DimVector) -> Result<Vec<usize>> {
        self.padding_to(larger)?;
        Ok((0..self.total())
            .map(|flat| larger.flat_index(&self.multi_index(flat)))
            .collect())
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for DimVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidDims(format!("cannot parse {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        DimVector::new(dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_multi_are_inverse() {
        let d = DimVector::new(vec![3, 2, 4]).unwrap();
        for flat in 0..d.total() {
            assert_eq!(d.flat_index(&d.multi_index(flat)), flat);
        }
        assert_eq!(d.strides(), vec![8, 4, 1]);
        assert_eq!(d.multi_index(9), vec![1, 0, 1]);
    }

    #[test]
    fn embedding_map_scatters_onto_sublattice() {
        let small = DimVector::new(vec![2, 2]).unwrap();
        let big = DimVector::new(vec![3, 3]).unwrap();
        assert_eq!(small.embedding_map(&big).unwrap(), vec![0, 1, 3, 4]);
        assert!(big.embedding_map(&small).is_err());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(DimVector::new(vec![]).is_err());
        assert!(DimVector::new(vec![2, 0]).is_err());
        assert!(!DimVector::new(vec![2]).unwrap().is_nontrivial());
        assert!(DimVector::new(vec![2, 3]).unwrap().is_nontrivial());
    }

    #[test]
    fn parses_comma_list() {
        let d: DimVector = "3, 3".parse().unwrap();
        assert_eq!(d.as_slice(), &[3, 3]);
        assert!("3,x".parse::<DimVector>().is_err());
    }
}
