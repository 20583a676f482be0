//! POVM representation and verification for every measurement class:
//! general, projective, PPT, separable (witness-based) and one-round LOCC
//! (tree-based), plus the block restriction of a POVM to a smaller system.

mod fixtures;
pub mod locc1;
pub mod random;
pub mod sep;

use serde::{Deserialize, Serialize};

pub use fixtures::{counterexample_c4, counterexample_c4_product};
pub use locc1::{flatten_locc1, flatten_locc1_with_tol, restrict_locc1, Locc1Node, Locc1Outcome, Locc1Tree};
pub use random::{random_locc1, random_orthonormal_states, random_povm, random_ppt_povm, random_sep_povm};
pub use sep::{ProductTerm, SepCheck, SepDecomposition};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, partial_transpose_parties, restrict_matrix, sum_matrices, ComplexMatrix, DimVector,
};
use crate::par;

/// Default tolerance for positivity and completeness checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PovmKind {
    #[default]
    General,
    Projective,
    Ppt,
    Sep,
    Locc1,
}

impl PovmKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PovmKind::General => "general",
            PovmKind::Projective => "projective",
            PovmKind::Ppt => "ppt",
            PovmKind::Sep => "sep",
            PovmKind::Locc1 => "locc1",
        }
    }
}

impl std::fmt::Display for PovmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PovmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "general" | "global" => PovmKind::General,
            "projective" => PovmKind::Projective,
            "ppt" => PovmKind::Ppt,
            "sep" => PovmKind::Sep,
            "locc1" => PovmKind::Locc1,
            other => return Err(Error::InvalidArgument(format!("unknown POVM kind {other:?}"))),
        })
    }
}

/// Structural evidence for the SEP and LOCC₁ classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Sep(SepDecomposition),
    Locc1(Locc1Tree),
}

/// Which bipartitions a partial transpose is taken over. Each cut lists the
/// parties whose indices are transposed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cuts {
    /// Every single party against the rest.
    #[default]
    AllOneVsRest,
    Explicit(Vec<Vec<usize>>),
}

impl Cuts {
    pub fn resolve(&self, dims: &DimVector) -> Result<Vec<Vec<usize>>> {
        let k = dims.parties();
        let cuts = match self {
            Cuts::AllOneVsRest => (0..k).map(|p| vec![p]).collect(),
            Cuts::Explicit(c) => c.clone(),
        };
        if cuts.is_empty() {
            return Err(Error::InvalidPartition("no cut given".into()));
        }
        for cut in &cuts {
            let mut sorted = cut.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cut.len() || sorted.iter().any(|&p| p >= k) {
                return Err(Error::InvalidPartition(format!("cut {cut:?} for {k} parties")));
            }
            if cut.is_empty() || cut.len() >= k {
                return Err(Error::InvalidPartition(format!(
                    "cut {cut:?} is not a proper bipartition of {k} parties"
                )));
            }
        }
        Ok(cuts)
    }

    /// Like [`Cuts::resolve`] but drops a cut whose complement is already
    /// present: transposing the complement gives the full transpose of the
    /// same operator, which has the same spectrum.
    pub fn resolve_distinct(&self, dims: &DimVector) -> Result<Vec<Vec<usize>>> {
        let k = dims.parties();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for cut in self.resolve(dims)? {
            let mut sorted = cut.clone();
            sorted.sort_unstable();
            let complement: Vec<usize> = (0..k).filter(|p| !sorted.contains(p)).collect();
            if !out.iter().any(|c| *c == sorted || *c == complement) {
                out.push(sorted);
            }
        }
        Ok(out)
    }
}

/// A finite family of operators on `dims`, tagged with a claimed kind.
///
/// Construction only checks shapes; use [`verify_povm`] and
/// [`verify_kind`] for positivity, completeness and class membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    dims: DimVector,
    elements: Vec<ComplexMatrix>,
    kind: PovmKind,
    witness: Option<Witness>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmRepr {
    dims: DimVector,
    elements: Vec<ComplexMatrix>,
    #[serde(default)]
    kind: PovmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;

    fn try_from(r: PovmRepr) -> Result<Self> {
        let mut p = Povm::new(r.dims, r.elements)?.with_kind(r.kind);
        p.witness = r.witness;
        Ok(p)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        PovmRepr {
            dims: p.dims,
            elements: p.elements,
            kind: p.kind,
            witness: p.witness,
        }
    }
}

impl Povm {
    pub fn new(dims: DimVector, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("a POVM needs at least one element".into()));
        }
        let n = dims.total();
        if let Some((j, m)) = elements
            .iter()
            .enumerate()
            .find(|(_, m)| !m.is_square() || m.rows() != n)
        {
            return Err(Error::DimensionMismatch(format!(
                "element {j} is {}x{}, dims {dims} need side {n}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self {
            dims,
            elements,
            kind: PovmKind::General,
            witness: None,
        })
    }

    pub fn with_kind(mut self, kind: PovmKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn kind(&self) -> PovmKind {
        self.kind
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    /// The separable decomposition carried by the witness (induced from the
    /// tree for LOCC₁ witnesses).
    pub fn sep_decomposition(&self) -> Option<SepDecomposition> {
        match &self.witness {
            Some(Witness::Sep(s)) => Some(s.clone()),
            Some(Witness::Locc1(t)) => Some(t.sep_decomposition()),
            None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmReport {
    /// Largest entrywise `|sum_j M_j - I|`.
    pub completeness_residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub max_hermitian_deviation: f64,
    pub tol: f64,
    pub passes: bool,
}

/// Checks completeness and positivity of every element.
pub fn verify_povm(p: &Povm, tol: f64) -> Result<PovmReport> {
    let n = p.dims.total();
    if p.elements.iter().any(|m| !m.is_square() || m.rows() != n) {
        return Err(Error::DimensionMismatch("POVM elements differ in size".into()));
    }
    let sum = sum_matrices(p.elements.iter()).expect("non-empty");
    let completeness_residual = sum.max_abs_diff(&ComplexMatrix::identity(n));
    let max_hermitian_deviation = p
        .elements
        .iter()
        .map(ComplexMatrix::hermitian_deviation)
        .fold(0.0, f64::max);
    let min_eigenvalues = par::map(&p.elements, |m| hermitian_eigen(&m.hermitian_part()).map(|e| e.min()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let passes =
        completeness_residual <= tol && max_hermitian_deviation <= tol && min_eigenvalues.iter().all(|&e| e >= -tol);
    Ok(PovmReport {
        completeness_residual,
        min_eigenvalues,
        max_hermitian_deviation,
        tol,
        passes,
    })
}

fn require_valid(p: &Povm, tol: f64) -> Result<()> {
    let report = verify_povm(p, tol)?;
    if report.passes {
        Ok(())
    } else {
        Err(Error::InvalidPovm(format!(
            "completeness residual {:.3e}, min eigenvalue {:.3e}",
            report.completeness_residual,
            report.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        )))
    }
}

/// Largest entrywise violation of `M_j^2 = M_j` and `M_j M_k = 0`.
pub fn projectivity_residual(p: &Povm) -> f64 {
    let m = &p.elements;
    let pairs: Vec<(usize, usize)> = (0..m.len()).flat_map(|j| (j..m.len()).map(move |k| (j, k))).collect();
    par::map(&pairs, |&(j, k)| {
        let prod = m[j].matmul(&m[k]);
        if j == k {
            prod.max_abs_diff(&m[j])
        } else {
            prod.max_abs()
        }
    })
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn is_projective(p: &Povm, tol: f64) -> Result<bool> {
    require_valid(p, tol)?;
    Ok(projectivity_residual(p) <= tol)
}

/// Smallest eigenvalue of each element's partial transpose, per cut.
/// Indexed `[cut][element]`.
pub fn ppt_min_eigenvalues(p: &Povm, cuts: &Cuts) -> Result<Vec<Vec<f64>>> {
    let cuts = cuts.resolve(&p.dims)?;
    cuts.iter()
        .map(|cut| {
            par::map(&p.elements, |m| {
                let pt = partial_transpose_parties(&m.hermitian_part(), &p.dims, cut)?;
                Ok(hermitian_eigen(&pt)?.min())
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Every element stays positive after the partial transpose over each cut.
pub fn is_ppt_povm(p: &Povm, cuts: &Cuts, tol: f64) -> Result<bool> {
    require_valid(p, tol)?;
    Ok(ppt_min_eigenvalues(p, cuts)?.iter().flatten().all(|&e| e >= -tol))
}

/// Checks the carried separable decomposition. Deciding separability
/// without a witness is not attempted.
pub fn verify_sep(p: &Povm, tol: f64) -> Result<bool> {
    let sep = p.sep_decomposition().ok_or(Error::MissingWitness)?;
    Ok(sep.check(&p.elements, &p.dims)?.passes(tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindReport {
    pub kind: PovmKind,
    pub povm: PovmReport,
    pub kind_holds: bool,
    pub detail: String,
}

impl KindReport {
    pub fn passes(&self) -> bool {
        self.povm.passes && self.kind_holds
    }
}

/// Verifies that `p` is a POVM of class `kind` at tolerance `tol`.
pub fn verify_kind(p: &Povm, kind: PovmKind, tol: f64) -> Result<KindReport> {
    let povm = verify_povm(p, tol)?;
    let (kind_holds, detail) = if !povm.passes {
        (false, "not a valid POVM".to_string())
    } else {
        match kind {
            PovmKind::General => (true, "valid POVM".to_string()),
            PovmKind::Projective => {
                let r = projectivity_residual(p);
                (r <= tol, format!("projectivity residual {r:.3e}"))
            }
            PovmKind::Ppt => {
                if p.dims.parties() < 2 {
                    return Err(Error::InvalidPartition("PPT needs at least two parties".into()));
                }
                let min = ppt_min_eigenvalues(p, &Cuts::AllOneVsRest)?
                    .iter()
                    .flatten()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                (min >= -tol, format!("min partial-transpose eigenvalue {min:.3e}"))
            }
            PovmKind::Sep => match p.sep_decomposition() {
                None => (false, "no separability witness".to_string()),
                Some(sep) => {
                    let c = sep.check(&p.elements, &p.dims)?;
                    (
                        c.passes(tol),
                        format!(
                            "witness residual {:.3e}, min factor eigenvalue {:.3e}",
                            c.reconstruction_residual, c.min_factor_eigenvalue
                        ),
                    )
                }
            },
            PovmKind::Locc1 => match &p.witness {
                Some(Witness::Locc1(tree)) => locc1_matches(p, tree, tol)?,
                _ => (false, "no LOCC1 tree witness".to_string()),
            },
        }
    };
    Ok(KindReport {
        kind,
        povm,
        kind_holds,
        detail,
    })
}

fn locc1_matches(p: &Povm, tree: &Locc1Tree, tol: f64) -> Result<(bool, String)> {
    if tree.dims() != &p.dims {
        return Ok((
            false,
            format!("tree dims {} differ from POVM dims {}", tree.dims(), p.dims),
        ));
    }
    let flat = match flatten_locc1_with_tol(tree, tol) {
        Ok(f) => f,
        Err(Error::InvalidTree(msg)) => return Ok((false, msg)),
        Err(e) => return Err(e),
    };
    if flat.len() != p.len() {
        return Ok((
            false,
            format!("tree has {} leaves, POVM has {} elements", flat.len(), p.len()),
        ));
    }
    let r = flat
        .elements
        .iter()
        .zip(&p.elements)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    Ok((r <= tol, format!("tree reconstruction residual {r:.3e}")))
}

/// Keeps the block of every element supported on the in-range local
/// indices of `sub_dims`. Element count and order are preserved; SEP and
/// LOCC₁ witnesses are restricted factor by factor. Projectivity is not
/// preserved by restriction, so a projective tag becomes general.
pub fn restrict_povm(p: &Povm, sub_dims: &DimVector) -> Result<Povm> {
    sub_dims.padding_to(&p.dims)?;
    let elements = par::map(&p.elements, |m| restrict_matrix(m, &p.dims, sub_dims))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let witness = match &p.witness {
        Some(Witness::Sep(s)) => Some(Witness::Sep(s.restrict(&p.dims, sub_dims)?)),
        Some(Witness::Locc1(t)) => Some(Witness::Locc1(t.restrict(sub_dims)?)),
        None => None,
    };
    let kind = match p.kind {
        PovmKind::Projective => PovmKind::General,
        k => k,
    };
    Ok(Povm {
        dims: sub_dims.clone(),
        elements,
        kind,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::bell_states;

    fn dims(d: &[usize]) -> DimVector {
        DimVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn identity_povm_passes() {
        let p = Povm::new(dims(&[2, 2]), vec![ComplexMatrix::identity(4)]).unwrap();
        assert!(verify_povm(&p, 1e-12).unwrap().passes);
        assert!(is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-9).unwrap());
    }

    #[test]
    fn overcomplete_fails_with_residual() {
        let e = ComplexMatrix::identity(2).scale(0.6);
        let p = Povm::new(dims(&[2]), vec![e.clone(), e]).unwrap();
        let r = verify_povm(&p, 1e-9).unwrap();
        assert!(!r.passes);
        assert!((r.completeness_residual - 0.2).abs() < 1e-12);
        assert!(matches!(is_projective(&p, 1e-9), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn element_size_mismatch() {
        assert!(Povm::new(dims(&[2, 2]), vec![ComplexMatrix::identity(3)]).is_err());
        assert!(Povm::new(dims(&[2, 2]), vec![]).is_err());
    }

    #[test]
    fn computational_basis_is_projective() {
        let els = (0..3)
            .map(|k| {
                let mut v = vec![0.0; 3];
                v[k] = 1.0;
                ComplexMatrix::from_diag(&v)
            })
            .collect();
        let p = Povm::new(dims(&[3]), els).unwrap();
        assert!(is_projective(&p, 1e-12).unwrap());
    }

    #[test]
    fn entangled_projector_is_not_ppt() {
        let phi = bell_states().get(0).unwrap().rho().clone();
        let rest = &ComplexMatrix::identity(4) - &phi;
        let p = Povm::new(dims(&[2, 2]), vec![phi, rest]).unwrap();
        assert!(!is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-9).unwrap());
        let eigs = ppt_min_eigenvalues(&p, &Cuts::Explicit(vec![vec![0]])).unwrap();
        assert!((eigs[0][0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn trivial_partitions_rejected() {
        let p = Povm::new(dims(&[2, 2]), vec![ComplexMatrix::identity(4)]).unwrap();
        for bad in [vec![], vec![0, 1], vec![2], vec![0, 0]] {
            assert!(is_ppt_povm(&p, &Cuts::Explicit(vec![bad]), 1e-9).is_err());
        }
        let single = Povm::new(dims(&[4]), vec![ComplexMatrix::identity(4)]).unwrap();
        assert!(is_ppt_povm(&single, &Cuts::AllOneVsRest, 1e-9).is_err());
    }

    #[test]
    fn distinct_cuts_drop_complements() {
        assert_eq!(
            Cuts::AllOneVsRest.resolve_distinct(&dims(&[2, 2])).unwrap(),
            vec![vec![0]]
        );
        assert_eq!(Cuts::AllOneVsRest.resolve_distinct(&dims(&[2, 2, 2])).unwrap().len(), 3);
    }

    #[test]
    fn sep_requires_witness() {
        let p = Povm::new(dims(&[2, 2]), vec![ComplexMatrix::identity(4)]).unwrap();
        assert!(matches!(verify_sep(&p, 1e-9), Err(Error::MissingWitness)));
    }

    #[test]
    fn negative_factor_fails_sep() {
        let bad = ComplexMatrix::from_diag(&[2.0, -1.0]);
        let id = ComplexMatrix::identity(2);
        let w = SepDecomposition(vec![vec![ProductTerm(vec![bad.clone(), id.clone()])]]);
        let el = crate::linalg::tensor(&bad, &id);
        let p = Povm::new(dims(&[2, 2]), vec![el])
            .unwrap()
            .with_witness(Witness::Sep(w));
        assert!(!verify_sep(&p, 1e-9).unwrap());
    }

    #[test]
    fn restrict_identity() {
        let p = Povm::new(dims(&[3, 3]), vec![ComplexMatrix::identity(9)]).unwrap();
        let r = restrict_povm(&p, &dims(&[2, 2])).unwrap();
        assert_eq!(r.elements(), &[ComplexMatrix::identity(4)]);
        assert!(restrict_povm(&p, &dims(&[4, 2])).is_err());
    }

    #[test]
    fn povm_json_round_trip_rejects_unknown() {
        let p = counterexample_c4_product();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""kind":"sep""#));
        let back: Povm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = s.replacen("\"kind\"", "\"extra\":1,\"kind\"", 1);
        assert!(serde_json::from_str::<Povm>(&bad).is_err());
    }

    #[test]
    fn verify_kind_dispatch() {
        let c4 = counterexample_c4();
        assert!(verify_kind(&c4, PovmKind::Projective, 1e-12).unwrap().passes());
        let prod = counterexample_c4_product();
        assert!(verify_kind(&prod, PovmKind::Sep, 1e-12).unwrap().passes());
        assert!(verify_kind(&prod, PovmKind::Ppt, 1e-12).unwrap().passes());
        assert!(!verify_kind(&prod, PovmKind::Locc1, 1e-12).unwrap().passes());
    }
}
