//! Discrimination semantics: perfect and unambiguous checks of a POVM
//! against a state set, global distinguishability, PPT distinguishability
//! via SDP, and numerical harnesses for the dimension-independence of
//! indistinguishability.

mod harness;
mod ppt;

use serde::{Deserialize, Serialize};

pub use harness::{
    kind_preservation_fuzz, local_global_fuzz, random_of_kind, theorem1_trace_identity, FuzzFailure, HarnessReport,
    TRACE_IDENTITY_TOL,
};
pub use ppt::{
    ppt_distinguishability, ppt_distinguishability_problem, theorem1_ppt_invariance, InvarianceReport, PptReport,
    DISTINGUISHABLE_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::povm::{verify_povm, Povm, PovmKind};
use crate::states::StateSet;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Perfect,
    Unambiguous,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Perfect => "perfect",
            Mode::Unambiguous => "unambiguous",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Mode::Perfect),
            "unambiguous" => Ok(Mode::Unambiguous),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Violation {
    /// A (conclusive) outcome fires on more than one state.
    SharedOutcome { outcome: usize, states: Vec<usize> },
    /// A state is not recovered with certainty.
    Unidentified { state: usize, probability: f64 },
    /// No conclusive outcome ever fires on a state.
    Undetected { state: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscriminationVerdict {
    pub mode: Mode,
    pub povm_kind: PovmKind,
    pub passes: bool,
    /// `hits[i][j] = tr(M_j rho_i)`; each row sums to one.
    pub hits: Vec<Vec<f64>>,
    /// State each outcome reports, or `None` for shared and inconclusive
    /// outcomes.
    pub assignment: Vec<Option<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inconclusive: Vec<usize>,
    /// Smallest over states of the probability of a correct conclusive
    /// answer.
    pub success_probability: f64,
    pub violations: Vec<Violation>,
    pub tol: f64,
}

/// `tr(M_j rho_i)` for every state `i` and outcome `j`.
pub fn hit_table(povm: &Povm, set: &StateSet) -> Result<Vec<Vec<f64>>> {
    if povm.dims() != set.dims() {
        return Err(Error::DimensionMismatch(format!(
            "POVM on {} but states on {}",
            povm.dims(),
            set.dims()
        )));
    }
    Ok(set
        .iter()
        .map(|s| povm.elements().iter().map(|m| m.trace_product(s.rho()).re).collect())
        .collect())
}

struct Classified {
    hits: Vec<Vec<f64>>,
    assignment: Vec<Option<usize>>,
    violations: Vec<Violation>,
}

/// Assigns every outcome in `conclusive` that fires on at most one state to
/// its most likely state. Outcomes with `tr(M_j) <= tol` are exempt from
/// the sharing check.
fn classify(povm: &Povm, set: &StateSet, conclusive: &[bool], tol: f64) -> Result<Classified> {
    let report = verify_povm(povm, tol)?;
    if !report.passes {
        return Err(Error::InvalidPovm(format!(
            "completeness residual {:.3e}, min eigenvalue {:.3e}",
            report.completeness_residual,
            report.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        )));
    }
    let hits = hit_table(povm, set)?;
    let n = set.len();
    let mut assignment = vec![None; povm.len()];
    let mut violations = Vec::new();
    for (j, m) in povm.elements().iter().enumerate() {
        if !conclusive[j] {
            continue;
        }
        let fired: Vec<usize> = (0..n).filter(|&i| hits[i][j] > tol).collect();
        if m.trace().re > tol && fired.len() > 1 {
            violations.push(Violation::SharedOutcome {
                outcome: j,
                states: fired,
            });
            continue;
        }
        let best = (0..n).fold(0, |b, i| if hits[i][j] > hits[b][j] { i } else { b });
        assignment[j] = Some(best);
    }
    Ok(Classified {
        hits,
        assignment,
        violations,
    })
}

fn identified(c: &Classified, state: usize) -> f64 {
    c.assignment
        .iter()
        .enumerate()
        .filter(|(_, a)| **a == Some(state))
        .map(|(j, _)| c.hits[state][j])
        .sum()
}

/// Every outcome fires on at most one state, and every state is recovered
/// with probability one, both within `tol`.
pub fn check_perfect(povm: &Povm, set: &StateSet, tol: f64) -> Result<DiscriminationVerdict> {
    let mut c = classify(povm, set, &vec![true; povm.len()], tol)?;
    let mut success = f64::INFINITY;
    for i in 0..set.len() {
        let p = identified(&c, i);
        success = success.min(p);
        if p < 1.0 - tol {
            c.violations.push(Violation::Unidentified {
                state: i,
                probability: p,
            });
        }
    }
    Ok(DiscriminationVerdict {
        mode: Mode::Perfect,
        povm_kind: povm.kind(),
        passes: c.violations.is_empty(),
        hits: c.hits,
        assignment: c.assignment,
        inconclusive: Vec::new(),
        success_probability: success,
        violations: c.violations,
        tol,
    })
}

/// Conclusive outcomes never err, and every state is conclusively
/// detected with positive probability. If every outcome is marked
/// inconclusive the verdict fails with every state undetected.
pub fn check_unambiguous(
    povm: &Povm,
    set: &StateSet,
    inconclusive: &[usize],
    tol: f64,
) -> Result<DiscriminationVerdict> {
    let mut conclusive = vec![true; povm.len()];
    for &j in inconclusive {
        *conclusive.get_mut(j).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "inconclusive outcome {j} out of range for {} outcomes",
                povm.len()
            ))
        })? = false;
    }
    let mut c = classify(povm, set, &conclusive, tol)?;
    let mut success = f64::INFINITY;
    for i in 0..set.len() {
        let p = identified(&c, i);
        success = success.min(p);
        let detected = c
            .assignment
            .iter()
            .enumerate()
            .any(|(j, a)| *a == Some(i) && c.hits[i][j] > tol);
        if !detected {
            c.violations.push(Violation::Undetected { state: i });
        }
    }
    let mut inconclusive: Vec<usize> = inconclusive.to_vec();
    inconclusive.sort_unstable();
    inconclusive.dedup();
    Ok(DiscriminationVerdict {
        mode: Mode::Unambiguous,
        povm_kind: povm.kind(),
        passes: c.violations.is_empty(),
        hits: c.hits,
        assignment: c.assignment,
        inconclusive,
        success_probability: success,
        violations: c.violations,
        tol,
    })
}

/// Eigenvalues at or below this count as outside a state's support.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalVerdict {
    pub distinguishable: bool,
    /// Projectors onto the state supports (orthonormalized), plus the
    /// projector onto their complement when it is non-zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Povm>,
}

/// States are globally distinguishable exactly when they are mutually
/// orthogonal.
pub fn global_distinguishable(set: &StateSet, tol: f64) -> Result<GlobalVerdict> {
    if !set.mutually_orthogonal(tol) {
        return Ok(GlobalVerdict {
            distinguishable: false,
            witness: None,
        });
    }
    let d = set.dims().total();
    let mut columns: Vec<Vec<Complex64>> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (i, s) in set.iter().enumerate() {
        let eig = hermitian_eigen(s.rho())?;
        for (k, &v) in eig.values.iter().enumerate() {
            if v > SUPPORT_TOL {
                columns.push(eig.vectors.column(k));
                owner.push(i);
            }
        }
    }
    // symmetric (Lowdin) orthonormalization W (W^dagger W)^{-1/2}
    let w = ComplexMatrix::from_columns(&columns)?;
    let gram = w.adjoint().matmul(&w);
    let inv_sqrt = hermitian_eigen(&gram)?.map_spectrum(|x| if x > SUPPORT_TOL { 1.0 / x.sqrt() } else { 0.0 });
    let q = w.matmul(&inv_sqrt);
    let mut elements: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(d, d); set.len()];
    for (k, &i) in owner.iter().enumerate() {
        let col = q.column(k);
        elements[i] += &ComplexMatrix::outer(&col, &col);
    }
    let total = crate::linalg::sum_matrices(elements.iter()).expect("non-empty set");
    let complement = &ComplexMatrix::identity(d) - &total;
    if complement.trace().re > 0.5 {
        elements.push(complement.hermitian_part());
    }
    let witness = Povm::new(set.dims().clone(), elements)?.with_kind(PovmKind::Projective);
    Ok(GlobalVerdict {
        distinguishable: true,
        witness: Some(witness),
    })
}
