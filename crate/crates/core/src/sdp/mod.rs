//! Small dense complex semidefinite programs.
//!
//! A problem maximizes `sum_b Re tr(C_b X_b)` over Hermitian blocks `X_b`
//! subject to real-linear equality constraints and, per block, membership
//! in one or more cones (the PSD cone, or the cone of matrices whose
//! partial transpose over a cut is PSD). [`solve`] runs over-relaxed ADMM
//! in consensus form: the blocks are projected onto the affine set, and a
//! separate copy of every block is projected onto each of its cones.

mod admm;
mod cones;

use serde::{Deserialize, Serialize};

pub use admm::solve;
pub use cones::{project_ppt, project_psd};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DimVector};

/// Problem data must be Hermitian to this accuracy (scaled by the largest
/// entry).
pub const DATA_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr", into = "ConeRepr")]
pub enum Cone {
    Psd,
    /// PSD after transposing the parties in `cut`.
    Ppt {
        dims: DimVector,
        cut: Vec<usize>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConeType {
    Psd,
    Ppt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeRepr {
    #[serde(rename = "type")]
    kind: ConeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<DimVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cut: Option<Vec<usize>>,
}

impl TryFrom<ConeRepr> for Cone {
    type Error = Error;

    fn try_from(r: ConeRepr) -> Result<Self> {
        match (r.kind, r.dims, r.cut) {
            (ConeType::Psd, None, None) => Ok(Cone::Psd),
            (ConeType::Ppt, Some(dims), Some(cut)) => Ok(Cone::Ppt { dims, cut }),
            (ConeType::Psd, _, _) => Err(Error::InvalidProblem("psd cone takes no dims or cut".into())),
            (ConeType::Ppt, _, _) => Err(Error::InvalidProblem("ppt cone needs dims and cut".into())),
        }
    }
}

impl From<Cone> for ConeRepr {
    fn from(c: Cone) -> Self {
        match c {
            Cone::Psd => ConeRepr {
                kind: ConeType::Psd,
                dims: None,
                cut: None,
            },
            Cone::Ppt { dims, cut } => ConeRepr {
                kind: ConeType::Ppt,
                dims: Some(dims),
                cut: Some(cut),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarTerm {
    pub block: usize,
    pub coeff: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AffineConstraint {
    /// `sum_{b in blocks} X_b = rhs` as a matrix identity.
    BlockSum { blocks: Vec<usize>, rhs: ComplexMatrix },
    /// `sum_terms Re tr(coeff X_block) = rhs`.
    Scalar { terms: Vec<ScalarTerm>, rhs: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<ComplexMatrix>,
    constraints: Vec<AffineConstraint>,
    cones: Vec<Vec<Cone>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRepr {
    blocks: Vec<usize>,
    objective: Vec<ComplexMatrix>,
    constraints: Vec<AffineConstraint>,
    cones: Vec<Vec<Cone>>,
}

impl TryFrom<ProblemRepr> for SdpProblem {
    type Error = Error;

    fn try_from(r: ProblemRepr) -> Result<Self> {
        SdpProblem::new(r.blocks, r.objective, r.constraints, r.cones)
    }
}

impl From<SdpProblem> for ProblemRepr {
    fn from(p: SdpProblem) -> Self {
        ProblemRepr {
            blocks: p.blocks,
            objective: p.objective,
            constraints: p.constraints,
            cones: p.cones,
        }
    }
}

fn check_hermitian(m: &ComplexMatrix, what: &str) -> Result<()> {
    let dev = m.hermitian_deviation();
    if dev > DATA_HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::InvalidProblem(format!(
            "{what} is not Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

fn check_side(m: &ComplexMatrix, side: usize, what: &str) -> Result<()> {
    if !m.is_square() || m.rows() != side {
        return Err(Error::InvalidProblem(format!(
            "{what} is {}x{}, expected side {side}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<usize>,
        objective: Vec<ComplexMatrix>,
        constraints: Vec<AffineConstraint>,
        cones: Vec<Vec<Cone>>,
    ) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidProblem(
                "need at least one block, all of positive side".into(),
            ));
        }
        let nb = blocks.len();
        if objective.len() != nb || cones.len() != nb {
            return Err(Error::InvalidProblem(format!(
                "{nb} blocks but {} objective matrices and {} cone lists",
                objective.len(),
                cones.len()
            )));
        }
        for (b, c) in objective.iter().enumerate() {
            check_side(c, blocks[b], &format!("objective block {b}"))?;
            check_hermitian(c, &format!("objective block {b}"))?;
        }
        for (b, list) in cones.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::InvalidProblem(format!("block {b} has no cone")));
            }
            for cone in list {
                if let Cone::Ppt { dims, cut } = cone {
                    if dims.total() != blocks[b] {
                        return Err(Error::InvalidProblem(format!(
                            "block {b}: PPT dims {dims} do not match side {}",
                            blocks[b]
                        )));
                    }
                    if cut.iter().any(|&p| p >= dims.parties()) {
                        return Err(Error::InvalidProblem(format!("block {b}: cut {cut:?} out of range")));
                    }
                }
            }
        }
        for (k, con) in constraints.iter().enumerate() {
            match con {
                AffineConstraint::BlockSum { blocks: bs, rhs } => {
                    if bs.is_empty() {
                        return Err(Error::InvalidProblem(format!("constraint {k} names no block")));
                    }
                    for &b in bs {
                        let side = *blocks
                            .get(b)
                            .ok_or_else(|| Error::InvalidProblem(format!("constraint {k}: no block {b}")))?;
                        check_side(rhs, side, &format!("constraint {k} right-hand side"))?;
                    }
                    check_hermitian(rhs, &format!("constraint {k} right-hand side"))?;
                }
                AffineConstraint::Scalar { terms, rhs } => {
                    if !rhs.is_finite() {
                        return Err(Error::InvalidProblem(format!(
                            "constraint {k}: non-finite right-hand side"
                        )));
                    }
                    for t in terms {
                        let side = *blocks
                            .get(t.block)
                            .ok_or_else(|| Error::InvalidProblem(format!("constraint {k}: no block {}", t.block)))?;
                        check_side(&t.coeff, side, &format!("constraint {k} coefficient"))?;
                        check_hermitian(&t.coeff, &format!("constraint {k} coefficient"))?;
                    }
                }
            }
        }
        Ok(Self {
            blocks,
            objective,
            constraints,
            cones,
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[ComplexMatrix] {
        &self.objective
    }

    pub fn constraints(&self) -> &[AffineConstraint] {
        &self.constraints
    }

    pub fn cones(&self) -> &[Vec<Cone>] {
        &self.cones
    }

    /// `sum_b Re tr(C_b X_b)`.
    pub fn evaluate(&self, x: &[ComplexMatrix]) -> f64 {
        self.objective.iter().zip(x).map(|(c, m)| c.frobenius_inner(m)).sum()
    }

    /// The same problem with the objective multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SdpProblem {
        let mut out = self.clone();
        out.objective = out.objective.iter().map(|m| m.scale(c)).collect();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Penalty parameter; by default proportional to the objective norm.
    pub rho: Option<f64>,
    /// Over-relaxation factor in (0, 2).
    pub alpha: f64,
    /// Iterations between convergence checks.
    pub check_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50_000,
            seed: 0,
            rho: None,
            alpha: 1.6,
            check_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    InfeasibleEvidence,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIterations => "max_iterations",
            SdpStatus::InfeasibleEvidence => "infeasible_evidence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdpResiduals {
    /// Euclidean norm of the constraint violation of the returned blocks.
    pub affine: f64,
    /// Largest Frobenius distance from a returned block to its cone copy;
    /// bounds the distance to the cone and the most negative eigenvalue.
    pub cone: f64,
    /// Gap between the objective and the dual estimate.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub iteration: usize,
    /// `||t_{k+1} - t_k||` for the splitting variable `t = Z + U`; never
    /// increases for a fixed penalty.
    pub fixed_point: f64,
    pub cone: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdpSolution {
    pub blocks: Vec<ComplexMatrix>,
    pub objective: f64,
    pub status: SdpStatus,
    pub residuals: SdpResiduals,
    pub iterations: usize,
    /// The most recent convergence checks, oldest first.
    pub checkpoints: Vec<Checkpoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_problems() {
        let i2 = ComplexMatrix::identity(2);
        assert!(SdpProblem::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(SdpProblem::new(vec![2], vec![i2.clone()], vec![], vec![vec![]]).is_err());
        let skew = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            SdpProblem::new(vec![2], vec![skew], vec![], vec![vec![Cone::Psd]]),
            Err(Error::InvalidProblem(_))
        ));
        let bad = AffineConstraint::BlockSum {
            blocks: vec![1],
            rhs: i2.clone(),
        };
        assert!(SdpProblem::new(vec![2], vec![i2.clone()], vec![bad], vec![vec![Cone::Psd]]).is_err());
        let ppt = Cone::Ppt {
            dims: DimVector::new(vec![2, 2]).unwrap(),
            cut: vec![0],
        };
        assert!(SdpProblem::new(vec![2], vec![i2], vec![], vec![vec![ppt]]).is_err());
    }

    #[test]
    fn problem_json_round_trip() {
        let i2 = ComplexMatrix::identity(2);
        let p = SdpProblem::new(
            vec![2, 2],
            vec![i2.clone(), i2.scale(0.5)],
            vec![
                AffineConstraint::BlockSum {
                    blocks: vec![0, 1],
                    rhs: i2.clone(),
                },
                AffineConstraint::Scalar {
                    terms: vec![ScalarTerm { block: 0, coeff: i2 }],
                    rhs: 0.5,
                },
            ],
            vec![vec![Cone::Psd], vec![Cone::Psd]],
        )
        .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""type":"block_sum""#));
        let back: SdpProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = s.replacen(r#""type":"psd""#, r#""type":"psd","x":1"#, 1);
        assert!(serde_json::from_str::<SdpProblem>(&bad).is_err());
    }
}
