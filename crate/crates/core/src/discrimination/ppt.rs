use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, partial_transpose_parties, ComplexMatrix, DimVector};
use crate::povm::{Cuts, Povm, PovmKind};
use crate::sdp::{solve, AffineConstraint, Cone, SdpOptions, SdpProblem, SdpResiduals, SdpStatus};
use crate::states::StateSet;

/// A set counts as PPT-distinguishable when the optimal average success
/// probability reaches `1 - DISTINGUISHABLE_THRESHOLD`.
pub const DISTINGUISHABLE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptReport {
    /// Optimal average success probability `(1/N) sum_i tr(M_i rho_i)`.
    pub optimum: f64,
    pub distinguishable: bool,
    /// Optimal PPT POVM, mixed with `I/N` just enough to remove the solver's
    /// residual negativity.
    pub povm: Povm,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: SdpResiduals,
}

/// The program `max (1/N) sum_i tr(M_i rho_i)` over `M_i >= 0`,
/// `M_i^{T_c} >= 0` for every cut `c`, `sum_i M_i = I`.
pub fn ppt_distinguishability_problem(set: &StateSet, cuts: &Cuts) -> Result<SdpProblem> {
    let dims = set.dims();
    let cuts = cuts.resolve_distinct(dims)?;
    let n = set.len();
    let d = dims.total();
    let cones: Vec<Cone> = std::iter::once(Cone::Psd)
        .chain(cuts.into_iter().map(|cut| Cone::Ppt {
            dims: dims.clone(),
            cut,
        }))
        .collect();
    SdpProblem::new(
        vec![d; n],
        set.iter().map(|s| s.rho().scale(1.0 / n as f64)).collect(),
        vec![AffineConstraint::BlockSum {
            blocks: (0..n).collect(),
            rhs: ComplexMatrix::identity(d),
        }],
        vec![cones; n],
    )
}

/// Optimal PPT discrimination of `set` with equal priors.
pub fn ppt_distinguishability(set: &StateSet, cuts: &Cuts, opts: &SdpOptions) -> Result<PptReport> {
    let problem = ppt_distinguishability_problem(set, cuts)?;
    let solution = solve(&problem, opts)?;
    if solution.status != SdpStatus::Optimal {
        return Err(Error::NotConverged {
            status: solution.status.to_string(),
            cone_residual: solution.residuals.cone,
        });
    }
    let dims = set.dims();
    let povm = repair(solution.blocks, dims, &cuts.resolve_distinct(dims)?)?;
    Ok(PptReport {
        optimum: solution.objective,
        distinguishable: solution.objective >= 1.0 - DISTINGUISHABLE_THRESHOLD,
        povm,
        status: solution.status,
        iterations: solution.iterations,
        residuals: solution.residuals,
    })
}

/// `(1 - e) M_i + e I/N` with the smallest `e` that makes every element and
/// every partial transpose positive semidefinite.
fn repair(blocks: Vec<ComplexMatrix>, dims: &DimVector, cuts: &[Vec<usize>]) -> Result<Povm> {
    let n = blocks.len() as f64;
    let d = dims.total();
    let mut worst: f64 = 0.0;
    for m in &blocks {
        worst = worst.min(hermitian_eigen(m)?.min());
        for cut in cuts {
            worst = worst.min(hermitian_eigen(&partial_transpose_parties(m, dims, cut)?)?.min());
        }
    }
    let delta = -worst;
    let elements = if delta > 0.0 {
        let e = n * delta / (1.0 + n * delta);
        let share = ComplexMatrix::identity(d).scale(e / n);
        blocks.iter().map(|m| &m.scale(1.0 - e) + &share).collect()
    } else {
        blocks
    };
    Ok(Povm::new(dims.clone(), elements)?.with_kind(PovmKind::Ppt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceReport {
    pub dims: DimVector,
    pub new_dims: DimVector,
    pub opt_small: f64,
    pub opt_big: f64,
    /// `opt_big - opt_small`.
    pub delta: f64,
    /// Each optimum carries solver error up to `tol`, so agreement is
    /// asserted at `2 tol`.
    pub tol: f64,
    pub passes: bool,
}

/// PPT optimum of `set` and of its embedding into `new_dims`.
pub fn theorem1_ppt_invariance(
    set: &StateSet,
    new_dims: &DimVector,
    cuts: &Cuts,
    opts: &SdpOptions,
) -> Result<InvarianceReport> {
    let small = ppt_distinguishability(set, cuts, opts)?;
    let big = ppt_distinguishability(&set.embed(new_dims)?, cuts, opts)?;
    let delta = big.optimum - small.optimum;
    Ok(InvarianceReport {
        dims: set.dims().clone(),
        new_dims: new_dims.clone(),
        opt_small: small.optimum,
        opt_big: big.optimum,
        delta,
        tol: opts.tol,
        passes: delta.abs() <= 2.0 * opts.tol,
    })
}
