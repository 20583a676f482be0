use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_perfect, check_unambiguous, hit_table};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DimVector};
use crate::par;
use crate::povm::{
    flatten_locc1, random_locc1, random_orthonormal_states, random_povm, random_ppt_povm, random_sep_povm,
    restrict_povm, verify_kind, Povm, PovmKind, DEFAULT_TOL,
};
use crate::states::StateSet;

/// Largest tolerated gap between the two sides of the trace identity.
pub const TRACE_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzFailure {
    pub seed_offset: u64,
    pub kind: PovmKind,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessReport {
    pub trials: usize,
    pub seed: u64,
    pub kinds: Vec<PovmKind>,
    /// System the random measurements are drawn in.
    pub dims: DimVector,
    /// System they are restricted to.
    pub sub_dims: DimVector,
    /// Number of (trial, kind) cases run.
    pub checks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trace_residual: Option<f64>,
    /// Sorted by seed offset, then kind.
    pub failures: Vec<FuzzFailure>,
    pub passes: bool,
}

/// `max_{i,j} |tr(M_j|_{sub} rho_i) - tr(M_j embed(rho_i))|` where
/// `M_j|_{sub}` is the restriction of `povm_big` to `sub_dims`.
pub fn theorem1_trace_identity(set: &StateSet, povm_big: &Povm, sub_dims: &DimVector) -> Result<f64> {
    if set.dims() != sub_dims {
        return Err(Error::DimensionMismatch(format!(
            "states live on {} but the restriction targets {sub_dims}",
            set.dims()
        )));
    }
    let small = hit_table(&restrict_povm(povm_big, sub_dims)?, set)?;
    let big = hit_table(povm_big, &set.embed(povm_big.dims())?)?;
    Ok(max_gap(&small, &big))
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn case_seed(seed: u64, offset: u64, kind: PovmKind) -> u64 {
    splitmix(splitmix(seed ^ splitmix(offset)) ^ kind as u64)
}

/// A random measurement of the given class on `dims`.
pub fn random_of_kind(kind: PovmKind, dims: &DimVector, seed: u64) -> Result<Povm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=4usize);
    let sub = rng.random();
    match kind {
        PovmKind::General => random_povm(dims, n, sub),
        PovmKind::Ppt => random_ppt_povm(dims, n, sub),
        PovmKind::Sep => random_sep_povm(dims, n, sub),
        PovmKind::Locc1 => flatten_locc1(&random_locc1(dims, rng.random_range(2..=3), sub)?),
        PovmKind::Projective => {
            let d = dims.total();
            let basis = random_orthonormal_states(dims, d, sub)?;
            let mut slots: Vec<usize> = (0..d).collect();
            slots.shuffle(&mut rng);
            let n = n.min(d);
            let mut elements = vec![ComplexMatrix::zeros(d, d); n];
            for (k, &slot) in slots.iter().enumerate() {
                elements[k % n] += basis.get(slot).expect("full basis").rho();
            }
            Ok(Povm::new(dims.clone(), elements)?.with_kind(PovmKind::Projective))
        }
    }
}

/// Restriction is not guaranteed to keep projectivity.
fn preserved_kind(kind: PovmKind) -> PovmKind {
    match kind {
        PovmKind::Projective => PovmKind::General,
        k => k,
    }
}

struct Case {
    failure: Option<FuzzFailure>,
    trace_residual: f64,
}

fn run_case(
    kind: PovmKind,
    offset: u64,
    seed: u64,
    dims: &DimVector,
    sub_dims: &DimVector,
    states: Option<(&StateSet, &StateSet)>,
    tol: f64,
) -> Case {
    let fail = |residual: f64, reason: String| Case {
        failure: Some(FuzzFailure {
            seed_offset: offset,
            kind,
            residual,
            reason,
        }),
        trace_residual: 0.0,
    };
    let big = match random_of_kind(kind, dims, case_seed(seed, offset, kind)) {
        Ok(p) => p,
        Err(e) => return fail(f64::NAN, format!("generation: {e}")),
    };
    match verify_kind(&big, kind, tol) {
        Ok(r) if r.passes() => {}
        Ok(r) => {
            return fail(
                r.povm.completeness_residual,
                format!("generated measurement: {}", r.detail),
            )
        }
        Err(e) => return fail(f64::NAN, format!("generated measurement: {e}")),
    }
    let small = match restrict_povm(&big, sub_dims) {
        Ok(p) => p,
        Err(e) => return fail(f64::NAN, format!("restriction: {e}")),
    };
    match verify_kind(&small, preserved_kind(kind), tol) {
        Ok(r) if r.passes() => {}
        Ok(r) => return fail(r.povm.completeness_residual, format!("restriction: {}", r.detail)),
        Err(e) => return fail(f64::NAN, format!("restriction: {e}")),
    }
    let Some((set, embedded)) = states else {
        return Case {
            failure: None,
            trace_residual: 0.0,
        };
    };
    let outcome = (|| -> Result<Case> {
        let residual = max_gap(&hit_table(&small, set)?, &hit_table(&big, embedded)?);
        if residual > TRACE_IDENTITY_TOL {
            return Ok(fail(residual, "trace identity violated".into()));
        }
        let perfect = (
            check_perfect(&small, set, tol)?.passes,
            check_perfect(&big, embedded, tol)?.passes,
        );
        if perfect.0 != perfect.1 {
            return Ok(fail(
                residual,
                format!(
                    "perfect verdicts differ: restricted {}, original {}",
                    perfect.0, perfect.1
                ),
            ));
        }
        let last = [big.len() - 1];
        let unambiguous = (
            check_unambiguous(&small, set, &last, tol)?.passes,
            check_unambiguous(&big, embedded, &last, tol)?.passes,
        );
        if unambiguous.0 != unambiguous.1 {
            return Ok(fail(
                residual,
                format!(
                    "unambiguous verdicts differ: restricted {}, original {}",
                    unambiguous.0, unambiguous.1
                ),
            ));
        }
        Ok(Case {
            failure: None,
            trace_residual: residual,
        })
    })();
    outcome.unwrap_or_else(|e| fail(f64::NAN, e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn run(
    kinds: &[PovmKind],
    dims: &DimVector,
    sub_dims: &DimVector,
    states: Option<&StateSet>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<HarnessReport> {
    sub_dims.padding_to(dims)?;
    let embedded = match states {
        Some(s) => Some(s.embed(dims)?),
        None => None,
    };
    let pairs = states.zip(embedded.as_ref());
    let cases: Vec<(u64, PovmKind)> = (0..trials as u64)
        .flat_map(|t| kinds.iter().map(move |&k| (t, k)))
        .collect();
    let results = par::map(&cases, |&(offset, kind)| {
        run_case(kind, offset, seed, dims, sub_dims, pairs, tol)
    });
    let mut failures: Vec<FuzzFailure> = Vec::new();
    let mut max_residual: f64 = 0.0;
    for r in results {
        max_residual = max_residual.max(r.trace_residual);
        failures.extend(r.failure);
    }
    failures.sort_by_key(|f| (f.seed_offset, f.kind as u8));
    Ok(HarnessReport {
        trials,
        seed,
        kinds: kinds.to_vec(),
        dims: dims.clone(),
        sub_dims: sub_dims.clone(),
        checks: cases.len(),
        max_trace_residual: states.map(|_| max_residual),
        passes: failures.is_empty(),
        failures,
    })
}

/// For each trial and kind: draw a random measurement of that kind on
/// `new_dims`, restrict it to the states' system, and check that the
/// restriction is a measurement of the same kind whose outcome statistics
/// on `set` equal those of the original on the embedded set, so that
/// neither can discriminate (perfectly or unambiguously) when the other
/// cannot.
pub fn local_global_fuzz(
    set: &StateSet,
    kinds: &[PovmKind],
    new_dims: &DimVector,
    trials: usize,
    seed: u64,
) -> Result<HarnessReport> {
    run(kinds, new_dims, set.dims(), Some(set), trials, seed, DEFAULT_TOL)
}

/// For each trial and kind: draw a random measurement of that kind on
/// `dims` and check that its restriction to `sub_dims` is again a
/// measurement of that kind (general for projective input) at `tol`.
pub fn kind_preservation_fuzz(
    kinds: &[PovmKind],
    dims: &DimVector,
    sub_dims: &DimVector,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<HarnessReport> {
    run(kinds, dims, sub_dims, None, trials, seed, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::bell_states;

    fn dims(d: &[usize]) -> DimVector {
        DimVector::new(d.to_vec()).unwrap()
    }

    const ALL: [PovmKind; 5] = [
        PovmKind::General,
        PovmKind::Projective,
        PovmKind::Ppt,
        PovmKind::Sep,
        PovmKind::Locc1,
    ];

    #[test]
    fn generators_produce_their_kind() {
        for kind in ALL {
            for seed in 0..5 {
                let p = random_of_kind(kind, &dims(&[3, 2]), seed).unwrap();
                assert!(verify_kind(&p, kind, 1e-9).unwrap().passes(), "{kind} {seed}");
            }
        }
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let r = local_global_fuzz(&bell_states(), &ALL, &dims(&[3, 3]), 0, 1).unwrap();
        assert!(r.passes);
        assert_eq!(r.checks, 0);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn bell_fuzz_small() {
        let r = local_global_fuzz(&bell_states().take(3).unwrap(), &ALL, &dims(&[3, 3]), 10, 42).unwrap();
        assert!(r.passes, "{:?}", r.failures);
        assert_eq!(r.checks, 50);
        assert!(r.max_trace_residual.unwrap() <= TRACE_IDENTITY_TOL);
    }

    #[test]
    fn trace_identity_without_padding_is_exact() {
        let p = random_povm(&dims(&[2, 2]), 3, 9).unwrap();
        assert_eq!(
            theorem1_trace_identity(&bell_states(), &p, &dims(&[2, 2])).unwrap(),
            0.0
        );
    }

    #[test]
    fn trace_identity_identity_povm() {
        let p = Povm::new(dims(&[3, 3]), vec![ComplexMatrix::identity(9)]).unwrap();
        let set = bell_states();
        assert!(theorem1_trace_identity(&set, &p, &dims(&[2, 2])).unwrap() < 1e-15);
        let h = hit_table(&restrict_povm(&p, &dims(&[2, 2])).unwrap(), &set).unwrap();
        assert!(h.iter().flatten().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!(theorem1_trace_identity(&set, &p, &dims(&[3, 2])).is_err());
    }

    #[test]
    fn report_is_deterministic_and_sorted() {
        let set = bell_states().take(2).unwrap();
        let a = local_global_fuzz(&set, &[PovmKind::Sep, PovmKind::General], &dims(&[3, 2]), 6, 3).unwrap();
        let b = local_global_fuzz(&set, &[PovmKind::Sep, PovmKind::General], &dims(&[3, 2]), 6, 3).unwrap();
        assert_eq!(a, b);
    }
}
