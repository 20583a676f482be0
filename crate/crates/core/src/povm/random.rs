//! Seeded random generators for fuzzing. Every generator is a pure function
//! of its arguments; the same seed always gives the same output.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::locc1::{Locc1Node, Locc1Tree};
use super::sep::{ProductTerm, SepDecomposition};
use super::{Povm, PovmKind, Witness};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, partial_transpose_parties, sum_matrices, ComplexMatrix, DimVector};
use crate::states::{pure_state_labeled, StateSet};

const MAX_ATTEMPTS: u32 = 4;
const SINGULAR_TOL: f64 = 1e-10;

fn rng_for(seed: u64, attempt: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// `G G†` for a `d x r` complex Gaussian `G`.
fn random_psd(rng: &mut impl Rng, d: usize, r: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, r, |_, _| gaussian(rng));
    g.matmul(&g.adjoint()).hermitian_part()
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("a POVM needs at least one element".into()))
    } else {
        Ok(())
    }
}

fn with_retries<T>(seed: u64, mut attempt_fn: impl FnMut(&mut ChaCha8Rng) -> Option<T>) -> Result<T> {
    for attempt in 0..MAX_ATTEMPTS {
        if let Some(out) = attempt_fn(&mut rng_for(seed, attempt)) {
            return Ok(out);
        }
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
        reason: "normalization matrix is singular".into(),
    })
}

/// `S^{-1/2} P_k S^{-1/2}` for `S = sum_k P_k`, or `None` when `S` is
/// numerically singular.
fn normalize(parts: &[ComplexMatrix]) -> Option<Vec<ComplexMatrix>> {
    let s = sum_matrices(parts.iter())?;
    let eig = hermitian_eigen(&s).ok()?;
    if eig.min() <= SINGULAR_TOL * eig.max().max(1.0) {
        return None;
    }
    let inv_sqrt = eig.map_spectrum(|x| 1.0 / x.sqrt());
    Some(
        parts
            .iter()
            .map(|p| inv_sqrt.matmul(p).matmul(&inv_sqrt).hermitian_part())
            .collect(),
    )
}

fn local_povm(rng: &mut impl Rng, d: usize, n: usize) -> Option<Vec<ComplexMatrix>> {
    let min_rank = d.div_ceil(n);
    let parts: Vec<ComplexMatrix> = (0..n)
        .map(|_| {
            let r = rng.random_range(min_rank..=d);
            random_psd(rng, d, r)
        })
        .collect();
    normalize(&parts)
}

/// Random general POVM with `n` elements on `dims`.
pub fn random_povm(dims: &DimVector, n: usize, seed: u64) -> Result<Povm> {
    check_count(n)?;
    let d = dims.total();
    let elements = with_retries(seed, |rng| local_povm(rng, d, n))?;
    Povm::new(dims.clone(), elements)
}

/// Random POVM whose elements are PPT across every bipartition of `dims`.
///
/// The first `n - 1` elements are Gaussian PSD matrices shifted by a
/// multiple of the identity until every partial transpose is positive,
/// then scaled so that the remainder `I - S/λ` is PPT as well.
pub fn random_ppt_povm(dims: &DimVector, n: usize, seed: u64) -> Result<Povm> {
    check_count(n)?;
    let d = dims.total();
    let cuts = all_cuts(dims);
    let elements = with_retries(seed, |rng| {
        if n == 1 {
            return Some(vec![ComplexMatrix::identity(d)]);
        }
        let parts: Vec<ComplexMatrix> = (0..n - 1)
            .map(|_| {
                let r = rng.random_range(1..=d);
                let p = random_psd(rng, d, r);
                let worst = cuts
                    .iter()
                    .map(|c| pt_eigen_extreme(&p, dims, c, false))
                    .fold(0.0, f64::min);
                &p + &ComplexMatrix::identity(d).scale(-worst)
            })
            .collect();
        let s = sum_matrices(parts.iter())?;
        let mut lambda = hermitian_eigen(&s).ok()?.max();
        for c in &cuts {
            lambda = lambda.max(pt_eigen_extreme(&s, dims, c, true));
        }
        if lambda <= SINGULAR_TOL {
            return None;
        }
        let lambda = lambda * (1.0 + rng.random_range(0.05..1.0));
        let mut out: Vec<ComplexMatrix> = parts.iter().map(|p| p.scale(1.0 / lambda)).collect();
        out.push(&ComplexMatrix::identity(d) - &s.scale(1.0 / lambda));
        Some(out)
    })?;
    Ok(Povm::new(dims.clone(), elements)?.with_kind(PovmKind::Ppt))
}

fn all_cuts(dims: &DimVector) -> Vec<Vec<usize>> {
    let k = dims.parties();
    // masks over parties 1..k with party 0 fixed outside, one per bipartition
    (1..(1usize << k) - 1)
        .filter(|mask| mask & 1 == 0)
        .map(|mask| (0..k).filter(|p| mask >> p & 1 == 1).collect())
        .collect()
}

fn pt_eigen_extreme(m: &ComplexMatrix, dims: &DimVector, cut: &[usize], max: bool) -> f64 {
    let pt = partial_transpose_parties(m, dims, cut).expect("cut from dims");
    let eig = hermitian_eigen(&pt).expect("finite matrix");
    if max {
        eig.max()
    } else {
        eig.min()
    }
}

/// Random one-round LOCC tree: a random party order and, at every node, a
/// random local POVM with between 1 and `branching` outcomes.
pub fn random_locc1(dims: &DimVector, branching: usize, seed: u64) -> Result<Locc1Tree> {
    if branching == 0 {
        return Err(Error::InvalidArgument("branching must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dims.parties()).collect();
    order.shuffle(&mut rng);
    let root = random_node(&mut rng, dims, &order, 0, branching)?;
    Locc1Tree::new(dims.clone(), order, root)
}

fn random_node(
    rng: &mut ChaCha8Rng,
    dims: &DimVector,
    order: &[usize],
    depth: usize,
    branching: usize,
) -> Result<Locc1Node> {
    let party = order[depth];
    let d = dims.local(party);
    let n = rng.random_range(1..=branching);
    let sub_seed: u64 = rng.random();
    let elements = with_retries(sub_seed, |r| local_povm(r, d, n))?;
    if depth + 1 == order.len() {
        return Ok(Locc1Node::leaf(party, elements));
    }
    let children = (0..elements.len())
        .map(|_| random_node(rng, dims, order, depth + 1, branching))
        .collect::<Result<Vec<_>>>()?;
    let mut children = children.into_iter();
    Ok(Locc1Node::new(party, elements, |_| children.next()))
}

/// Random separable POVM with `n` elements and an explicit multi-term
/// witness. Two random LOCC₁ trees are mixed with a random weight and their
/// leaves are distributed over the `n` elements; an element that receives
/// no leaf is zero.
pub fn random_sep_povm(dims: &DimVector, n: usize, seed: u64) -> Result<Povm> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let branching = 2 + n.div_ceil(2);
    let w: f64 = rng.random_range(0.1..0.9);
    let a = random_locc1(dims, branching, rng.random())?;
    let b = random_locc1(dims, branching, rng.random())?;
    let mut terms: Vec<ProductTerm> = Vec::new();
    for (tree, weight) in [(&a, w), (&b, 1.0 - w)] {
        for mut factors in tree.leaf_factors() {
            factors[0] = factors[0].scale(weight);
            terms.push(ProductTerm(factors));
        }
    }
    terms.shuffle(&mut rng);
    let mut groups: Vec<Vec<ProductTerm>> = vec![Vec::new(); n];
    for (i, t) in terms.into_iter().enumerate() {
        groups[i % n].push(t);
    }
    let witness = SepDecomposition(groups);
    let elements = (0..n)
        .map(|j| witness.reconstruct(j, dims))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm::new(dims.clone(), elements)?
        .with_kind(PovmKind::Sep)
        .with_witness(Witness::Sep(witness)))
}

/// `count` random mutually orthogonal pure states on `dims`.
pub fn random_orthonormal_states(dims: &DimVector, count: usize, seed: u64) -> Result<StateSet> {
    let d = dims.total();
    if count == 0 || count > d {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} orthonormal states in dimension {d}"
        )));
    }
    let vectors = with_retries(seed, |rng| {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(count);
        for _ in 0..count {
            let mut v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for u in &basis {
                    let c: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                return None;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
        Some(basis)
    })?;
    let states = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| pure_state_labeled(v, dims, &format!("psi{i}")))
        .collect::<Result<Vec<_>>>()?;
    StateSet::new(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{is_ppt_povm, verify_kind, verify_povm, verify_sep, Cuts};

    fn dims(d: &[usize]) -> DimVector {
        DimVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn random_povm_is_valid_and_deterministic() {
        for seed in 0..20 {
            let p = random_povm(&dims(&[3, 3]), 4, seed).unwrap();
            assert!(verify_povm(&p, 1e-9).unwrap().passes);
            assert_eq!(p, random_povm(&dims(&[3, 3]), 4, seed).unwrap());
        }
        assert_ne!(
            random_povm(&dims(&[2]), 2, 1).unwrap(),
            random_povm(&dims(&[2]), 2, 2).unwrap()
        );
    }

    #[test]
    fn single_element_is_identity() {
        let p = random_povm(&dims(&[2, 3]), 1, 7).unwrap();
        assert!(p.elements()[0].max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
        assert!(random_povm(&dims(&[2]), 0, 7).is_err());
    }

    #[test]
    fn all_cuts_enumerates_bipartitions() {
        assert_eq!(all_cuts(&dims(&[2, 2])), vec![vec![1]]);
        assert_eq!(all_cuts(&dims(&[2, 2, 2])).len(), 3);
        assert_eq!(all_cuts(&dims(&[2, 2, 2, 2])).len(), 7);
        assert!(all_cuts(&dims(&[4])).is_empty());
    }

    #[test]
    fn ppt_generator() {
        for seed in 0..10 {
            for d in [&[3, 3][..], &[2, 2, 2]] {
                let p = random_ppt_povm(&dims(d), 3, seed).unwrap();
                assert!(is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn sep_generator() {
        for seed in 0..10 {
            let p = random_sep_povm(&dims(&[3, 2]), 3, seed).unwrap();
            assert!(verify_povm(&p, 1e-9).unwrap().passes);
            assert!(verify_sep(&p, 1e-9).unwrap());
            assert!(verify_kind(&p, PovmKind::Ppt, 1e-9).unwrap().passes());
        }
    }

    #[test]
    fn locc1_generator() {
        for seed in 0..10 {
            let t = random_locc1(&dims(&[3, 2, 2]), 3, seed).unwrap();
            let p = crate::povm::flatten_locc1(&t).unwrap();
            assert!(verify_kind(&p, PovmKind::Locc1, 1e-9).unwrap().passes());
            assert_eq!(t, random_locc1(&dims(&[3, 2, 2]), 3, seed).unwrap());
        }
    }

    #[test]
    fn orthonormal_states() {
        let s = random_orthonormal_states(&dims(&[2, 2]), 3, 5).unwrap();
        assert!(s.mutually_orthogonal(1e-12));
        assert!(random_orthonormal_states(&dims(&[2]), 3, 5).is_err());
    }
}
