//! Reference values checked against independently constructed certificates
//! rather than against the code paths that produce them.

use distlab_core::discrimination::{
    check_perfect, global_distinguishable, ppt_distinguishability, theorem1_ppt_invariance, theorem1_trace_identity,
};
use distlab_core::linalg::{hermitian_eigen, partial_transpose, tensor, ComplexMatrix, DimVector};
use distlab_core::povm::{
    flatten_locc1, is_ppt_povm, random_povm, restrict_povm, verify_povm, Cuts, Locc1Node, Locc1Tree, Povm,
};
use distlab_core::sdp::{project_psd, SdpOptions};
use distlab_core::states::{bell_states, domino_states, extended_domino_basis, StateSet};
use distlab_core::Complex64;

fn dims(d: &[usize]) -> DimVector {
    DimVector::new(d.to_vec()).unwrap()
}

fn min_eig(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).unwrap().min()
}

fn bell(i: usize) -> ComplexMatrix {
    bell_states().get(i).unwrap().rho().clone()
}

/// Dual certificate `Y = I/6`, `Q_i = (I - 2 rho_i^T_B)/6` bounds the PPT
/// success probability of the first three Bell states by `tr Y = 2/3`.
#[test]
fn three_bell_dual_certificate() {
    let d = dims(&[2, 2]);
    let y = ComplexMatrix::identity(4).scale(1.0 / 6.0);
    for i in 0..3 {
        let rho = bell(i);
        let pt = partial_transpose(&rho, &d, 1).unwrap();
        let q = (&ComplexMatrix::identity(4) - &pt.scale(2.0)).scale(1.0 / 6.0);
        assert!(min_eig(&q) >= -1e-14);
        let slack = &(&y - &rho.scale(1.0 / 3.0)) - &partial_transpose(&q, &d, 1).unwrap();
        assert!(min_eig(&slack) >= -1e-14);
    }
    assert!((y.trace().re - 2.0 / 3.0).abs() < 1e-15);
}

/// Bell-diagonal primal point attaining 2/3.
#[test]
fn three_bell_primal_certificate() {
    let set = bell_states().take(3).unwrap();
    let elements: Vec<ComplexMatrix> = (0..3)
        .map(|i| {
            let mut m = bell(i).scale(2.0 / 3.0);
            for k in (0..3).filter(|&k| k != i) {
                m += &bell(k).scale(1.0 / 6.0);
            }
            &m + &bell(3).scale(1.0 / 3.0)
        })
        .collect();
    let p = Povm::new(dims(&[2, 2]), elements).unwrap();
    assert!(is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-12).unwrap());
    let value: f64 = (0..3)
        .map(|i| p.elements()[i].trace_product(set.get(i).unwrap().rho()).re)
        .sum::<f64>()
        / 3.0;
    assert!((value - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn three_bell_solver_matches_certificates() {
    let set = bell_states().take(3).unwrap();
    let r = ppt_distinguishability(&set, &Cuts::AllOneVsRest, &SdpOptions::default()).unwrap();
    assert!((r.optimum - 2.0 / 3.0).abs() <= 1e-5, "{}", r.optimum);
    assert!(!r.distinguishable);
    assert!(is_ppt_povm(&r.povm, &Cuts::AllOneVsRest, 1e-6).unwrap());
}

/// `{Phi+, Psi+}` is separated by the product measurement
/// `{|00><00| + |11><11|, |01><01| + |10><10|}`, so the PPT optimum is 1.
#[test]
fn bell_pair_product_certificate() {
    let set = bell_states().select(&[0, 1]).unwrap();
    let m1 = &bell(0) + &bell(2);
    let m2 = &bell(1) + &bell(3);
    assert!(m1.max_abs_diff(&ComplexMatrix::from_diag(&[1.0, 0.0, 0.0, 1.0])) < 1e-15);
    let p = Povm::new(dims(&[2, 2]), vec![m1, m2]).unwrap();
    assert!(check_perfect(&p, &set, 1e-12).unwrap().passes);
    assert!(is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-12).unwrap());
    let r = ppt_distinguishability(&set, &Cuts::AllOneVsRest, &SdpOptions::default()).unwrap();
    assert!((r.optimum - 1.0).abs() <= 1e-5);
    assert!(r.distinguishable);
}

#[test]
fn invariance_under_embedding() {
    let opts = SdpOptions::default();
    let r3 = theorem1_ppt_invariance(
        &bell_states().take(3).unwrap(),
        &dims(&[3, 3]),
        &Cuts::AllOneVsRest,
        &opts,
    )
    .unwrap();
    assert!(r3.passes, "{r3:?}");
    assert!((r3.opt_small - 2.0 / 3.0).abs() <= 2e-3 && (r3.opt_big - 2.0 / 3.0).abs() <= 2e-3);
    let r2 = theorem1_ppt_invariance(
        &bell_states().take(2).unwrap(),
        &dims(&[4, 3]),
        &Cuts::AllOneVsRest,
        &opts,
    )
    .unwrap();
    assert!(r2.passes, "{r2:?}");
    assert!((r2.opt_small - 1.0).abs() <= 1e-4 && (r2.opt_big - 1.0).abs() <= 1e-4);
    let r0 = theorem1_ppt_invariance(
        &bell_states().take(3).unwrap(),
        &dims(&[2, 2]),
        &Cuts::AllOneVsRest,
        &opts,
    )
    .unwrap();
    assert_eq!(r0.delta, 0.0);
}

/// The nearest PSD matrix `P` to a Hermitian `H` is characterized by
/// `P >= 0`, `H - P <= 0` and `<P, H - P> = 0`.
#[test]
fn psd_projection_satisfies_optimality_conditions() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(2..8);
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = g.hermitian_part();
        let p = project_psd(&h).unwrap();
        let rest = &h - &p;
        assert!(min_eig(&p) >= -1e-12);
        assert!(hermitian_eigen(&rest).unwrap().max() <= 1e-12);
        assert!(p.frobenius_inner(&rest).abs() <= 1e-12);
    }
}

#[test]
fn trace_identity_random_povms() {
    let set = bell_states();
    for seed in 0..50 {
        let p = random_povm(&dims(&[3, 3]), 4, seed).unwrap();
        assert!(theorem1_trace_identity(&set, &p, &dims(&[2, 2])).unwrap() <= 1e-12);
    }
}

#[test]
fn conditional_tree_leaf_count() {
    let z = |k: usize| {
        let mut v = [0.0; 2];
        v[k] = 1.0;
        ComplexMatrix::from_diag(&v)
    };
    let x = |s: f64| ComplexMatrix::from_real(2, 2, &[0.5, 0.5 * s, 0.5 * s, 0.5]).unwrap();
    // party 1 measures Z after outcome 0 and X after outcome 1
    let root = Locc1Node::new(0, vec![z(0), z(1)], |j| {
        Some(if j == 0 {
            Locc1Node::leaf(1, vec![z(0), z(1)])
        } else {
            Locc1Node::leaf(1, vec![x(1.0), x(-1.0)])
        })
    });
    let tree = Locc1Tree::new(dims(&[2, 2]), vec![0, 1], root).unwrap();
    let p = flatten_locc1(&tree).unwrap();
    assert_eq!(p.len(), 4);
    assert!(verify_povm(&p, 1e-12).unwrap().passes);
    assert!(p.elements()[3].max_abs_diff(&tensor(&z(1), &x(-1.0))) < 1e-15);
    assert!(is_ppt_povm(&p, &Cuts::AllOneVsRest, 1e-12).unwrap());
}

#[test]
fn counterexample_restriction_spectrum() {
    let p = distlab_core::povm::counterexample_c4();
    let r = restrict_povm(&p, &DimVector::single(3).unwrap()).unwrap();
    let eig = hermitian_eigen(&r.elements()[0]).unwrap();
    assert!(eig.values[0].abs() < 1e-12 && eig.values[1].abs() < 1e-12);
    assert!((eig.values[2] - 0.75).abs() < 1e-12);
}

#[test]
fn domino_and_extended_basis() {
    let set = domino_states();
    for (i, row) in set.overlaps().iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let ext = extended_domino_basis(4, 4).unwrap();
    assert_eq!(ext.len(), 16);
    let total = distlab_core::linalg::sum_matrices(ext.iter().map(|s| s.rho())).unwrap();
    assert!(total.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-9);
    assert!(global_distinguishable(&ext, 1e-9).unwrap().distinguishable);
}

#[test]
fn global_witness_agrees_with_check_perfect() {
    let sets: Vec<StateSet> = vec![bell_states(), bell_states().take(2).unwrap(), domino_states()];
    for set in sets {
        let v = global_distinguishable(&set, 1e-9).unwrap();
        assert!(v.distinguishable);
        assert!(check_perfect(&v.witness.unwrap(), &set, 1e-9).unwrap().passes);
    }
}
