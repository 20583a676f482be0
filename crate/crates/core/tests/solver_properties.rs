use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use distlab_core::discrimination::{
    check_perfect, global_distinguishable, hit_table, local_global_fuzz, ppt_distinguishability,
    ppt_distinguishability_problem, random_of_kind, theorem1_ppt_invariance, theorem1_trace_identity,
};
use distlab_core::linalg::{min_eigenvalue, partial_transpose_parties, ComplexMatrix, DimVector};
use distlab_core::povm::{random_orthonormal_states, Cuts, Povm, PovmKind};
use distlab_core::sdp::{project_psd, solve, Cone, SdpOptions, SdpStatus};
use distlab_core::states::{bell_states, domino_states, StateSet};
use distlab_core::Complex64;

fn dims(d: &[usize]) -> DimVector {
    DimVector::new(d.to_vec()).unwrap()
}

fn random_hermitian(seed: u64, n: usize) -> ComplexMatrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    })
    .hermitian_part()
}

/// `(1 - eps) M_j + eps I / J`.
fn blur(p: &Povm, eps: f64) -> Povm {
    let n = p.dims().total();
    let share = ComplexMatrix::identity(n).scale(eps / p.len() as f64);
    let elements = p.elements().iter().map(|m| &m.scale(1.0 - eps) + &share).collect();
    Povm::new(p.dims().clone(), elements).unwrap()
}

fn small_sets() -> impl Strategy<Value = StateSet> {
    (
        any::<u64>(),
        2usize..=3,
        prop_oneof![Just(vec![2, 2]), Just(vec![2, 3])],
    )
        .prop_map(|(seed, n, d)| random_orthonormal_states(&dims(&d), n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn psd_projection_is_idempotent_and_non_expansive(s1: u64, s2: u64, n in 1usize..8) {
        let (a, b) = (random_hermitian(s1, n), random_hermitian(s2, n));
        let (pa, pb) = (project_psd(&a).unwrap(), project_psd(&b).unwrap());
        prop_assert!(project_psd(&pa).unwrap().max_abs_diff(&pa) <= 1e-12);
        prop_assert!((&pa - &pb).frobenius_norm() <= (&a - &b).frobenius_norm() + 1e-12);
        // no PSD matrix is closer than the projection
        let g = random_hermitian(s2 ^ 0x5555, n);
        let q = g.matmul(&g);
        prop_assert!((&a - &pa).frobenius_norm() <= (&a - &q).frobenius_norm() + 1e-12);
    }

    #[test]
    fn hit_table_rows_sum_to_one(seed: u64, kind in prop_oneof![Just(PovmKind::General), Just(PovmKind::Sep), Just(PovmKind::Locc1)]) {
        let d = dims(&[3, 3]);
        let povm = random_of_kind(kind, &d, seed).unwrap();
        let set = random_orthonormal_states(&d, 4, seed.wrapping_add(1)).unwrap();
        for row in hit_table(&povm, &set).unwrap() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(row.iter().all(|&h| h >= -1e-9));
        }
    }

    #[test]
    fn check_perfect_is_monotone_in_tol(seed: u64, eps in 0.0f64..1e-3, t1 in 1e-12f64..1e-2, t2 in 1e-12f64..1e-2) {
        let set = random_orthonormal_states(&dims(&[2, 3]), 3, seed).unwrap();
        let witness = global_distinguishable(&set, 1e-9).unwrap().witness.unwrap();
        let p = blur(&witness, eps);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        if check_perfect(&p, &set, lo).unwrap().passes {
            prop_assert!(check_perfect(&p, &set, hi).unwrap().passes);
        }
    }

    #[test]
    fn global_witness_passes_its_own_check(seed: u64, n in 1usize..=6) {
        let set = random_orthonormal_states(&dims(&[2, 3]), n, seed).unwrap();
        let v = global_distinguishable(&set, 1e-9).unwrap();
        prop_assert!(v.distinguishable);
        prop_assert!(check_perfect(&v.witness.unwrap(), &set, 1e-9).unwrap().passes);
    }

    #[test]
    fn trace_identity_holds_for_every_kind(seed: u64, kind in prop_oneof![Just(PovmKind::General), Just(PovmKind::Ppt), Just(PovmKind::Sep), Just(PovmKind::Locc1)]) {
        let big = random_of_kind(kind, &dims(&[4, 3]), seed).unwrap();
        prop_assert!(theorem1_trace_identity(&bell_states(), &big, &dims(&[2, 2])).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solution_is_reproducible_and_respects_cones(set in small_sets()) {
        let p = ppt_distinguishability_problem(&set, &Cuts::AllOneVsRest).unwrap();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        prop_assert!((p.evaluate(&sol.blocks) - sol.objective).abs() <= 1e-10);
        for (block, cones) in sol.blocks.iter().zip(p.cones()) {
            for cone in cones {
                let m = match cone {
                    Cone::Psd => block.clone(),
                    Cone::Ppt { dims, cut } => partial_transpose_parties(block, dims, cut).unwrap(),
                };
                prop_assert!(min_eigenvalue(&m).unwrap() >= -sol.residuals.cone - 1e-12);
            }
        }
    }

    #[test]
    fn fixed_point_residual_does_not_increase(set in small_sets()) {
        let p = ppt_distinguishability_problem(&set, &Cuts::AllOneVsRest).unwrap();
        let opts = SdpOptions { tol: 1e-8, ..SdpOptions::default() };
        let sol = solve(&p, &opts).unwrap();
        let tail: Vec<f64> = sol.checkpoints.iter().rev().take(10).rev().map(|c| c.fixed_point).collect();
        prop_assert!(tail.len() >= 2);
        for w in tail.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15, "{:?}", tail);
        }
    }

    #[test]
    fn objective_scaling_scales_the_optimum(set in small_sets(), c in 0.05f64..20.0) {
        let p = ppt_distinguishability_problem(&set, &Cuts::AllOneVsRest).unwrap();
        let opts = SdpOptions::default();
        let base = solve(&p, &opts).unwrap();
        let scaled = solve(&p.scaled(c), &opts).unwrap();
        prop_assert!((scaled.objective - c * base.objective).abs() <= c * opts.tol);
        for (x, y) in base.blocks.iter().zip(&scaled.blocks) {
            prop_assert!(x.max_abs_diff(y) <= opts.tol);
        }
    }

    #[test]
    fn optimum_ignores_state_order(set in small_sets(), rot in 1usize..3) {
        let n = set.len();
        let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted = set.select(&order).unwrap();
        let opts = SdpOptions::default();
        let a = ppt_distinguishability(&set, &Cuts::AllOneVsRest, &opts).unwrap();
        let b = ppt_distinguishability(&permuted, &Cuts::AllOneVsRest, &opts).unwrap();
        prop_assert!((a.optimum - b.optimum).abs() <= 1e-6, "{} vs {}", a.optimum, b.optimum);
    }
}

#[test]
fn embedding_leaves_ppt_optimum_unchanged() {
    let opts = SdpOptions::default();
    let mut families: Vec<(StateSet, DimVector)> = Vec::new();
    let bell = bell_states();
    for subset in [
        vec![0, 1],
        vec![0, 2],
        vec![1, 3],
        vec![0, 1, 2],
        vec![1, 2, 3],
        vec![0, 1, 2, 3],
    ] {
        families.push((bell.select(&subset).unwrap(), dims(&[3, 3])));
    }
    families.push((domino_states(), dims(&[4, 3])));
    for seed in 0..3 {
        families.push((
            random_orthonormal_states(&dims(&[2, 2]), 3, seed).unwrap(),
            dims(&[3, 3]),
        ));
    }
    for (set, new_dims) in families {
        let r = theorem1_ppt_invariance(&set, &new_dims, &Cuts::AllOneVsRest, &opts).unwrap();
        assert!(r.delta.abs() <= 2.0 * opts.tol, "{r:?}");
        assert!(r.passes);
    }
}

#[test]
fn sampled_local_global_property() {
    let kinds = [PovmKind::Locc1, PovmKind::Sep, PovmKind::Ppt, PovmKind::General];
    let r = local_global_fuzz(&bell_states().take(3).unwrap(), &kinds, &dims(&[3, 3]), 50, 42).unwrap();
    assert!(r.passes, "{:?}", r.failures);
    assert_eq!(r.checks, 200);
    assert!(r.max_trace_residual.unwrap() <= 1e-12);
    let r = local_global_fuzz(&domino_states(), &[PovmKind::Sep], &dims(&[4, 4]), 50, 7).unwrap();
    assert!(r.passes, "{:?}", r.failures);
    let empty = local_global_fuzz(&domino_states(), &[PovmKind::Sep], &dims(&[4, 4]), 0, 7).unwrap();
    assert!(empty.passes && empty.checks == 0 && empty.failures.is_empty());
}
