mod common;

use common::{generator_ops, max_abs_diff, rep, Kronecker};
use projgap_core::cocycle::PairCocycles;
use projgap_core::experiment::{norm_pair, norm_single, PairMethod, RunConfig};
use projgap_core::group::EnumCaps;
use projgap_core::rep::TensorSumOperator;
use projgap_core::sector::SectorReduction;
use projgap_core::spectral::{
    norm_dense, norm_estimate, norm_power, random_unit_vector, to_dense, LinearOperator,
    PowerOptions, Solver,
};
use projgap_core::word::generator_tuple;

fn apply(
    op: &dyn LinearOperator,
    x: &[num_complex::Complex64],
    adjoint: bool,
) -> Vec<num_complex::Complex64> {
    let mut y = vec![num_complex::Complex64::new(0.0, 0.0); op.dim()];
    if adjoint {
        op.apply_adjoint(x, &mut y);
    } else {
        op.apply(x, &mut y);
    }
    y
}

#[test]
fn tensor_apply_matches_explicit_kronecker() {
    for (k, kp) in [(1u64, 3u64), (2, 2), (3, 2), (2, 3)] {
        let (r1, r2) = (rep(k), rep(kp));
        let (a, b) = (generator_ops(&r1, 3), generator_ops(&r2, 3));
        let op = TensorSumOperator::new(&a, &b).unwrap();
        let oracle = Kronecker::new(&a, &b);
        for seed in 0..3 {
            let x = random_unit_vector(op.dim(), seed);
            assert!(
                max_abs_diff(&apply(&op, &x, false), &oracle.apply(&x)) <= 1e-12,
                "({k},{kp})"
            );
            assert!(
                max_abs_diff(&apply(&op, &x, true), &oracle.apply_adjoint(&x)) <= 1e-12,
                "({k},{kp})"
            );
        }
    }
}

#[test]
fn norm_estimates_match_dense_up_to_dim_2000() {
    let opts = PowerOptions::default();
    for k in 1..=4u64 {
        let r = rep(k);
        for m in [2, 3, 4] {
            let ops = generator_ops(&r, m);
            let op = TensorSumOperator::single(&ops).unwrap();
            let dense = norm_dense(&to_dense(&op, 2000).unwrap()).unwrap();
            let p = norm_power(&op, &opts).unwrap();
            let l = norm_estimate(&op, &opts).unwrap();
            for e in p.per_seed.iter().chain(&l.per_seed) {
                assert!(e.converged);
                assert!(
                    (e.value - dense).abs() <= 1e-8 * dense,
                    "k={k} m={m}: {} vs {dense}",
                    e.value
                );
                assert!(e.value <= m as f64 + 1e-9);
            }
        }
    }
}

#[test]
fn conjugated_operator_has_the_same_norm() {
    let (a, b) = (generator_ops(&rep(3), 3), generator_ops(&rep(2), 3));
    let op = TensorSumOperator::new(&a, &b).unwrap();
    let opts = PowerOptions::default();
    let n1 = norm_estimate(&op, &opts).unwrap().best.value;
    let n2 = norm_estimate(&op.conjugated(), &opts).unwrap().best.value;
    assert!((n1 - n2).abs() <= 1e-8 * n1);
}

#[test]
fn reduced_route_matches_direct_tensor_route() {
    let cfg = RunConfig::default();
    for (k, kp) in [(2u64, 3u64), (3, 3), (3, 4)] {
        let red = norm_pair(k, kp, 3, PairMethod::Reduced, &cfg).unwrap();
        let dir = norm_pair(k, kp, 3, PairMethod::Tensor, &cfg).unwrap();
        assert!(red.all_converged && dir.all_converged);
        assert!(
            (red.norm.value - dir.norm.value).abs() <= 1e-8 * dir.norm.value,
            "({k},{kp}): {} vs {}",
            red.norm.value,
            dir.norm.value
        );
        assert_eq!(red.dim, dir.dim);
    }
}

#[test]
fn pairs_with_k_dividing_kprime_match_the_single_group() {
    // the quotient representation tensored with a regular one is a multiple of a regular one
    let cfg = RunConfig::default();
    for (k, kp) in [(1u64, 4u64), (2, 4), (3, 6)] {
        let pair = norm_pair(k, kp, 3, PairMethod::Reduced, &cfg).unwrap();
        let single = norm_single(kp, 3, &cfg).unwrap();
        assert!(
            (pair.norm.value - single.norm.value).abs() <= 1e-8,
            "({k},{kp})"
        );
    }
}

#[test]
fn equal_pullback_cocycles_give_equal_norms() {
    // (3,4) and (4,6) both pull back to c_12 on the level-12 group
    let cfg = RunConfig::default();
    let a = norm_pair(3, 4, 3, PairMethod::Reduced, &cfg).unwrap();
    let b = norm_pair(4, 6, 3, PairMethod::Reduced, &cfg).unwrap();
    assert!((a.norm.value - b.norm.value).abs() <= 1e-8);
}

#[test]
fn lanczos_and_power_agree_on_sector_blocks() {
    let p = PairCocycles::build(3, 4, EnumCaps::default()).unwrap();
    let gens: Vec<usize> = generator_tuple(&p.pullback, 3)
        .unwrap()
        .iter()
        .map(|x| p.pullback.index(x).unwrap())
        .collect();
    let red = SectorReduction::new(p.pullback.clone(), &p.tensor, &gens).unwrap();
    for j in red.sectors() {
        let op = red.sector_operator(j).unwrap();
        let power = PowerOptions {
            solver: Solver::Power,
            ..PowerOptions::default()
        };
        let a = norm_estimate(&op, &power).unwrap();
        let b = norm_estimate(&op, &PowerOptions::default()).unwrap();
        assert!(a.all_converged() && b.all_converged());
        assert!(
            (a.best.value - b.best.value).abs() <= 1e-8 * a.best.value,
            "sector {j}"
        );
    }
}
