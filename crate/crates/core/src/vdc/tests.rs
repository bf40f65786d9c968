use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::averages::{ergodic_avg, weighted_avg};
use crate::dynamics::tests::generic_qubit_channel;
use crate::spectral::correlation;
use crate::Subalgebra;

fn ctx(n: usize) -> AlgebraCtx {
    AlgebraCtx::new(n).unwrap()
}

/// RHS − LHS by literal double summation, `a_j = 0` for `j ≥ n`.
fn gap_oracle(a: &[Operator], m: usize) -> CMat {
    let n = a.len();
    let dim = a[0].dim();
    let get = |j: usize| if j < n { a[j].matrix().clone() } else { CMat::zeros(dim, dim) };
    let c = (n + m) as f64 / (m + 1) as f64;
    let mut lhs = CMat::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            lhs += get(i).adjoint() * get(j);
        }
    }
    let mut rhs = CMat::zeros(dim, dim);
    for k in 0..n {
        rhs += get(k).adjoint() * get(k) * C64::new(c, 0.0);
        for l in 1..=m {
            let w = 2.0 * c * (m - l + 1) as f64 / (m + 1) as f64;
            let t = get(k).adjoint() * get(k + l);
            rhs += (&t + t.adjoint()) * C64::new(w / 2.0, 0.0);
        }
    }
    rhs - lhs
}

#[test]
fn single_term_gap_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = vec![random::ginibre(ctx(3), &mut rng)];
    let c = vdc_gap(&a, 0).unwrap();
    assert!(c.gap_min_eig.abs() < 1e-12 && c.gap_norm < 1e-12);
    assert!(c.operator_holds());
}

#[test]
fn identity_terms_match_scalar_arithmetic() {
    for n in 1..=8usize {
        for m in 0..n {
            let a = vec![Operator::identity(ctx(2)); n];
            let c = vdc_gap(&a, m).unwrap();
            let cst = (n + m) as f64 / (m + 1) as f64;
            let coeff = cst * n as f64
                + 2.0 * cst * (1..=m).map(|l| (m - l + 1) as f64 / (m + 1) as f64 * (n - l) as f64).sum::<f64>();
            let expected = coeff - (n * n) as f64;
            assert!(expected >= -1e-12, "n={n} m={m}");
            assert!((c.gap_min_eig - expected).abs() < 1e-9, "n={n} m={m}");
        }
    }
}

#[test]
fn printed_constant_fails_where_classical_holds() {
    // (n−1+m)/(m+1) with a_k = 𝕀, n = 2, m = 1: 2 + 1 < 4
    let (n, m) = (2usize, 1usize);
    let printed = (n - 1 + m) as f64 / (m + 1) as f64;
    let coeff = printed * n as f64 + 2.0 * printed * 0.5 * (n - 1) as f64;
    assert!(coeff < (n * n) as f64);
    assert!(vdc_gap(&vec![Operator::identity(ctx(1)); n], m).unwrap().gap_min_eig >= 0.0);
}

#[test]
fn range_errors() {
    assert!(vdc_gap(&[], 0).is_err());
    let a = vec![Operator::identity(ctx(2)); 3];
    assert!(matches!(vdc_gap(&a, 3), Err(Error::InvalidParameter(_))));
    let mixed = vec![Operator::identity(ctx(2)), Operator::identity(ctx(3))];
    assert!(matches!(vdc_gap(&mixed, 0), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn norm_bound_examples() {
    let zero = vec![Operator::zero(ctx(2)); 4];
    let c = vdc_norm_bound(&zero, 2).unwrap();
    assert_eq!((c.lhs_norm, c.rhs_norm_bound), (0.0, 0.0));
    assert!(c.norm_holds(0.0));
    let one = vec![Operator::identity(ctx(2)); 5];
    let c = vdc_norm_bound(&one, 0).unwrap();
    assert!((c.lhs_norm - 1.0).abs() < 1e-14);
    assert!((c.rhs_norm_bound - 2.0).abs() < 1e-14);
}

#[test]
fn random_suite_matches_oracle_and_certifies() {
    let rows = fuzz_suite(300, 77, 6, 8);
    for r in &rows {
        assert!(r.operator_holds(), "{r:?}");
        assert!(r.norm_holds(1e-9), "{r:?}");
        let (a, m) = fuzz_instance(r.seed, 6, 8);
        assert_eq!((a.len(), m, a[0].dim()), (r.n, r.m, r.dim));
        let oracle = gap_oracle(&a, m);
        let min = linalg::min_hermitian_eigenvalue(&oracle);
        assert!((min - r.gap_min_eig).abs() <= 1e-9 * r.gap_norm.max(1.0));
        let c = vdc_gap(&a, m).unwrap();
        assert!(c.norm_holds(1e-9));
    }
    let mut pairs: Vec<(usize, usize)> = rows.iter().map(|r| (r.n, r.m)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    assert!(pairs.len() >= 30);
}

#[test]
fn fuzz_suite_is_deterministic() {
    assert_eq!(fuzz_suite(40, 5, 6, 8), fuzz_suite(40, 5, 6, 8));
}

#[test]
fn lemma2_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = ctx(4);
    let a = random::ginibre(k, &mut rng);
    let b = random::ginibre(k, &mut rng);
    assert_eq!(lemma2_identity_check(&a, &b, &Projection::identity(k)).unwrap(), 0.0);
    assert_eq!(lemma2_identity_check(&a, &b, &Projection::zero(k)).unwrap(), 0.0);
    for _ in 0..20 {
        let e = random::projection(k, 2, &mut rng);
        assert!(lemma2_identity_check(&a, &b, &e).unwrap() < 1e-12 * (1.0 + a.op_norm() * b.op_norm()));
    }
}

fn q_cycle(q: usize) -> Dynamics {
    Dynamics::cyclic_shift(ctx(q)).on_subalgebra(Subalgebra::Diagonal).unwrap()
}

fn mean_zero_diagonal(q: usize, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..q).map(|_| rand::RngExt::random::<f64>(&mut rng) - 0.5).collect();
    let mean = v.iter().sum::<f64>() / q as f64;
    let v: Vec<f64> = v.iter().map(|t| t - mean).collect();
    Operator::diag_real(ctx(q), &v).unwrap()
}

#[test]
fn zero_observable_chain() {
    let d = q_cycle(6);
    let grid = LambdaGrid::roots_of_unity(16).unwrap();
    let r = ww_bound_chain(&d, &Operator::zero(ctx(6)), &Projection::identity(ctx(6)), 10, 3, &grid).unwrap();
    assert_eq!((r.uniform_sup_sq, r.bound), (0.0, 0.0));
}

#[test]
fn m_zero_chain_against_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = LambdaGrid::roots_of_unity(32).unwrap();
    for n_dim in [2, 3] {
        let k = ctx(n_dim);
        let d = Dynamics::unitary(random::unitary(k, &mut rng)).unwrap();
        let x = random::ginibre(k, &mut rng);
        let p = random::projection(k, 1, &mut rng);
        for n in [1, 5, 40] {
            let r = ww_bound_chain(&d, &x, &p, n, 0, &grid).unwrap();
            let pm = p.as_operator();
            let sup = (0..grid.len())
                .map(|i| (&weighted_avg(&d, &x, grid.point(i), n).unwrap() * pm).op_norm())
                .fold(0.0, f64::max);
            let diag = (&(pm * &ergodic_avg(&d, &(&x.adjoint() * &x), n).unwrap()) * pm).op_norm();
            assert!((r.uniform_sup_sq - sup * sup).abs() < 1e-10);
            assert!((r.bound - 2.0 * diag).abs() < 1e-10);
            assert!(r.holds(1e-12));
        }
    }
}

#[test]
fn correlation_terms_against_direct_averages() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = ctx(3);
    let d = Dynamics::permutation(k, vec![2, 0, 1]).unwrap();
    let x = random::ginibre(k, &mut rng);
    let p = random::projection(k, 2, &mut rng);
    let grid = LambdaGrid::roots_of_unity(8).unwrap();
    let rows = bound_chain_sweep(&d, &x, &p, &[3, 7, 20], &[0, 2, 5], &grid).unwrap();
    assert_eq!(rows.len(), 9);
    let pm = p.as_operator();
    for r in &rows {
        for (i, &t) in r.correlation_terms.iter().enumerate() {
            let l = i + 1;
            let xl = d.iterate(&x, l).unwrap().pop().unwrap();
            let direct = (&(pm * &ergodic_avg(&d, &(&x.adjoint() * &xl), r.n).unwrap()) * pm).op_norm();
            assert!((t - direct).abs() < 1e-10);
        }
    }
}

#[test]
fn q_cycle_bound_near_asymptotic_prediction() {
    let q = 12;
    let d = q_cycle(q);
    let x = mean_zero_diagonal(q, 6);
    let grid = LambdaGrid::roots_of_unity(1024).unwrap();
    let m = 16;
    let r = ww_bound_chain(&d, &x, &Projection::identity(ctx(q)), 50 * q, m, &grid).unwrap();
    assert!(r.holds(1e-12));
    let c = correlation(&d, &x, m).unwrap();
    let predicted = asymptotic_bound(&c, m).unwrap();
    assert!((r.bound - predicted).abs() <= 0.1 * predicted, "{} vs {predicted}", r.bound);
}

#[test]
fn chain_rejects_channels() {
    let d = generic_qubit_channel();
    let grid = LambdaGrid::roots_of_unity(4).unwrap();
    let r = ww_bound_chain(&d, &Operator::identity(ctx(2)), &Projection::identity(ctx(2)), 4, 1, &grid);
    assert!(matches!(r, Err(Error::Unsupported(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_inequality_implies_norm_inequality(seed in any::<u64>()) {
        let (a, m) = fuzz_instance(seed, 4, 8);
        let c = vdc_gap(&a, m).unwrap();
        prop_assert!(c.operator_holds());
        prop_assert!(c.norm_holds(1e-9));
    }

    #[test]
    fn chain_holds_on_random_automorphisms(seed in any::<u64>(), n in 1usize..60, m in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = ctx(3);
        let d = Dynamics::unitary(random::unitary(k, &mut rng)).unwrap();
        let x = random::ginibre(k, &mut rng);
        let p = random::projection(k, 2, &mut rng);
        let grid = LambdaGrid::roots_of_unity(64).unwrap();
        let r = ww_bound_chain(&d, &x, &p, n, m.min(n - 1), &grid).unwrap();
        prop_assert!(r.holds(1e-10), "{:?}", r);
    }
}
