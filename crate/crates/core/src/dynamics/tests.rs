use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::random;

fn ctx(n: usize) -> AlgebraCtx {
    AlgebraCtx::new(n).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Two fixed "generic" qubit unitaries; their channel is primitive.
pub(crate) fn generic_qubit_channel() -> Dynamics {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let k = ctx(2);
    let u1 = random::unitary(k, &mut rng);
    let u2 = random::unitary(k, &mut rng);
    Dynamics::kraus(k, vec![(0.5, u1), (0.5, u2)]).unwrap()
}

fn sample_dynamics(seed: u64, n: usize) -> Vec<Dynamics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ctx(n);
    let u = random::unitary(k, &mut rng);
    let perm = random::permutation(n, &mut rng);
    let kraus = Dynamics::kraus(
        k,
        vec![(0.3, random::unitary(k, &mut rng)), (0.7, random::unitary(k, &mut rng))],
    )
    .unwrap();
    let unit = Dynamics::unitary(u).unwrap();
    let perm = Dynamics::permutation(k, perm).unwrap();
    vec![
        unit.clone(),
        perm.clone(),
        kraus.clone(),
        Dynamics::compose(k, vec![unit.clone(), kraus]).unwrap(),
        Dynamics::power(perm, 3),
    ]
}

/// Naive triple loop `(a b c)_{ij} = Σ a_ik b_kl c_lj`.
fn dense_triple(a: &CMat, b: &CMat, cm: &CMat) -> CMat {
    let n = a.nrows();
    CMat::from_fn(n, n, |i, j| {
        let mut s = c(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                s += a[(i, k)] * b[(k, l)] * cm[(l, j)];
            }
        }
        s
    })
}

#[test]
fn construction_errors() {
    let k = ctx(2);
    assert!(matches!(Dynamics::unitary(Operator::unit(k, 0, 1)), Err(Error::NotUnitary(_))));
    assert!(Dynamics::permutation(k, vec![0, 0]).is_err());
    assert!(Dynamics::permutation(k, vec![0]).is_err());
    let id = Operator::identity(k);
    assert!(Dynamics::kraus(k, vec![(0.5, id.clone())]).is_err());
    assert!(Dynamics::kraus(k, vec![(1.5, id.clone()), (-0.5, id)]).is_err());
    assert!(Dynamics::kraus(k, vec![]).is_err());
    let d = Dynamics::identity(k);
    assert!(d.apply(&Operator::identity(ctx(3))).is_err());
}

#[test]
fn apply_fixes_identity() {
    for n in [1, 2, 4] {
        for d in sample_dynamics(n as u64, n) {
            let id = Operator::identity(ctx(n));
            assert!((&d.apply(&id).unwrap() - &id).op_norm() < 1e-12);
        }
    }
}

#[test]
fn unitary_conjugation_phase_example() {
    let k = ctx(2);
    let u = Operator::diag(k, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    let x = Operator::unit(k, 0, 1);
    let oracle = dense_triple(u.matrix(), x.matrix(), &u.matrix().adjoint());
    let d = Dynamics::unitary(u).unwrap();
    let got = d.apply(&x).unwrap();
    assert!((got.matrix() - &oracle).norm() < 1e-15);
    assert!((&got - &(Operator::unit(k, 0, 1) * c(0.0, -1.0))).op_norm() < 1e-15);
}

#[test]
fn kraus_apply_matches_dense_oracle() {
    let d = generic_qubit_channel();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random::ginibre(ctx(2), &mut rng);
    let DynamicsKind::KrausChannel(terms) = d.kind() else { unreachable!() };
    let mut oracle = CMat::zeros(2, 2);
    for (w, u) in terms {
        oracle += dense_triple(&u.matrix().adjoint(), x.matrix(), u.matrix()) * c(*w, 0.0);
    }
    assert!((d.apply(&x).unwrap().matrix() - oracle).norm() < 1e-14);
}

#[test]
fn swap_reverses_diagonal() {
    let k = ctx(2);
    let d = Dynamics::permutation(k, vec![1, 0]).unwrap();
    let x = Operator::diag_real(k, &[2.0, -7.0]).unwrap();
    let expect = Operator::diag_real(k, &[-7.0, 2.0]).unwrap();
    assert_eq!(d.apply(&x).unwrap(), expect);
}

#[test]
fn iterate_examples() {
    let k = ctx(5);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random::ginibre(k, &mut rng);
    let d = Dynamics::cyclic_shift(k);
    assert_eq!(d.iterate(&x, 0).unwrap(), vec![x.clone()]);

    let id = Operator::identity(k);
    assert!(d.iterate(&id, 6).unwrap().iter().all(|y| *y == id));

    let orbit = d.iterate(&x, 5).unwrap();
    let mut brute = x.clone();
    for j in 1..=5 {
        brute = d.apply(&brute).unwrap();
        assert_eq!(orbit[j], brute);
    }
    assert_eq!(orbit[5], orbit[0]);
}

#[test]
fn superoperator_examples() {
    let k = ctx(3);
    let s = Dynamics::identity(k).superoperator();
    assert!((&s - CMat::identity(9, 9)).norm() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = Dynamics::unitary(random::unitary(k, &mut rng)).unwrap().superoperator();
    assert!((s.adjoint() * &s - CMat::identity(9, 9)).norm() < 1e-12);

    for d in sample_dynamics(10, 3) {
        // oracle: direct SVD of the superoperator
        let sv = d.superoperator().svd(false, false).singular_values;
        assert!(sv.iter().all(|&v| v <= 1.0 + 1e-10), "{sv:?}");
    }
}

#[test]
fn cyclic_shift_fixed_space_matches_orbit_count() {
    let k = ctx(4);
    let d = Dynamics::cyclic_shift(k);
    // oracle: fixed points of x ↦ PxP* are constant on orbits of π×π on index pairs
    let perm: Vec<usize> = (0..4).map(|i| (i + 1) % 4).collect();
    let mut seen = [[false; 4]; 4];
    let mut orbits = 0;
    for i in 0..4 {
        for j in 0..4 {
            if !seen[i][j] {
                orbits += 1;
                let (mut a, mut b) = (i, j);
                while !seen[a][b] {
                    seen[a][b] = true;
                    (a, b) = (perm[a], perm[b]);
                }
            }
        }
    }
    let full = d.validate(4, 1);
    assert_eq!(full.fixed_space_dim, orbits);
    assert!(full.fixed_space_dim > 1 && !full.ergodic);
    assert!(full.homomorphism);

    let diag = d.on_subalgebra(Subalgebra::Diagonal).unwrap().validate(4, 1);
    assert!(diag.ergodic && !diag.weakly_mixing);
    let expect = [0.0, 0.25, 0.5, 0.75];
    assert_eq!(diag.unimodular_spectrum.len(), 4);
    for (a, b) in diag.unimodular_spectrum.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn unitary_conjugation_is_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=4 {
        let d = Dynamics::unitary(random::unitary(ctx(n), &mut rng)).unwrap();
        let r = d.validate(8, 3);
        assert!(r.homomorphism && r.trace_preserving && r.positive_on_samples && r.contraction_inf);
        assert_eq!(r.ergodic, n == 1);
    }
}

#[test]
fn generic_qubit_channel_is_ergodic_not_multiplicative() {
    let d = generic_qubit_channel();
    let r = d.validate(16, 5);
    assert!(r.ergodic && r.weakly_mixing);
    assert!(!r.homomorphism);
    assert!(r.trace_preserving && r.positive_on_samples && r.contraction_inf);
    assert!(r.spectral_gap > 0.0 && r.spectral_gap < 1.0);
    // witness pair for non-multiplicativity
    let k = ctx(2);
    let (a, b) = (Operator::unit(k, 0, 1), Operator::unit(k, 1, 0));
    let lhs = d.apply(&(&a * &b)).unwrap();
    let rhs = &d.apply(&a).unwrap() * &d.apply(&b).unwrap();
    assert!((&lhs - &rhs).op_norm() > 1e-3);
}

#[test]
fn diagonal_restriction_rejects_non_invariant_dynamics() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let d = Dynamics::unitary(random::unitary(ctx(3), &mut rng)).unwrap();
    assert!(d.on_subalgebra(Subalgebra::Diagonal).is_err());
}

#[test]
fn ergodicity_stable_under_coprime_power() {
    let d = Dynamics::cyclic_shift(ctx(12)).on_subalgebra(Subalgebra::Diagonal).unwrap();
    let base = d.validate(2, 0).fixed_space_dim;
    for k in [5u32, 7, 11] {
        assert_eq!(Dynamics::power(d.clone(), k).validate(2, 0).fixed_space_dim, base);
    }
    assert_eq!(Dynamics::power(d, 4).validate(2, 0).fixed_space_dim, 4);
}

#[test]
fn tensor_shift_moves_sites() {
    let d = Dynamics::qubit_cyclic_shift(3).unwrap();
    let k = d.ctx();
    let z = |site: usize| {
        let e: Vec<f64> = (0..8).map(|b| if b >> site & 1 == 1 { -1.0 } else { 1.0 }).collect();
        Operator::diag_real(k, &e).unwrap()
    };
    assert_eq!(d.apply(&z(0)).unwrap(), z(1));
    assert_eq!(d.apply(&z(2)).unwrap(), z(0));
}

#[test]
fn json_round_trip() {
    for d in sample_dynamics(21, 3) {
        let s = serde_json::to_string(&d).unwrap();
        let back: Dynamics = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }
    let diag = Dynamics::cyclic_shift(ctx(3)).on_subalgebra(Subalgebra::Diagonal).unwrap();
    let s = serde_json::to_string(&diag).unwrap();
    assert!(s.contains("\"subalgebra\":\"diagonal\""));
    assert!(s.contains("\"type\":\"permutation_conjugation\""));
    assert_eq!(serde_json::from_str::<Dynamics>(&s).unwrap(), diag);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_isometry_positivity_superop(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let k = ctx(n);
        for d in sample_dynamics(seed, n) {
            let x = random::ginibre(k, &mut rng);
            let ax = d.apply(&x).unwrap();
            prop_assert!((ax.trace() - x.trace()).norm() <= 1e-12 * x.norm2().max(1.0));
            if d.is_homomorphism_kind() {
                prop_assert!((ax.norm2() - x.norm2()).abs() <= 1e-12 * x.norm2().max(1.0));
            }
            let y = random::ginibre(k, &mut rng);
            prop_assert!(d.apply(&(&y.adjoint() * &y)).unwrap().is_positive());
            let via_s = d.from_coefficients(&(d.superoperator() * d.coefficients(&x)));
            prop_assert!((&via_s - &ax).op_norm() <= 1e-12 * x.op_norm().max(1.0));
        }
    }
}
