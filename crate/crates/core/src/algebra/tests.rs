use self::approx_eq::close;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

mod approx_eq {
    pub fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }
}

fn ctx(n: usize) -> AlgebraCtx {
    AlgebraCtx::new(n).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn zero_dimension_rejected() {
    assert!(AlgebraCtx::new(0).is_err());
}

#[test]
fn trace_examples() {
    assert_eq!(Operator::identity(ctx(5)).trace(), c(1.0, 0.0));
    let d = Operator::diag_real(ctx(2), &[1.0, 0.0]).unwrap();
    assert_eq!(d.trace(), c(0.5, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random::ginibre(ctx(4), &mut rng);
    let t = (&x.adjoint() * &x).trace();
    assert!(t.re >= 0.0 && t.im.abs() < 1e-14);
}

#[test]
fn inner_examples() {
    let k = ctx(3);
    assert!((Operator::identity(k).inner(&Operator::identity(k)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(Operator::unit(k, 0, 0).inner(&Operator::unit(k, 1, 1)).unwrap(), c(0.0, 0.0));
    assert!(Operator::identity(k).inner(&Operator::identity(ctx(2))).is_err());
}

#[test]
fn lp_norm_examples() {
    for p in [1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY] {
        assert!(close(Operator::identity(ctx(3)).lp_norm(p).unwrap(), 1.0, 1e-14));
        let d = Operator::diag_real(ctx(2), &[1.0, 0.0]).unwrap();
        let expect = if p.is_infinite() { 1.0 } else { 0.5f64.powf(1.0 / p) };
        assert!(close(d.lp_norm(p).unwrap(), expect, 1e-14));
    }
    assert!(matches!(Operator::identity(ctx(2)).lp_norm(0.5), Err(Error::InvalidExponent(_))));
    assert!(Operator::identity(ctx(2)).lp_norm(f64::NAN).is_err());
}

#[test]
fn lp_norm_monotone_against_eigenvalue_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ps = [1.0, 1.25, 2.0, 3.5, 8.0, f64::INFINITY];
    for _ in 0..50 {
        let x = random::hermitian(ctx(5), &mut rng);
        // oracle: for Hermitian x the singular values are |eigenvalues|
        let (eigs, _) = crate::linalg::hermitian_eigh(x.matrix());
        let oracle = |p: f64| {
            if p.is_infinite() {
                eigs.iter().map(|v| v.abs()).fold(0.0, f64::max)
            } else {
                (eigs.iter().map(|v| v.abs().powf(p)).sum::<f64>() / 5.0).powf(1.0 / p)
            }
        };
        let mut prev = 0.0;
        for &p in &ps {
            let v = x.lp_norm(p).unwrap();
            assert!(close(v, oracle(p), 1e-12 * v.max(1.0)));
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}

#[test]
fn abs_examples() {
    let k = ctx(2);
    let id = Operator::identity(k);
    assert!((&id.abs() - &id).op_norm() < 1e-14);
    assert!((&(-&id).abs() - &id).op_norm() < 1e-14);
    let d = Operator::diag_real(k, &[3.0, -4.0]).unwrap().abs();
    assert!((&d - &Operator::diag_real(k, &[3.0, 4.0]).unwrap()).op_norm() < 1e-13);
}

#[test]
fn spectral_projection_examples() {
    let k = ctx(3);
    let x = Operator::diag_real(k, &[1.0, 2.0, 3.0]).unwrap();
    let p = x.spectral_projection(1.5, 3.5).unwrap();
    let expect = Operator::diag_real(k, &[0.0, 1.0, 1.0]).unwrap();
    assert!((&p.as_operator().clone() - &expect).op_norm() < 1e-14);
    let all = x.spectral_projection(0.0, 10.0).unwrap();
    assert!((&all.as_operator().clone() - &Operator::identity(k)).op_norm() < 1e-14);
    let none = x.spectral_projection(-5.0, 0.5).unwrap();
    assert_eq!(none.rank(), 0);
    let nh = Operator::unit(k, 0, 1);
    assert!(matches!(nh.spectral_projection(0.0, 1.0), Err(Error::NotHermitian(_))));
}

#[test]
fn spectral_projection_commutes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random::hermitian(ctx(6), &mut rng);
    let p = x.spectral_projection(-0.3, 0.8).unwrap();
    let pm = p.as_operator();
    assert!((&(pm * &x) - &(&x * pm)).op_norm() < 1e-12);
    assert!(Projection::new(pm.clone()).is_ok());
}

#[test]
fn projection_validation() {
    let k = ctx(2);
    assert!(Projection::new(Operator::unit(k, 0, 1)).is_err());
    assert!(Projection::new(Operator::identity(k) * c(0.5, 0.0)).is_err());
    let p = Projection::new(Operator::unit(k, 0, 0)).unwrap();
    assert!(close(p.trace(), 0.5, 1e-15));
    assert!(close(p.complement().trace(), 0.5, 1e-15));
    assert!(close(p.trace_perp(), 1.0 - p.trace(), 1e-15));
}

#[test]
fn meet_examples() {
    let k = ctx(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = random::projection(k, 2, &mut rng);
    let m = e.meet(&e).unwrap();
    assert!((&m.as_operator().clone() - e.as_operator()).op_norm() < 1e-10);
    let m = e.meet(&Projection::identity(k)).unwrap();
    assert!((&m.as_operator().clone() - e.as_operator()).op_norm() < 1e-10);
}

#[test]
fn meet_of_distinct_lines_is_zero() {
    let k = ctx(2);
    let u = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let v = nalgebra::DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    // oracle: two vectors in C^2 span a 2-dim space iff det != 0, so the ranges meet trivially
    let det = u[0] * v[1] - u[1] * v[0];
    assert!(det.norm() > 1e-6);
    let e = Projection::from_spanning_vectors(k, &[u]);
    let f = Projection::from_spanning_vectors(k, &[v]);
    assert_eq!(e.meet(&f).unwrap().rank(), 0);
}

#[test]
fn measure_nbhd_examples() {
    let k = ctx(2);
    let r = Operator::zero(k).measure_nbhd(0.0, 0.0).unwrap();
    assert!(r.member);
    assert_eq!(r.witness.unwrap().rank(), 2);

    let x = Operator::diag_real(k, &[0.5, -0.25]).unwrap();
    let r = x.measure_nbhd(0.0, 0.5).unwrap();
    assert!(r.member && r.witness.unwrap().rank() == 2);

    let x = Operator::diag_real(k, &[10.0, 0.0]).unwrap();
    let r = x.measure_nbhd(0.4, 1.0).unwrap();
    assert!(!r.member && r.witness.is_none());
    let r = x.measure_nbhd(0.5, 1.0).unwrap();
    assert!(r.member);
    let w = r.witness.unwrap();
    let expect = Operator::diag_real(k, &[0.0, 1.0]).unwrap();
    assert!((&w.as_operator().clone() - &expect).op_norm() < 1e-12);

    // exhaustive oracle over the four coordinate projections of C^2
    let mut best = f64::INFINITY;
    for mask in 0..4usize {
        let idx: Vec<usize> = (0..2).filter(|i| mask >> i & 1 == 1).collect();
        let e = Projection::coordinate(k, &idx);
        if (&x * e.as_operator()).op_norm() <= 1.0 {
            best = best.min(e.trace_perp());
        }
    }
    assert_eq!(best, 0.5);
    assert!(Operator::zero(k).measure_nbhd(-1.0, 0.0).is_err());
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random::ginibre(ctx(3), &mut rng);
    let s = serde_json::to_string(&x).unwrap();
    let y: Operator = serde_json::from_str(&s).unwrap();
    assert_eq!(x, y);
    let bad = r#"{"n":2,"re":[[1,0]],"im":[[0,0],[0,0]]}"#;
    assert!(serde_json::from_str::<Operator>(bad).is_err());
}

fn seeded_pair(seed: u64, n: usize) -> (Operator, Operator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random::ginibre(ctx(n), &mut rng), random::ginibre(ctx(n), &mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tracial_identity(seed in any::<u64>(), n in 1usize..7) {
        let (x, y) = seeded_pair(seed, n);
        let d = ((&x * &y).trace() - (&y * &x).trace()).norm();
        prop_assert!(d <= 1e-12 * x.norm2() * y.norm2() + 1e-15);
        prop_assert!((x.adjoint().trace() - x.trace().conj()).norm() < 1e-15);
    }

    #[test]
    fn inner_is_conjugate_symmetric_and_cauchy_schwarz(seed in any::<u64>(), n in 1usize..7) {
        let (x, y) = seeded_pair(seed, n);
        let a = x.inner(&y).unwrap();
        let b = y.inner(&x).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
        prop_assert!(a.norm() <= x.norm2() * y.norm2() * (1.0 + 1e-12));
        prop_assert!((x.inner(&x).unwrap().re - x.norm2().powi(2)).abs() < 1e-12 * x.norm2().powi(2));
        prop_assert!(x.trace().norm() <= x.norm2() * (1.0 + 1e-12));
    }

    #[test]
    fn abs_norm_consistency(seed in any::<u64>(), n in 1usize..6, p in 1.0f64..6.0) {
        let (x, _) = seeded_pair(seed, n);
        let a = x.abs();
        prop_assert!(a.is_positive());
        let sq = &a * &a;
        let xx = &x.adjoint() * &x;
        prop_assert!((&sq - &xx).op_norm() <= 1e-10 * xx.op_norm().max(1.0));
        for q in [p, f64::INFINITY] {
            let l = x.lp_norm(q).unwrap();
            prop_assert!((l - a.lp_norm(q).unwrap()).abs() <= 1e-10 * l.max(1.0));
        }
    }

    #[test]
    fn lp_norm_triangle(seed in any::<u64>(), n in 1usize..6, p in 1.0f64..5.0) {
        let (x, y) = seeded_pair(seed, n);
        let s = (&x + &y).lp_norm(p).unwrap();
        prop_assert!(s <= x.lp_norm(p).unwrap() + y.lp_norm(p).unwrap() + 1e-12);
    }

    #[test]
    fn meet_subadditivity(seed in any::<u64>(), n in 2usize..7, r1 in 0usize..7, r2 in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = ctx(n);
        let e = random::projection(k, r1.min(n), &mut rng);
        let f = random::projection(k, r2.min(n), &mut rng);
        let m = e.meet(&f).unwrap();
        prop_assert!(Projection::new(m.as_operator().clone()).is_ok());
        prop_assert!(m.is_le(&e) && m.is_le(&f));
        prop_assert!(m.trace_perp() <= e.trace_perp() + f.trace_perp() + 1e-12);
    }

    #[test]
    fn measure_nbhd_witness_verifies(seed in any::<u64>(), n in 1usize..7, eps in 0.0f64..1.0, delta in 0.0f64..2.0) {
        let (x, _) = seeded_pair(seed, n);
        let r = x.measure_nbhd(eps, delta).unwrap();
        let over = x.singular_values().iter().filter(|&&s| s > delta).count();
        prop_assert_eq!(r.member, over as f64 / n as f64 <= eps);
        if let Some(w) = r.witness {
            prop_assert!((&x * w.as_operator()).op_norm() <= delta + 1e-10);
            prop_assert!(w.trace_perp() <= eps + 1e-12);
        }
    }
}
