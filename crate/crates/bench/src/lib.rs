//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wwlab_core::algebra::random;
use wwlab_core::{AlgebraCtx, Dynamics, Operator, Subalgebra};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cyclic shift on the diagonal algebra of `M_q` with a normalized random observable.
pub fn q_cycle(q: usize, seed: u64) -> (Dynamics, Operator) {
    let ctx = AlgebraCtx::new(q).expect("q >= 1");
    let d = Dynamics::cyclic_shift(ctx).on_subalgebra(Subalgebra::Diagonal).expect("permutations keep the diagonal");
    let v: Vec<f64> = {
        let h = random::hermitian(ctx, &mut rng(seed));
        (0..q).map(|i| h.matrix()[(i, i)].re).collect()
    };
    let x = Operator::diag_real(ctx, &v).expect("length q");
    let s = x.norm2();
    (d, &x * (1.0 / s))
}

/// Random unitary conjugation on `M_n` with a Ginibre observable.
pub fn rotation(n: usize, seed: u64) -> (Dynamics, Operator) {
    let ctx = AlgebraCtx::new(n).expect("n >= 1");
    let mut r = rng(seed);
    let d = Dynamics::unitary(random::unitary(ctx, &mut r)).expect("Haar unitary");
    (d, random::ginibre(ctx, &mut r))
}

/// Equal mixture of two Haar unitaries on a qubit.
pub fn qubit_channel(seed: u64) -> (Dynamics, Operator) {
    let ctx = AlgebraCtx::new(2).expect("2 >= 1");
    let mut r = rng(seed);
    let u1 = random::unitary(ctx, &mut r);
    let u2 = random::unitary(ctx, &mut r);
    let d = Dynamics::kraus(ctx, vec![(0.5, u1), (0.5, u2)]).expect("valid weights");
    let h = random::hermitian(ctx, &mut r);
    let x = &h - &Operator::scalar(ctx, h.trace());
    let s = x.norm2();
    (d, &x * (1.0 / s))
}
