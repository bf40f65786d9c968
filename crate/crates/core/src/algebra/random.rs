//! Seeded random operators for property suites and scenario generators.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{AlgebraCtx, Operator, Projection};
use crate::linalg::CMat;
use crate::C64;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(ctx: AlgebraCtx, rng: &mut R) -> Operator {
    let n = ctx.dim();
    let mut m = CMat::zeros(n, n);
    // row-major fill keeps sequences stable if storage order ever changes
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = gaussian(rng);
        }
    }
    Operator::from_matrix_unchecked(ctx, m)
}

pub fn hermitian<R: Rng + ?Sized>(ctx: AlgebraCtx, rng: &mut R) -> Operator {
    ginibre(ctx, rng).real_part()
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn unitary<R: Rng + ?Sized>(ctx: AlgebraCtx, rng: &mut R) -> Operator {
    let g = ginibre(ctx, rng);
    let qr = g.matrix().clone().qr();
    let (mut q, r) = qr.unpack();
    for j in 0..ctx.dim() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Operator::from_matrix_unchecked(ctx, q)
}

/// Random orthogonal projection of the given rank.
pub fn projection<R: Rng + ?Sized>(ctx: AlgebraCtx, rank: usize, rng: &mut R) -> Projection {
    let u = unitary(ctx, rng);
    let vecs: Vec<DVector<C64>> = (0..rank.min(ctx.dim())).map(|j| u.matrix().column(j).into_owned()).collect();
    Projection::from_spanning_vectors(ctx, &vecs)
}

/// Uniformly random permutation of `0..n`.
pub fn permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
