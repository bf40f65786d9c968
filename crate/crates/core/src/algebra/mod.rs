//! Finite-dimensional model of a tracial von Neumann algebra.
//!
//! Operators are `n × n` complex matrices, `τ = Tr/n` is the normalized trace
//! (so `τ(𝕀) = 1`), and `‖x‖_p = (τ(|x|^p))^{1/p}` is computed from singular
//! values. Projections carry the measure topology: `x ∈ V(ε, δ)` iff there is
//! a projection `e` with `τ(e⊥) ≤ ε` and `‖x e‖_∞ ≤ δ`.

mod json;
mod projection;
pub mod random;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

pub use json::OperatorJson;
pub use projection::{MeasureNbhd, Projection};

/// Default numerical tolerance for invariant checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Matrix size and numerical tolerance of the algebra `M_n(ℂ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraCtx {
    dim: usize,
    tol: f64,
}

impl AlgebraCtx {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("algebra dimension must be >= 1".into()));
        }
        Ok(Self { dim, tol: DEFAULT_TOL })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol.max(0.0);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub(crate) fn check_op(&self, x: &Operator) -> Result<()> {
        self.check(&x.ctx)
    }

    fn check(&self, other: &AlgebraCtx) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

/// An element of `M_n(ℂ)` together with its algebra context.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    ctx: AlgebraCtx,
    m: CMat,
}

impl Operator {
    pub fn new(ctx: AlgebraCtx, m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() != ctx.dim {
            return Err(Error::DimensionMismatch { expected: ctx.dim, found: m.nrows() });
        }
        Ok(Self { ctx, m })
    }

    pub(crate) fn from_matrix_unchecked(ctx: AlgebraCtx, m: CMat) -> Self {
        debug_assert_eq!(m.nrows(), ctx.dim);
        Self { ctx, m }
    }

    pub fn from_fn(ctx: AlgebraCtx, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { ctx, m: CMat::from_fn(ctx.dim, ctx.dim, f) }
    }

    pub fn identity(ctx: AlgebraCtx) -> Self {
        Self { ctx, m: CMat::identity(ctx.dim, ctx.dim) }
    }

    pub fn zero(ctx: AlgebraCtx) -> Self {
        Self { ctx, m: CMat::zeros(ctx.dim, ctx.dim) }
    }

    /// Matrix unit `e_{ij}`.
    pub fn unit(ctx: AlgebraCtx, i: usize, j: usize) -> Self {
        let mut m = CMat::zeros(ctx.dim, ctx.dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        Self { ctx, m }
    }

    pub fn diag(ctx: AlgebraCtx, entries: &[C64]) -> Result<Self> {
        if entries.len() != ctx.dim {
            return Err(Error::DimensionMismatch { expected: ctx.dim, found: entries.len() });
        }
        Ok(Self { ctx, m: CMat::from_diagonal(&DVector::from_column_slice(entries)) })
    }

    pub fn diag_real(ctx: AlgebraCtx, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::diag(ctx, &c)
    }

    pub fn scalar(ctx: AlgebraCtx, c: C64) -> Self {
        Self::identity(ctx) * c
    }

    pub fn ctx(&self) -> AlgebraCtx {
        self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { ctx: self.ctx, m: self.m.adjoint() }
    }

    /// Normalized trace `τ(x) = Tr(x)/n`.
    pub fn trace(&self) -> C64 {
        self.m.trace() / self.ctx.dim as f64
    }

    /// `(x, y)_τ = τ(x* y)`.
    pub fn inner(&self, y: &Operator) -> Result<C64> {
        self.ctx.check(&y.ctx)?;
        Ok(self.inner_unchecked(y))
    }

    pub(crate) fn inner_unchecked(&self, y: &Operator) -> C64 {
        // τ(x* y) = (1/n) Σ conj(x_ij) y_ij
        let s: C64 = self.m.iter().zip(y.m.iter()).map(|(a, b)| a.conj() * b).sum();
        s / self.ctx.dim as f64
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.m)
    }

    /// `‖x‖_p` for `p ∈ [1, ∞]`; pass `f64::INFINITY` for the operator norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let s = self.singular_values();
        let top = s.first().copied().unwrap_or(0.0);
        if p.is_infinite() || top == 0.0 {
            return Ok(top);
        }
        let n = self.ctx.dim as f64;
        let mean: f64 = s.iter().map(|v| (v / top).powf(p)).sum::<f64>() / n;
        Ok(top * mean.powf(1.0 / p))
    }

    /// `‖x‖_2 = τ(x* x)^{1/2}`, computed from entries.
    pub fn norm2(&self) -> f64 {
        (self.m.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.ctx.dim as f64).sqrt()
    }

    /// Uniform (operator) norm `‖x‖_∞`.
    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.m)
    }

    /// `|x| = (x* x)^{1/2}`.
    pub fn abs(&self) -> Operator {
        let (vals, vecs) = linalg::hermitian_eigh(&(self.m.adjoint() * &self.m));
        let roots: Vec<C64> = vals.iter().map(|v| C64::new(v.max(0.0).sqrt(), 0.0)).collect();
        let d = CMat::from_diagonal(&DVector::from_vec(roots));
        Self { ctx: self.ctx, m: &vecs * d * vecs.adjoint() }
    }

    /// `‖x − x*‖_∞`.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::op_norm(&(&self.m - self.m.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= self.ctx.tol * self.op_norm().max(1.0)
    }

    /// `(x + x*)/2`.
    pub fn real_part(&self) -> Operator {
        Self { ctx: self.ctx, m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// `(x − x*)/(2i)`, so that `x = Re x + i·Im x`.
    pub fn imag_part(&self) -> Operator {
        Self { ctx: self.ctx, m: (&self.m - self.m.adjoint()) * C64::new(0.0, -0.5) }
    }

    /// Jordan decomposition of the Hermitian part: `(x₊, x₋)` with
    /// `Re x = x₊ − x₋`, both positive and `x₊x₋ = 0`.
    pub fn jordan_parts(&self) -> (Operator, Operator) {
        let (vals, vecs) = linalg::hermitian_eigh(&self.m);
        let build = |f: &dyn Fn(f64) -> f64| {
            let d: Vec<C64> = vals.iter().map(|&v| C64::new(f(v), 0.0)).collect();
            let dm = CMat::from_diagonal(&DVector::from_vec(d));
            Operator { ctx: self.ctx, m: &vecs * dm * vecs.adjoint() }
        };
        (build(&|v| v.max(0.0)), build(&|v| (-v).max(0.0)))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.m)
    }

    /// Positive semidefinite within `tol · max(1, ‖x‖_∞)`.
    pub fn is_positive(&self) -> bool {
        self.is_hermitian() && self.min_eigenvalue() >= -self.ctx.tol * self.op_norm().max(1.0)
    }

    /// Spectral projection of a Hermitian operator onto eigenvalues in `[a, b]`.
    pub fn spectral_projection(&self, a: f64, b: f64) -> Result<Projection> {
        if !self.is_hermitian() {
            return Err(Error::NotHermitian(self.hermitian_defect()));
        }
        let (vals, vecs) = linalg::hermitian_eigh(&self.m);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= a && vals[i] <= b).collect();
        let mut cols = CMat::zeros(self.ctx.dim, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            cols.set_column(j, &vecs.column(i));
        }
        Ok(Projection::from_orthonormal_columns(self.ctx, &cols))
    }

    /// Membership in the measure-topology neighbourhood `V(ε, δ)` of 0.
    pub fn measure_nbhd(&self, eps: f64, delta: f64) -> Result<MeasureNbhd> {
        projection::measure_nbhd(self, eps, delta)
    }

    fn checked(&self, other: &Operator) {
        assert_eq!(self.ctx.dim, other.ctx.dim, "operator dimension mismatch");
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.checked(rhs);
        Operator { ctx: self.ctx, m: &self.m * &rhs.m }
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.checked(rhs);
        Operator { ctx: self.ctx, m: &self.m + &rhs.m }
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.checked(rhs);
        Operator { ctx: self.ctx, m: &self.m - &rhs.m }
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { ctx: self.ctx, m: self.m * rhs }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { ctx: self.ctx, m: &self.m * C64::new(rhs, 0.0) }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { ctx: self.ctx, m: &self.m * rhs }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { ctx: self.ctx, m: -&self.m }
    }
}

#[cfg(test)]
mod tests;
