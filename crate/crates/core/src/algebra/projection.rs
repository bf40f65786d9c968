use nalgebra::DVector;

use super::{AlgebraCtx, Operator};
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

/// A Hermitian idempotent `p = p* = p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    base: Operator,
}

/// Result of a measure-topology membership test.
#[derive(Debug, Clone)]
pub struct MeasureNbhd {
    pub member: bool,
    /// Spectral-cut witness `e` with `‖x e‖_∞ ≤ δ` and `τ(e⊥) ≤ ε`, present iff `member`.
    pub witness: Option<Projection>,
}

impl Projection {
    /// Validates `p = p*` and `p² = p` in operator norm against `ctx.tol`.
    pub fn new(base: Operator) -> Result<Self> {
        let tol = base.ctx().tol();
        let herm = base.hermitian_defect();
        let idem = linalg::op_norm(&(base.matrix() * base.matrix() - base.matrix()));
        let defect = herm.max(idem);
        if defect > tol {
            return Err(Error::NotProjection(defect));
        }
        Ok(Self { base })
    }

    pub fn identity(ctx: AlgebraCtx) -> Self {
        Self { base: Operator::identity(ctx) }
    }

    pub fn zero(ctx: AlgebraCtx) -> Self {
        Self { base: Operator::zero(ctx) }
    }

    /// Projection onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(ctx: AlgebraCtx, cols: &CMat) -> Self {
        if cols.ncols() == 0 {
            return Self::zero(ctx);
        }
        Self { base: Operator::from_matrix_unchecked(ctx, cols * cols.adjoint()) }
    }

    /// Projection onto the span of arbitrary vectors (orthonormalized here).
    pub fn from_spanning_vectors(ctx: AlgebraCtx, vectors: &[DVector<C64>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ctx);
        }
        let mut m = CMat::zeros(ctx.dim(), vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            m.set_column(j, v);
        }
        let gram = &m * m.adjoint();
        let (vals, vecs) = linalg::hermitian_eigh(&gram);
        let top = vals.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-12 * top.max(1e-300)).collect();
        let mut cols = CMat::zeros(ctx.dim(), keep.len());
        for (j, &i) in keep.iter().enumerate() {
            cols.set_column(j, &vecs.column(i));
        }
        Self::from_orthonormal_columns(ctx, &cols)
    }

    /// Diagonal projection onto the given coordinate indices.
    pub fn coordinate(ctx: AlgebraCtx, indices: &[usize]) -> Self {
        let mut m = CMat::zeros(ctx.dim(), ctx.dim());
        for &i in indices {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Self { base: Operator::from_matrix_unchecked(ctx, m) }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.base
    }

    pub fn into_operator(self) -> Operator {
        self.base
    }

    pub fn ctx(&self) -> AlgebraCtx {
        self.base.ctx()
    }

    /// `τ(p) ∈ [0, 1]`.
    pub fn trace(&self) -> f64 {
        self.base.trace().re
    }

    /// `τ(p⊥) = 1 − τ(p)`.
    pub fn trace_perp(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn rank(&self) -> usize {
        (self.base.matrix().trace().re).round().max(0.0) as usize
    }

    /// `p⊥ = 𝕀 − p`.
    pub fn complement(&self) -> Projection {
        Self { base: &Operator::identity(self.ctx()) - &self.base }
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range_basis(&self) -> CMat {
        let (vals, vecs) = linalg::hermitian_eigh(self.base.matrix());
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
        let mut cols = CMat::zeros(self.ctx().dim(), keep.len());
        for (j, &i) in keep.iter().enumerate() {
            cols.set_column(j, &vecs.column(i));
        }
        cols
    }

    /// `e ∧ f`: projection onto `range(e) ∩ range(f)`, computed as the null
    /// space of `(𝕀 − e) + (𝕀 − f)` at threshold `tol`.
    pub fn meet(&self, other: &Projection) -> Result<Projection> {
        let ctx = self.ctx();
        ctx.check(&other.ctx())?;
        let id = CMat::identity(ctx.dim(), ctx.dim());
        let s = (&id - self.base.matrix()) + (&id - other.base.matrix());
        let (vals, vecs) = linalg::hermitian_eigh(&s);
        let thr = ctx.tol().max(1e-12);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= thr).collect();
        let mut cols = CMat::zeros(ctx.dim(), keep.len());
        for (j, &i) in keep.iter().enumerate() {
            cols.set_column(j, &vecs.column(i));
        }
        Ok(Self::from_orthonormal_columns(ctx, &cols))
    }

    /// Meet of a non-empty list; the identity for an empty list.
    pub fn meet_all<'a>(ctx: AlgebraCtx, items: impl IntoIterator<Item = &'a Projection>) -> Result<Projection> {
        let mut acc = Projection::identity(ctx);
        for p in items {
            acc = acc.meet(p)?;
        }
        Ok(acc)
    }

    /// `self ≤ other`, i.e. `other · self = self` within tolerance.
    pub fn is_le(&self, other: &Projection) -> bool {
        let d = other.base.matrix() * self.base.matrix() - self.base.matrix();
        linalg::op_norm(&d) <= self.ctx().tol().max(1e-9)
    }
}

pub(super) fn measure_nbhd(x: &Operator, eps: f64, delta: f64) -> Result<MeasureNbhd> {
    if !(eps >= 0.0 && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("need eps >= 0 and delta >= 0 (got {eps}, {delta})")));
    }
    let ctx = x.ctx();
    let n = ctx.dim();
    let svd = x.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut small = Vec::new();
    let mut large = 0usize;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > delta {
            large += 1;
        } else {
            small.push(v_t.row(i).adjoint());
        }
    }
    if (large as f64) / (n as f64) > eps {
        return Ok(MeasureNbhd { member: false, witness: None });
    }
    let mut cols = CMat::zeros(n, small.len());
    for (j, v) in small.iter().enumerate() {
        cols.set_column(j, v);
    }
    Ok(MeasureNbhd { member: true, witness: Some(Projection::from_orthonormal_columns(ctx, &cols)) })
}
