//! Positive trace-preserving maps `α` on `M_n(ℂ)` given constructively.
//!
//! Every kind is a conjugation or a convex combination of conjugations, so
//! positivity, unitality and `τ ∘ α = τ` hold by construction; [`Dynamics::validate`]
//! re-checks them numerically and decides ergodicity and weak mixing from the
//! superoperator spectrum.

mod json;
mod report;

use nalgebra::DVector;

use crate::algebra::{AlgebraCtx, Operator};
use crate::linalg::CMat;
use crate::{Error, Result, C64};

pub use json::{DynamicsJson, DynamicsSpec, KrausTermSpec};
pub use report::{cluster_unimodular, DynamicsReport, UNIMODULAR_TOL};

/// The algebra a scenario lives on.
///
/// Trace-preserving *-automorphisms of `M_n` are inner and never ergodic for
/// `n ≥ 2`, so ergodic homomorphism scenarios are posed on the diagonal
/// (commutative) subalgebra, which permutation dynamics leave invariant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subalgebra {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsKind {
    /// `x ↦ u x u*`.
    UnitaryConjugation(Operator),
    /// `x ↦ P_π x P_π*` with `P_π e_j = e_{π(j)}`.
    PermutationConjugation(Vec<usize>),
    /// `x ↦ Σ wᵢ uᵢ* x uᵢ`.
    KrausChannel(Vec<(f64, Operator)>),
    /// Applies the parts in list order (first element acts first).
    Composition(Vec<Dynamics>),
    Power(Box<Dynamics>, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    ctx: AlgebraCtx,
    kind: DynamicsKind,
    algebra: Subalgebra,
}

fn unitary_defect(u: &Operator) -> f64 {
    let id = CMat::identity(u.dim(), u.dim());
    crate::linalg::op_norm(&(u.matrix().adjoint() * u.matrix() - id))
}

impl Dynamics {
    pub fn identity(ctx: AlgebraCtx) -> Self {
        Self { ctx, kind: DynamicsKind::PermutationConjugation((0..ctx.dim()).collect()), algebra: Subalgebra::Full }
    }

    pub fn unitary(u: Operator) -> Result<Self> {
        let defect = unitary_defect(&u);
        if defect > u.ctx().tol().max(1e-12) {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { ctx: u.ctx(), kind: DynamicsKind::UnitaryConjugation(u), algebra: Subalgebra::Full })
    }

    pub fn permutation(ctx: AlgebraCtx, perm: Vec<usize>) -> Result<Self> {
        let n = ctx.dim();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
        }
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidDynamics(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            seen[p] = true;
        }
        Ok(Self { ctx, kind: DynamicsKind::PermutationConjugation(perm), algebra: Subalgebra::Full })
    }

    /// Cyclic shift `i ↦ i + 1 mod n`.
    pub fn cyclic_shift(ctx: AlgebraCtx) -> Self {
        let n = ctx.dim();
        Self::permutation(ctx, (0..n).map(|i| (i + 1) % n).collect()).expect("cyclic shift is a permutation")
    }

    /// Cyclic shift of tensor factors on `qubits` qubits: site `s` moves to `s + 1`.
    ///
    /// Basis state `b` (bit `s` = state of site `s`) is sent to its one-bit
    /// left rotation.
    pub fn qubit_cyclic_shift(qubits: u32) -> Result<Self> {
        if qubits == 0 || qubits > 10 {
            return Err(Error::InvalidParameter(format!("qubit count {qubits} outside 1..=10")));
        }
        let n = 1usize << qubits;
        let mask = n - 1;
        let perm = (0..n).map(|b| ((b << 1) | (b >> (qubits - 1))) & mask).collect();
        Self::permutation(AlgebraCtx::new(n)?, perm)
    }

    pub fn kraus(ctx: AlgebraCtx, terms: Vec<(f64, Operator)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidDynamics("Kraus channel needs at least one term".into()));
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if terms.iter().any(|t| !(t.0 > 0.0)) || (total - 1.0).abs() > ctx.tol().max(1e-12) {
            return Err(Error::InvalidDynamics(format!("weights must be positive and sum to 1 (sum = {total})")));
        }
        for (_, u) in &terms {
            if u.dim() != ctx.dim() {
                return Err(Error::DimensionMismatch { expected: ctx.dim(), found: u.dim() });
            }
            let defect = unitary_defect(u);
            if defect > ctx.tol().max(1e-12) {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Self { ctx, kind: DynamicsKind::KrausChannel(terms), algebra: Subalgebra::Full })
    }

    pub fn compose(ctx: AlgebraCtx, parts: Vec<Dynamics>) -> Result<Self> {
        for p in &parts {
            if p.ctx.dim() != ctx.dim() {
                return Err(Error::DimensionMismatch { expected: ctx.dim(), found: p.ctx.dim() });
            }
        }
        Ok(Self { ctx, kind: DynamicsKind::Composition(parts), algebra: Subalgebra::Full })
    }

    pub fn power(base: Dynamics, k: u32) -> Self {
        Self { ctx: base.ctx, algebra: base.algebra, kind: DynamicsKind::Power(Box::new(base), k) }
    }

    /// Restricts the scenario algebra, checking the map leaves it invariant.
    pub fn on_subalgebra(mut self, algebra: Subalgebra) -> Result<Self> {
        if algebra == Subalgebra::Diagonal {
            let n = self.ctx.dim();
            for i in 0..n {
                let img = self.apply_matrix(Operator::unit(self.ctx, i, i).matrix());
                let off: f64 = (0..n)
                    .flat_map(|r| (0..n).map(move |c| (r, c)))
                    .filter(|(r, c)| r != c)
                    .map(|(r, c)| img[(r, c)].norm())
                    .fold(0.0, f64::max);
                if off > self.ctx.tol().max(1e-12) {
                    return Err(Error::InvalidDynamics("dynamics does not preserve the diagonal subalgebra".into()));
                }
            }
        }
        self.algebra = algebra;
        Ok(self)
    }

    pub fn ctx(&self) -> AlgebraCtx {
        self.ctx
    }

    pub fn kind(&self) -> &DynamicsKind {
        &self.kind
    }

    pub fn subalgebra(&self) -> Subalgebra {
        self.algebra
    }

    /// Structural check: conjugations, single-term channels and their
    /// compositions/powers are *-automorphisms.
    pub fn is_homomorphism_kind(&self) -> bool {
        match &self.kind {
            DynamicsKind::UnitaryConjugation(_) | DynamicsKind::PermutationConjugation(_) => true,
            DynamicsKind::KrausChannel(terms) => terms.len() == 1,
            DynamicsKind::Composition(parts) => parts.iter().all(Dynamics::is_homomorphism_kind),
            DynamicsKind::Power(base, _) => base.is_homomorphism_kind(),
        }
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.ctx.dim() {
            return Err(Error::DimensionMismatch { expected: self.ctx.dim(), found: x.dim() });
        }
        Ok(Operator::from_matrix_unchecked(x.ctx(), self.apply_matrix(x.matrix())))
    }

    pub(crate) fn apply_op(&self, x: &Operator) -> Operator {
        Operator::from_matrix_unchecked(x.ctx(), self.apply_matrix(x.matrix()))
    }

    pub(crate) fn apply_matrix(&self, x: &CMat) -> CMat {
        match &self.kind {
            DynamicsKind::UnitaryConjugation(u) => u.matrix() * x * u.matrix().adjoint(),
            DynamicsKind::PermutationConjugation(perm) => {
                let n = perm.len();
                let mut out = CMat::zeros(n, n);
                for j in 0..n {
                    for i in 0..n {
                        out[(perm[i], perm[j])] = x[(i, j)];
                    }
                }
                out
            }
            DynamicsKind::KrausChannel(terms) => {
                let mut out = CMat::zeros(x.nrows(), x.ncols());
                for (w, u) in terms {
                    out += (u.matrix().adjoint() * x * u.matrix()) * C64::new(*w, 0.0);
                }
                out
            }
            DynamicsKind::Composition(parts) => {
                let mut y = x.clone();
                for p in parts {
                    y = p.apply_matrix(&y);
                }
                y
            }
            DynamicsKind::Power(base, k) => {
                let mut y = x.clone();
                for _ in 0..*k {
                    y = base.apply_matrix(&y);
                }
                y
            }
        }
    }

    /// The orbit `x, α(x), α²(x), …` as a lazy stream.
    pub fn orbit<'a>(&'a self, x: &Operator) -> impl Iterator<Item = Operator> + 'a {
        std::iter::successors(Some(x.clone()), move |y| Some(self.apply_op(y)))
    }

    /// `[x, α(x), …, α^k(x)]`.
    pub fn iterate(&self, x: &Operator, k: usize) -> Result<Vec<Operator>> {
        if x.dim() != self.ctx.dim() {
            return Err(Error::DimensionMismatch { expected: self.ctx.dim(), found: x.dim() });
        }
        Ok(self.orbit(x).take(k + 1).collect())
    }

    /// Number of elements of the orthonormal basis of the scenario algebra's `L²`.
    pub fn basis_size(&self) -> usize {
        match self.algebra {
            Subalgebra::Full => self.ctx.dim() * self.ctx.dim(),
            Subalgebra::Diagonal => self.ctx.dim(),
        }
    }

    /// Basis element `a`: `√n·e_{ij}` with `a = i·n + j` (full) or `√n·e_{aa}` (diagonal).
    pub fn basis_operator(&self, a: usize) -> Operator {
        let n = self.ctx.dim();
        let (i, j) = match self.algebra {
            Subalgebra::Full => (a / n, a % n),
            Subalgebra::Diagonal => (a, a),
        };
        Operator::unit(self.ctx, i, j) * C64::new((n as f64).sqrt(), 0.0)
    }

    /// Coordinates `(b_a, x)_τ` of `x` in the orthonormal basis; for the
    /// diagonal subalgebra this is the conditional expectation onto the diagonal.
    pub fn coefficients(&self, x: &Operator) -> DVector<C64> {
        let n = self.ctx.dim();
        let s = 1.0 / (n as f64).sqrt();
        match self.algebra {
            Subalgebra::Full => DVector::from_fn(n * n, |a, _| x.matrix()[(a / n, a % n)] * s),
            Subalgebra::Diagonal => DVector::from_fn(n, |a, _| x.matrix()[(a, a)] * s),
        }
    }

    pub fn from_coefficients(&self, c: &DVector<C64>) -> Operator {
        let n = self.ctx.dim();
        let s = (n as f64).sqrt();
        let mut m = CMat::zeros(n, n);
        match self.algebra {
            Subalgebra::Full => {
                for a in 0..n * n {
                    m[(a / n, a % n)] = c[a] * s;
                }
            }
            Subalgebra::Diagonal => {
                for a in 0..n {
                    m[(a, a)] = c[a] * s;
                }
            }
        }
        Operator::from_matrix_unchecked(self.ctx, m)
    }

    /// Matrix of `α` in the orthonormal basis of `(L², (·,·)_τ)` of the scenario algebra.
    pub fn superoperator(&self) -> CMat {
        let size = self.basis_size();
        let mut s = CMat::zeros(size, size);
        for b in 0..size {
            let img = self.apply_op(&self.basis_operator(b));
            s.set_column(b, &self.coefficients(&img));
        }
        s
    }

    /// Runs the numerical validation suite; failures are reported, not raised.
    pub fn validate(&self, samples: usize, seed: u64) -> DynamicsReport {
        report::validate(self, samples.max(1), seed)
    }
}

#[cfg(test)]
pub(crate) mod tests;
