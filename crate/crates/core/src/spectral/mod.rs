//! The `L²` layer: eigenoperators with unimodular eigenvalues, the Kronecker
//! split `L² = K ⊕ K⊥`, correlation sequences `γ_x(l) = τ(x* α^l(x))` and
//! their atomic spectral measures.
//!
//! Sign convention: an eigenoperator `b` with `α(b) = e^{2πiθ} b` puts its
//! mass at angle `θ`, so that `γ_x(l) = Σ_atoms mass · e^{+2πi l θ}`. The
//! twisted Cesàro average [`atom_estimate`] at `t` then recovers the mass at
//! `−t mod 1`.
//!
//! Finite-dimensional caveat: for *-automorphisms of `M_n` the superoperator
//! is unitary, so `K` is all of `L²`, `K⊥ = {0}` and every spectral measure is
//! purely atomic. Non-trivial `K⊥` content only occurs for channels, whose
//! traceless sector decays geometrically instead of having continuous spectrum.

use nalgebra::DVector;
use serde::Serialize;

use crate::algebra::Operator;
use crate::averages::unit_power;
use crate::dynamics::{cluster_unimodular, Dynamics, UNIMODULAR_TOL};
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

/// Singular-value threshold for eigenspace extraction.
const EIGENSPACE_TOL: f64 = 1e-7;

/// Unit-norm `x` with `α(x) = e^{2πi·angle} x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenOperator {
    pub op: Operator,
    pub angle: f64,
}

impl EigenOperator {
    pub fn eigenvalue(&self) -> C64 {
        unit_power(self.angle, 1)
    }
}

/// Orthonormal eigenbasis of `K` and the orthogonal projector onto it.
#[derive(Debug, Clone)]
pub struct EigenSplit {
    pub basis: Vec<EigenOperator>,
    /// `P_K` in the superoperator basis.
    pub projector: CMat,
    /// Basis coefficient vectors as columns.
    coeffs: CMat,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct KroneckerSplit {
    pub x_k: Operator,
    pub x_perp: Operator,
    pub basis_k: Vec<EigenOperator>,
}

/// Angle in `[0, 1)` of a point on (or near) the unit circle.
fn turns(z: C64) -> f64 {
    let a = (z.arg() / std::f64::consts::TAU).rem_euclid(1.0);
    if 1.0 - a <= UNIMODULAR_TOL {
        0.0
    } else {
        a
    }
}

/// Eigenoperators of `α` with unimodular eigenvalues.
///
/// For non-automorphism dynamics a warning is attached and eigenvectors are
/// extracted where they exist (for unital trace-preserving channels these are
/// still mutually orthogonal).
pub fn eigen_split(d: &Dynamics) -> EigenSplit {
    let s = d.superoperator();
    let size = s.nrows();
    let mut warnings = Vec::new();
    if !d.is_homomorphism_kind() {
        warnings.push("dynamics is not a *-automorphism; K is spanned by the unimodular eigenvectors that exist".to_string());
    }
    let eigs = linalg::eigenvalues(&s);
    let mut vectors: Vec<(f64, DVector<C64>)> = Vec::new();
    for (center, _) in cluster_unimodular(&eigs) {
        let mu = unit_power(center, 1);
        let shifted = &s - CMat::identity(size, size) * mu;
        let ns = linalg::null_space(&shifted, EIGENSPACE_TOL);
        for j in 0..ns.ncols() {
            let mut v = ns.column(j).into_owned();
            linalg::normalize_phase(&mut v);
            let rayleigh = (v.adjoint() * &s * &v)[(0, 0)];
            vectors.push((turns(rayleigh), v));
        }
    }
    let mut coeffs = CMat::zeros(size, vectors.len());
    for (j, (_, v)) in vectors.iter().enumerate() {
        coeffs.set_column(j, v);
    }
    let gram_defect = linalg::max_abs(&(coeffs.adjoint() * &coeffs - CMat::identity(vectors.len(), vectors.len())));
    if gram_defect > 1e-8 {
        warnings.push(format!("eigenbasis orthonormality defect {gram_defect:e}"));
    }
    let projector = &coeffs * coeffs.adjoint();
    let basis = vectors.into_iter().map(|(angle, v)| EigenOperator { op: d.from_coefficients(&v), angle }).collect();
    EigenSplit { basis, projector, coeffs, warnings }
}

impl EigenSplit {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates `(b, x)_τ` of `x` against each basis element.
    pub fn components(&self, d: &Dynamics, x: &Operator) -> Vec<C64> {
        (self.coeffs.adjoint() * d.coefficients(x)).iter().copied().collect()
    }

    /// `P_K x`.
    pub fn project(&self, d: &Dynamics, x: &Operator) -> Operator {
        d.from_coefficients(&(&self.projector * d.coefficients(x)))
    }

    pub fn split(&self, d: &Dynamics, x: &Operator) -> KroneckerSplit {
        let x_k = self.project(d, x);
        let x_perp = x - &x_k;
        KroneckerSplit { x_k, x_perp, basis_k: self.basis.clone() }
    }
}

/// `x = x_K + x_⊥` with `x_K ∈ K`, `x_⊥ ∈ K⊥`.
pub fn kronecker_split(d: &Dynamics, x: &Operator) -> Result<KroneckerSplit> {
    if x.dim() != d.ctx().dim() {
        return Err(Error::DimensionMismatch { expected: d.ctx().dim(), found: x.dim() });
    }
    Ok(eigen_split(d).split(d, x))
}

/// `γ_x(l)` for `|l| ≤ L`, with `γ_x(−l) = conj(γ_x(l))`.
/// Defects of a computed Kronecker split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitInvariants {
    pub kronecker_dim: usize,
    /// `|⟨x_K, x_⊥⟩|`.
    pub orthogonality: f64,
    /// `‖P_K α(x_⊥)‖₂`.
    pub invariance: f64,
    /// `‖x_K + x_⊥ − x‖₂`.
    pub reconstruction: f64,
}

pub fn split_invariants(d: &Dynamics, x: &Operator) -> Result<SplitInvariants> {
    if x.dim() != d.ctx().dim() {
        return Err(Error::DimensionMismatch { expected: d.ctx().dim(), found: x.dim() });
    }
    let e = eigen_split(d);
    let s = e.split(d, x);
    let moved = d.apply(&s.x_perp)?;
    Ok(SplitInvariants {
        kronecker_dim: e.dim(),
        orthogonality: s.x_k.inner(&s.x_perp)?.norm(),
        invariance: e.project(d, &moved).norm2(),
        reconstruction: (&(&s.x_k + &s.x_perp) - x).norm2(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSequence {
    /// Non-negative lags `0..=L`.
    values: Vec<C64>,
}

impl CorrelationSequence {
    pub fn from_nonnegative(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("correlation sequence needs lag 0".into()));
        }
        Ok(Self { values })
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, l: i64) -> C64 {
        let v = self.values[l.unsigned_abs() as usize];
        if l < 0 {
            v.conj()
        } else {
            v
        }
    }

    pub fn nonnegative(&self) -> &[C64] {
        &self.values
    }
}

/// `γ_x(l) = τ(x* α^l(x))` for `0 ≤ l ≤ L`.
pub fn correlation(d: &Dynamics, x: &Operator, horizon: usize) -> Result<CorrelationSequence> {
    if x.dim() != d.ctx().dim() {
        return Err(Error::DimensionMismatch { expected: d.ctx().dim(), found: x.dim() });
    }
    let mut values: Vec<C64> = d.orbit(x).take(horizon + 1).map(|y| x.inner_unchecked(&y)).collect();
    values[0] = C64::new(values[0].re, 0.0);
    CorrelationSequence::from_nonnegative(values)
}

/// Default correlation horizon `4·n²`.
pub fn default_horizon(d: &Dynamics) -> usize {
    4 * d.ctx().dim() * d.ctx().dim()
}

fn check_lag(c: &CorrelationSequence, m: usize) -> Result<()> {
    if m > c.horizon() {
        return Err(Error::InvalidParameter(format!("lag {m} exceeds correlation horizon {}", c.horizon())));
    }
    Ok(())
}

/// Smallest eigenvalue of the Toeplitz matrix `[γ(i − j)]_{i,j=0..m}`.
pub fn check_positive_definite(c: &CorrelationSequence, m: usize) -> Result<f64> {
    check_lag(c, m)?;
    let t = CMat::from_fn(m + 1, m + 1, |i, j| c.get(i as i64 - j as i64));
    Ok(linalg::min_hermitian_eigenvalue(&t))
}

/// `(1/n) Σ_{l=1}^n e^{2πilt} γ_x(l)`; tends to the mass at `−t mod 1`.
pub fn atom_estimate(d: &Dynamics, x: &Operator, t: f64, n: usize) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let c = correlation(d, x, n)?;
    Ok(atom_estimate_from(&c, t, n))
}

pub(crate) fn atom_estimate_from(c: &CorrelationSequence, t: f64, n: usize) -> C64 {
    let s: C64 = (1..=n).map(|l| unit_power(t, l) * c.get(l as i64)).sum();
    s / n as f64
}

/// `(1/n) Σ_{l=1}^n e^{2πilt} α^l(x)`; its `‖·‖₂` tends to 0 for `x ∈ K⊥`.
pub fn twisted_average(d: &Dynamics, x: &Operator, t: f64, n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let dim = x.dim();
    let mut acc = linalg::CompensatedSum::zeros(dim, dim);
    for (l, y) in d.orbit(x).enumerate().skip(1).take(n) {
        acc.add_scaled(y.matrix(), unit_power(t, l));
    }
    Ok(Operator::from_matrix_unchecked(x.ctx(), acc.value() / C64::new(n as f64, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

/// Atomic measure `σ_x` on the circle with `σ̂_x(l) = γ_x(l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    pub total: f64,
}

impl SpectralMeasure {
    /// `Σ mass · e^{2πi l θ}`.
    pub fn fourier(&self, l: i64) -> C64 {
        self.atoms
            .iter()
            .map(|a| {
                let z = unit_power(a.angle, l.unsigned_abs() as usize);
                a.mass * if l < 0 { z.conj() } else { z }
            })
            .sum()
    }

    /// `max_{|l| ≤ L} |σ̂(l) − γ(l)|`.
    pub fn reconstruction_error(&self, c: &CorrelationSequence) -> f64 {
        let h = c.horizon() as i64;
        (-h..=h).map(|l| (self.fourier(l) - c.get(l)).norm()).fold(0.0, f64::max)
    }

    pub fn sum_squared_masses(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.mass).sum()
    }

    pub fn mass_at(&self, angle: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| {
                let d = (a.angle - angle).rem_euclid(1.0);
                d.min(1.0 - d) <= UNIMODULAR_TOL
            })
            .map(|a| a.mass)
            .sum()
    }
}

/// Spectral measure of `x` from the eigen-decomposition; automorphisms only.
pub fn spectral_measure(d: &Dynamics, x: &Operator) -> Result<SpectralMeasure> {
    if !d.is_homomorphism_kind() {
        return Err(Error::Unsupported("atomic spectral measure needs a *-automorphism (unitary superoperator)".into()));
    }
    let split = eigen_split(d);
    Ok(measure_from_split(&split, d, x))
}

pub(crate) fn measure_from_split(split: &EigenSplit, d: &Dynamics, x: &Operator) -> SpectralMeasure {
    let comps = split.components(d, x);
    let mut raw: Vec<(f64, f64)> = split.basis.iter().zip(&comps).map(|(b, z)| (b.angle, z.norm_sqr())).collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = raw.iter().map(|r| r.1).sum();
    let mut atoms: Vec<Atom> = Vec::new();
    for (angle, mass) in raw {
        match atoms.last_mut() {
            Some(last) if angle - last.angle <= UNIMODULAR_TOL => last.mass += mass,
            _ => atoms.push(Atom { angle, mass }),
        }
    }
    // fold a cluster straddling 0 ≡ 1
    if atoms.len() > 1 && 1.0 - atoms[atoms.len() - 1].angle <= UNIMODULAR_TOL {
        let last = atoms.pop().expect("len > 1");
        atoms[0].mass += last.mass;
    }
    atoms.retain(|a| a.mass > 1e-14 * total.max(f64::MIN_POSITIVE));
    SpectralMeasure { atoms, total }
}

/// `W_m = (1/(m+1)) Σ_{l=1}^m |γ(l)|²`; tends to `Σ masses²`.
pub fn wiener_criterion(c: &CorrelationSequence, m: usize) -> Result<f64> {
    check_lag(c, m)?;
    let s: f64 = (1..=m).map(|l| c.get(l as i64).norm_sqr()).sum();
    Ok(s / (m + 1) as f64)
}
