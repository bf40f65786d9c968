//! Operator Van der Corput inequality, its norm corollaries and the bound
//! chain for uniform weighted averages.
//!
//! For `a_0, …, a_{n−1}` and `0 ≤ m ≤ n−1`:
//!
//! ```text
//! (Σ a_k)*(Σ a_k) ≤ (n+m)/(m+1) Σ a_k*a_k
//!                 + 2(n+m)/(m+1) Σ_{l=1}^m (m−l+1)/(m+1) Re Σ_k a_k*a_{k+l}
//! ```
//!
//! with `a_{k+l} = 0` once `k + l ≥ n` and `Re z = (z + z*)/2`. The constant
//! `(n+m)/(m+1)` is the classical one; `(n−1+m)/(m+1)` already fails at
//! `n = 1`.

use std::collections::VecDeque;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{random, AlgebraCtx, Operator, Projection};
use crate::averages::{sup_profile, validate_n_grid, Compressor, LambdaGrid};
use crate::dynamics::Dynamics;
use crate::linalg::{self, CMat};
use crate::spectral::CorrelationSequence;
use crate::{Error, Result, C64};

/// Relative tolerance for certifying the operator inequality.
pub const GAP_REL_TOL: f64 = 1e-9;

/// Out-of-range convention for `a_{k+l}` with `k + l ≥ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdcCertificate {
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    /// Smallest eigenvalue of `RHS − LHS`.
    pub gap_min_eig: f64,
    pub gap_norm: f64,
    /// `‖(1/n) Σ a_k‖²`.
    pub lhs_norm: f64,
    /// Right-hand side of the normalized norm bound with `2/(m+1)`, `4/(m+1)`.
    pub rhs_norm_bound: f64,
    /// `‖Σ a_k‖²` and the sharp-constant norm bound it implies.
    pub sharp_lhs: f64,
    pub sharp_rhs: f64,
    pub padding: Padding,
}

impl VdcCertificate {
    pub fn operator_holds(&self) -> bool {
        self.gap_min_eig >= -GAP_REL_TOL * self.gap_norm
    }

    pub fn norm_holds(&self, tol: f64) -> bool {
        self.lhs_norm <= self.rhs_norm_bound + tol && self.sharp_lhs <= self.sharp_rhs + tol * self.sharp_rhs.max(1.0)
    }
}

fn check_inputs(a: &[Operator], m: usize) -> Result<AlgebraCtx> {
    let first = a.first().ok_or_else(|| Error::InvalidParameter("need at least one operator".into()))?;
    if m >= a.len() {
        return Err(Error::InvalidParameter(format!("m = {m} must satisfy 0 <= m <= n-1 = {}", a.len() - 1)));
    }
    let ctx = first.ctx();
    for x in a {
        ctx.check_op(x)?;
    }
    Ok(ctx)
}

/// `Σ_{k<n−l} a_k* a_{k+l}`.
fn shifted_products(a: &[Operator], l: usize) -> CMat {
    let dim = a[0].dim();
    let mut s = CMat::zeros(dim, dim);
    for k in 0..a.len().saturating_sub(l) {
        s += a[k].matrix().adjoint() * a[k + l].matrix();
    }
    s
}

/// Certifies the operator inequality and both norm forms for `a` and `m`.
pub fn vdc_gap(a: &[Operator], m: usize) -> Result<VdcCertificate> {
    let ctx = check_inputs(a, m)?;
    let n = a.len();
    let (nf, mf) = (n as f64, m as f64);
    let c = (nf + mf) / (mf + 1.0);
    let dim = ctx.dim();

    let sum = a.iter().fold(CMat::zeros(dim, dim), |acc, x| acc + x.matrix());
    let lhs = sum.adjoint() * &sum;
    let diag = shifted_products(a, 0);
    let mut rhs = &diag * C64::new(c, 0.0);
    let mut sharp_rhs = c * linalg::op_norm(&diag);
    let mut rhs6 = 2.0 / (mf + 1.0) * linalg::op_norm(&diag) / nf;
    for l in 1..=m {
        let s = shifted_products(a, l);
        let w = 2.0 * c * (mf - l as f64 + 1.0) / (mf + 1.0);
        rhs += (&s + s.adjoint()) * C64::new(w / 2.0, 0.0);
        let sn = linalg::op_norm(&s);
        sharp_rhs += w * sn;
        rhs6 += 4.0 / (mf + 1.0) * sn / nf;
    }
    let gap = rhs - &lhs;
    let sharp_lhs = linalg::op_norm(&sum).powi(2);
    Ok(VdcCertificate {
        n,
        m,
        dim,
        gap_min_eig: linalg::min_hermitian_eigenvalue(&gap),
        gap_norm: linalg::op_norm(&gap),
        lhs_norm: sharp_lhs / (nf * nf),
        rhs_norm_bound: rhs6,
        sharp_lhs,
        sharp_rhs,
        padding: Padding::Zero,
    })
}

/// Same certificate; the norm fields are the ones of interest.
pub fn vdc_norm_bound(a: &[Operator], m: usize) -> Result<VdcCertificate> {
    vdc_gap(a, m)
}

/// `‖(ae)*(be) − e a* b e‖_∞`.
pub fn lemma2_identity_check(a: &Operator, b: &Operator, e: &Projection) -> Result<f64> {
    let ctx = a.ctx();
    ctx.check_op(b)?;
    ctx.check_op(e.as_operator())?;
    let em = e.as_operator().matrix();
    let left = (a.matrix() * em).adjoint() * (b.matrix() * em);
    let right = em * a.matrix().adjoint() * b.matrix() * em;
    Ok(linalg::op_norm(&(left - right)))
}

/// One row of the randomized certificate suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzRow {
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub gap_min_eig: f64,
    pub gap_norm: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub seed: u64,
}

impl FuzzRow {
    pub fn operator_holds(&self) -> bool {
        self.gap_min_eig >= -GAP_REL_TOL * self.gap_norm
    }

    pub fn norm_holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Random instance for `seed`: `dim ≤ max_dim`, `n ≤ max_n`, `m` uniform in
/// `0..n`, Ginibre entries at a random scale.
pub fn fuzz_instance(seed: u64, max_dim: usize, max_n: usize) -> (Vec<Operator>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=max_dim.max(1));
    let n = rng.random_range(1..=max_n.max(1));
    let m = rng.random_range(0..n);
    let ctx = AlgebraCtx::new(dim).expect("dim >= 1");
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let a = (0..n).map(|_| &random::ginibre(ctx, &mut rng) * scale).collect();
    (a, m)
}

/// `instances` certificates with seeds `base_seed + i`, in index order.
pub fn fuzz_suite(instances: usize, base_seed: u64, max_dim: usize, max_n: usize) -> Vec<FuzzRow> {
    (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let (a, m) = fuzz_instance(seed, max_dim, max_n);
            let c = vdc_gap(&a, m).expect("valid instance");
            FuzzRow {
                n: c.n,
                m: c.m,
                dim: c.dim,
                gap_min_eig: c.gap_min_eig,
                gap_norm: c.gap_norm,
                lhs: c.lhs_norm,
                rhs: c.rhs_norm_bound,
                seed,
            }
        })
        .collect()
}

/// One `(n, m)` evaluation of the bound chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundChainRow {
    pub n: usize,
    pub m: usize,
    /// `max_λ ‖a_n(x,λ)p‖²` over the grid.
    pub uniform_sup_sq: f64,
    pub bound: f64,
    /// `‖p a_n(x*x) p‖`.
    pub diagonal_term: f64,
    /// `‖p a_n(x*α^l(x)) p‖` for `l = 1..=m`.
    pub correlation_terms: Vec<f64>,
}

impl BoundChainRow {
    pub fn holds(&self, tol: f64) -> bool {
        self.uniform_sup_sq <= self.bound + tol
    }
}

fn bound_from_terms(diag: f64, terms: &[f64], m: usize) -> f64 {
    let w = 1.0 / (m as f64 + 1.0);
    2.0 * w * diag + 4.0 * w * terms[..m].iter().sum::<f64>()
}

/// Bound chain at every `n ∈ n_grid` and every `m ∈ m_values`, from one orbit
/// pass: `a_n(x*α^l(x)) = (1/n) Σ_{k<n} y_k* y_{k+l}` with `y_k = α^k(x)`.
pub fn bound_chain_sweep(
    d: &Dynamics,
    x: &Operator,
    p: &Projection,
    n_grid: &[usize],
    m_values: &[usize],
    grid: &LambdaGrid,
) -> Result<Vec<BoundChainRow>> {
    if !d.is_homomorphism_kind() {
        return Err(Error::Unsupported("bound chain needs a *-homomorphism".into()));
    }
    validate_n_grid(n_grid)?;
    d.ctx().check_op(x)?;
    let m_max = m_values.iter().copied().max().unwrap_or(0);
    let sups = sup_profile(d, x, p, n_grid, grid)?;
    let comp = Compressor::new(p);
    let dim = x.dim();

    let mut sums: Vec<linalg::CompensatedSum> = (0..=m_max).map(|_| linalg::CompensatedSum::zeros(dim, dim)).collect();
    let mut orbit = d.orbit(x);
    let mut window: VecDeque<CMat> = VecDeque::with_capacity(m_max + 1);
    for _ in 0..=m_max {
        window.push_back(orbit.next().expect("orbit is infinite").into_matrix());
    }
    let mut rows = Vec::new();
    let mut k = 0usize;
    for (row, &n) in sups.iter().zip(n_grid) {
        while k < n {
            let yk = window[0].adjoint();
            for (l, s) in sums.iter_mut().enumerate() {
                s.add_scaled(&(&yk * &window[l]), C64::new(1.0, 0.0));
            }
            window.pop_front();
            window.push_back(orbit.next().expect("orbit is infinite").into_matrix());
            k += 1;
        }
        let inv = C64::new(1.0 / n as f64, 0.0);
        let norms: Vec<f64> = sums
            .iter()
            .map(|s| comp.bilateral(&Operator::from_matrix_unchecked(x.ctx(), s.value() * inv)))
            .collect();
        let sup = row.sup_one_sided();
        for &m in m_values {
            rows.push(BoundChainRow {
                n,
                m,
                uniform_sup_sq: sup * sup,
                bound: bound_from_terms(norms[0], &norms[1..], m),
                diagonal_term: norms[0],
                correlation_terms: norms[1..=m].to_vec(),
            });
        }
    }
    Ok(rows)
}

/// Grid sup of `‖a_n(x,λ)p‖²` and the chain bound at a single `(n, m)`.
pub fn ww_bound_chain(d: &Dynamics, x: &Operator, p: &Projection, n: usize, m: usize, grid: &LambdaGrid) -> Result<BoundChainRow> {
    Ok(bound_chain_sweep(d, x, p, &[n], &[m], grid)?.pop().expect("one row"))
}

/// Large-`n` value of the bound at `p = 𝕀` for ergodic dynamics:
/// `2/(m+1) γ(0) + 4/(m+1) Σ_{l=1}^m |γ(l)|`.
pub fn asymptotic_bound(c: &CorrelationSequence, m: usize) -> Result<f64> {
    if m > c.horizon() {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds correlation horizon {}", c.horizon())));
    }
    let terms: Vec<f64> = (1..=m).map(|l| c.get(l as i64).norm()).collect();
    Ok(bound_from_terms(c.get(0).re, &terms, m))
}

#[cfg(test)]
mod tests;
