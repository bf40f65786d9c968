//! Equicontinuity witnesses: a projection `e` with small `τ(e⊥)` such that
//! `sup_{n ≤ N} ‖e a_n(x,λ) e‖_∞` is small for every `λ`.
//!
//! `x = (x₁ − x₂) + i(x₃ − x₄)` with `x_j ≥ 0`. If `‖e a_n(x_j) e‖ ≤ s_j` for
//! all `n ≤ N`, then `0 ≤ Re(λ^k) + 1 ≤ 2` gives `‖e a_n(x_j,λ) e‖ ≤ 6 s_j` for
//! every unimodular `λ`, hence `‖e a_n(x,λ) e‖ ≤ 6 Σ_j s_j`. That sum (or
//! `‖x‖_∞`, whichever is smaller) is the certified `δ'`, valid on the whole
//! circle, not only on the grid.

use serde::{Serialize, Serializer};

use crate::algebra::{Operator, Projection};
use crate::averages::{log_grid, sup_profile, LambdaGrid, LambdaGridSpec};
use crate::dynamics::{Dynamics, Subalgebra};
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

/// Per-part share of `δ`: `δ/24`, so the four parts total `δ`.
pub const PART_DELTA_SHARE: f64 = 1.0 / 24.0;
/// Per-part share of `ε`.
pub const PART_EPS_SHARE: f64 = 0.25;

const SUBGRID_POINTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessMethod {
    SpectralCut,
    GreedyPeel,
    Meet,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartWitness {
    /// 1..=4 for `x₁, x₂, x₃, x₄`.
    pub index: usize,
    pub method: WitnessMethod,
    /// `τ(e_j⊥)` of this part's own projection.
    pub trace_perp: f64,
    /// `sup_{n ≤ N} ‖e a_n(x_j) e‖` under the final witness `e`.
    pub sup_unweighted: f64,
}

pub(crate) fn serialize_projection<S: Serializer>(p: &Projection, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.as_operator().serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionWitness {
    #[serde(serialize_with = "serialize_projection")]
    pub e: Projection,
    /// `τ(e⊥)`.
    pub eps_achieved: f64,
    /// Certified bound on `‖e a_n(x,λ) e‖_∞` for all `n ≤ N`, all `λ ∈ ℂ₁`.
    pub delta_achieved: f64,
    pub horizon: usize,
    pub grid: LambdaGridSpec,
    pub method: WitnessMethod,
    pub eps_budget: f64,
    pub delta_target: f64,
    /// Both requested budgets were met.
    pub within_budget: bool,
    /// Largest `‖e a_n(x,λ) e‖_∞` observed directly on the grid over a
    /// log-spaced subset of `n ≤ N`.
    pub grid_sup_observed: f64,
    pub parts: Vec<PartWitness>,
}

/// Compressed unweighted averages `V* a_n(x_j) V` along the orbit.
struct PartScan {
    sup: f64,
    worst: CMat,
}

fn scan(d: &Dynamics, xj: &Operator, basis: &CMat, horizon: usize) -> PartScan {
    let r = basis.ncols();
    let mut best = PartScan { sup: 0.0, worst: CMat::zeros(r, r) };
    if r == 0 {
        return best;
    }
    let mut sum = CMat::zeros(r, r);
    for (k, y) in d.orbit(xj).take(horizon).enumerate() {
        sum += basis.adjoint() * y.matrix() * basis;
        let n = k + 1;
        let avg = &sum / linalg_scalar(n);
        let top = linalg::hermitian_eigh(&avg).0.last().copied().unwrap_or(0.0);
        if top > best.sup {
            best = PartScan { sup: top, worst: avg };
        }
    }
    best
}

fn linalg_scalar(n: usize) -> C64 {
    C64::new(n as f64, 0.0)
}

fn identity_basis(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Removes the top eigenvector of the worst compressed average until every
/// `n ≤ N` is below `target`. On the diagonal subalgebra whole coordinates
/// are removed so the witness stays in the algebra. Stops once only
/// `min_cols` directions remain.
fn greedy_peel(d: &Dynamics, xj: &Operator, mut basis: CMat, target: f64, horizon: usize, min_cols: usize) -> CMat {
    let coordinate = d.subalgebra() == Subalgebra::Diagonal;
    loop {
        let s = scan(d, xj, &basis, horizon);
        if s.sup <= target || basis.ncols() <= min_cols {
            return basis;
        }
        let r = basis.ncols();
        if coordinate {
            // drop the kept coordinate carrying the largest diagonal entry
            let top = (0..r).max_by(|&i, &j| s.worst[(i, i)].re.total_cmp(&s.worst[(j, j)].re)).expect("r > 0");
            basis = basis.remove_column(top);
            continue;
        }
        let w = linalg::hermitian_eigh(&s.worst).1.column(r - 1).into_owned();
        let keep = CMat::identity(r, r) - &w * w.adjoint();
        let (vals, kv) = linalg::hermitian_eigh(&keep);
        let cols: Vec<usize> = (0..r).filter(|&i| vals[i] > 0.5).collect();
        let mut reduced = CMat::zeros(r, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            reduced.set_column(j, &kv.column(i));
        }
        basis = &basis * reduced;
    }
}

fn spectral_cut(d: &Dynamics, xj: &Operator, target: f64, horizon: usize) -> Result<CMat> {
    let sub = log_grid(horizon, SUBGRID_POINTS);
    let dim = xj.dim();
    let mut z2 = CMat::zeros(dim, dim);
    let mut sum = CMat::zeros(dim, dim);
    let mut idx = 0;
    for (k, y) in d.orbit(xj).take(horizon).enumerate() {
        sum += y.matrix();
        if k + 1 == sub[idx] {
            let a = &sum / linalg_scalar(k + 1);
            z2 += &a * &a;
            idx += 1;
            if idx == sub.len() {
                break;
            }
        }
    }
    let bound = target * target;
    if d.subalgebra() == Subalgebra::Diagonal {
        let keep: Vec<usize> = (0..dim).filter(|&i| z2[(i, i)].re <= bound).collect();
        return Ok(coordinate_basis(dim, &keep));
    }
    let z2 = Operator::from_matrix_unchecked(xj.ctx(), (&z2 + z2.adjoint()) * C64::new(0.5, 0.0));
    Ok(z2.spectral_projection(f64::NEG_INFINITY, bound)?.range_basis())
}

fn coordinate_basis(dim: usize, keep: &[usize]) -> CMat {
    let mut b = CMat::zeros(dim, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        b[(i, j)] = C64::new(1.0, 0.0);
    }
    b
}

fn trace_perp_of(basis: &CMat, dim: usize) -> f64 {
    1.0 - basis.ncols() as f64 / dim as f64
}

fn part_projection(d: &Dynamics, xj: &Operator, target: f64, budget: f64, horizon: usize) -> Result<(CMat, WitnessMethod)> {
    let dim = xj.dim();
    let full = identity_basis(dim);
    if scan(d, xj, &full, horizon).sup <= target {
        return Ok((full, WitnessMethod::SpectralCut));
    }
    let cut = spectral_cut(d, xj, target, horizon)?;
    let (mut basis, mut method) = if scan(d, xj, &cut, horizon).sup <= target {
        (cut, WitnessMethod::SpectralCut)
    } else {
        (greedy_peel(d, xj, cut, target, horizon, 0), WitnessMethod::GreedyPeel)
    };
    if trace_perp_of(&basis, dim) > budget {
        // infeasible target: best effort within the trace budget
        let min_cols = dim - ((budget * dim as f64 + 1e-9).floor() as usize).min(dim);
        basis = greedy_peel(d, xj, full, target, horizon, min_cols);
        method = WitnessMethod::GreedyPeel;
    }
    Ok((basis, method))
}

/// Four positive parts with `x = (x₁ − x₂) + i(x₃ − x₄)`.
pub fn positive_parts(x: &Operator) -> [Operator; 4] {
    let (x1, x2) = x.real_part().jordan_parts();
    let (x3, x4) = x.imag_part().jordan_parts();
    [x1, x2, x3, x4]
}

/// Searches for `e` with `τ(e⊥) ≤ eps_budget` and
/// `sup_{n ≤ N, λ} ‖e a_n(x,λ) e‖_∞ ≤ delta_target`; reports what was
/// actually achieved and certified.
pub fn find_witness(
    d: &Dynamics,
    x: &Operator,
    eps_budget: f64,
    delta_target: f64,
    horizon: usize,
    grid: &LambdaGrid,
) -> Result<ProjectionWitness> {
    if !(eps_budget > 0.0 && eps_budget < 1.0) {
        return Err(Error::InvalidParameter(format!("eps budget {eps_budget} must lie in (0, 1)")));
    }
    if !(delta_target > 0.0) {
        return Err(Error::InvalidParameter(format!("delta target {delta_target} must be positive")));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon N must be >= 1".into()));
    }
    d.ctx().check_op(x)?;
    let ctx = x.ctx();
    let dim = x.dim();
    let parts = positive_parts(x);
    let x_inf = x.op_norm();

    // (τ(e_j⊥), method) per part; `None` when the part needs no cut
    let mut own: Vec<Option<(Projection, WitnessMethod)>> = vec![None, None, None, None];
    if x_inf > delta_target {
        let target = delta_target * PART_DELTA_SHARE;
        let budget = eps_budget * PART_EPS_SHARE;
        for (slot, xj) in own.iter_mut().zip(&parts) {
            if xj.op_norm() == 0.0 {
                continue;
            }
            let (basis, method) = part_projection(d, xj, target, budget, horizon)?;
            if basis.ncols() < dim {
                *slot = Some((Projection::from_orthonormal_columns(ctx, &basis), method));
            }
        }
    }
    let cuts: Vec<&(Projection, WitnessMethod)> = own.iter().flatten().collect();
    let e = Projection::meet_all(ctx, cuts.iter().map(|c| &c.0))?;
    let method = match cuts.as_slice() {
        [] => WitnessMethod::SpectralCut,
        [one] => one.1,
        _ => WitnessMethod::Meet,
    };

    let basis = e.range_basis();
    let mut part_reports = Vec::new();
    let mut certified = 0.0;
    for (i, xj) in parts.iter().enumerate() {
        let s = if xj.op_norm() == 0.0 { 0.0 } else { scan(d, xj, &basis, horizon).sup };
        certified += 6.0 * s;
        let (trace_perp, method) = own[i].as_ref().map_or((0.0, WitnessMethod::SpectralCut), |(p, m)| (p.trace_perp(), *m));
        part_reports.push(PartWitness { index: i + 1, method, trace_perp, sup_unweighted: s });
    }
    let delta_achieved = if basis.ncols() == 0 { 0.0 } else { certified.min(x_inf) };
    let eps_achieved = e.trace_perp().max(0.0);

    let sub = log_grid(horizon, SUBGRID_POINTS);
    let grid_sup_observed = sup_profile(d, x, &e, &sub, grid)?
        .iter()
        .map(|r| r.sup_bilateral())
        .fold(0.0, f64::max);
    let slack = 1e-9 * x_inf.max(1.0);
    if grid_sup_observed > delta_achieved + slack {
        return Err(Error::Numerical(format!(
            "witness certificate {delta_achieved:e} below observed grid supremum {grid_sup_observed:e}"
        )));
    }
    Ok(ProjectionWitness {
        e,
        eps_achieved,
        delta_achieved,
        horizon,
        grid: grid.spec(),
        method,
        eps_budget,
        delta_target,
        within_budget: eps_achieved <= eps_budget + 1e-12 && delta_achieved <= delta_target + slack,
        grid_sup_observed,
        parts: part_reports,
    })
}
