//! Wiener–Wintner verdicts: does `{a_n(x,λ)p}` (or `{p a_n(x,λ) p}`) converge
//! for every grid `λ`?
//!
//! `x = x_K + x_⊥`. On `K` the averages have the exact closed form
//! `a_n(b,λ) = b·(1/n)Σ(λμ_b)^k`, so the `K` limit `Σ_{λμ_b = 1} c_b b` is
//! known and needs no projection. On `K⊥` convergence is judged from the
//! Cauchy tail `sup_{n₁,n₂ ≥ N/2} ‖p(a_{n₁} − a_{n₂})p‖` against a threshold,
//! with `p` a witness for `x_⊥` at budget `ε/3`. The remaining two thirds of
//! the budget (domain and `K`-part projections) are `𝕀` in finite dimension.

use rayon::prelude::*;
use serde::Serialize;

use super::witness::{find_witness, serialize_projection, ProjectionWitness};
use crate::algebra::{Operator, Projection};
use crate::averages::{log_grid, unit_power, LambdaGrid, WeightedAverager};
use crate::dynamics::{Dynamics, UNIMODULAR_TOL};
use crate::linalg::{self, CMat};
use crate::spectral::{eigen_split, EigenSplit};
use crate::{Error, Result, C64};

pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-5;
const WINDOW_POINTS: usize = 16;
const SCALAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Mode {
    /// `{a_n(x,λ)p}`.
    #[serde(rename = "WW")]
    OneSided,
    /// `{p a_n(x,λ) p}`.
    #[serde(rename = "bWW")]
    Bilateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct VerdictOptions {
    pub threshold: f64,
    /// Witness target for `x_⊥`; defaults to `‖x_⊥‖_∞` (so `p = 𝕀`).
    pub delta: Option<f64>,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self { threshold: DEFAULT_TAIL_THRESHOLD, delta: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaVerdict {
    pub angle: f64,
    /// `x_λ`: exact `K` limit plus `a_N(x_⊥, λ)`.
    pub limit: Operator,
    /// Cauchy tail of the `K⊥` part over `n ≥ N/2`.
    pub cauchy_tail: f64,
    /// Cauchy tail of `x` itself (includes the `K` part's `O(1/n)` transient).
    pub raw_tail: f64,
    /// `‖x_λ − τ(x_λ)𝕀‖₂`.
    pub scalar_deviation: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub eps: f64,
    pub threshold: f64,
    #[serde(serialize_with = "serialize_projection")]
    pub p: Projection,
    pub tau_p_perp: f64,
    pub per_lambda: Vec<LambdaVerdict>,
    /// `max_λ` of the `K⊥` Cauchy tails.
    pub uniform_tail: f64,
    pub raw_uniform_tail: f64,
    pub witness: ProjectionWitness,
    pub kronecker_dim: usize,
    pub x_perp_norm2: f64,
    pub n_grid: Vec<usize>,
    pub tail_window: Vec<usize>,
    pub lipschitz_slack: f64,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.per_lambda.iter().all(|v| v.verdict == Verdict::Converged)
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.per_lambda.iter().map(|v| v.verdict).collect()
    }
}

/// Evenly spaced points of `[lo, hi]`, deduplicated.
pub(crate) fn window(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let lo = lo.max(1);
    let mut out: Vec<usize> = (0..=points)
        .map(|i| lo + ((hi - lo) as f64 * i as f64 / points as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

struct Compressed {
    basis: Option<CMat>,
    mode: Mode,
}

impl Compressed {
    fn apply(&self, a: &CMat) -> CMat {
        match (&self.basis, self.mode) {
            (None, _) => a.clone(),
            (Some(v), Mode::OneSided) => a * v,
            (Some(v), Mode::Bilateral) => v.adjoint() * a * v,
        }
    }
}

/// `[n][λ]` compressed averages at each window point.
fn compressed_averages(d: &Dynamics, x: &Operator, grid: &LambdaGrid, ns: &[usize], c: &Compressed) -> Result<(Vec<Vec<CMat>>, Vec<Operator>, f64)> {
    let mut avg = WeightedAverager::new(d, x, grid)?;
    let mut out = Vec::with_capacity(ns.len());
    let mut last = Vec::new();
    for &n in ns {
        avg.advance_to(n);
        let values = avg.values();
        out.push(values.par_iter().map(|a| c.apply(a.matrix())).collect());
        last = values;
    }
    Ok((out, last, avg.lipschitz_slack()))
}

/// `max_{i<j} ‖C_i − C_j‖` for each `λ`.
fn pairwise_tails(vals: &[Vec<CMat>], grid_len: usize) -> Vec<f64> {
    (0..grid_len)
        .into_par_iter()
        .map(|l| {
            let mut worst: f64 = 0.0;
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    worst = worst.max(linalg::op_norm(&(&vals[i][l] - &vals[j][l])));
                }
            }
            worst
        })
        .collect()
}

/// `K` limit at angle `θ_λ`: eigen-components with `θ_λ + θ_b ≡ 0`.
fn k_limit(split: &EigenSplit, comps: &[C64], angle: f64, zero: &Operator) -> Operator {
    let mut acc = zero.clone();
    for (b, c) in split.basis.iter().zip(comps) {
        let s = (angle + b.angle).rem_euclid(1.0);
        if s.min(1.0 - s) <= UNIMODULAR_TOL {
            acc = &acc + &(&b.op * *c);
        }
    }
    acc
}

/// Default report `n` grid: log-spaced up to `N` plus the tail windows.
pub(crate) fn report_n_grid(horizon: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let early = window(horizon / 4, horizon / 2, WINDOW_POINTS / 2);
    let late = window(horizon / 2, horizon, WINDOW_POINTS);
    let mut all = log_grid(horizon, 32);
    all.extend(&early);
    all.extend(&late);
    all.sort_unstable();
    all.dedup();
    (all, early, late)
}

pub fn ww_verdict(
    d: &Dynamics,
    x: &Operator,
    eps: f64,
    horizon: usize,
    grid: &LambdaGrid,
    mode: Mode,
    opts: &VerdictOptions,
) -> Result<ConvergenceReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps {eps} must lie in (0, 1)")));
    }
    if horizon < 8 {
        return Err(Error::InvalidParameter("horizon N must be >= 8".into()));
    }
    if !(opts.threshold > 0.0) {
        return Err(Error::InvalidParameter("tail threshold must be positive".into()));
    }
    d.ctx().check_op(x)?;
    let ctx = x.ctx();
    let split = eigen_split(d);
    let mut warnings = split.warnings.clone();
    let comps = split.components(d, x);
    let ks = split.split(d, x);

    let delta = opts.delta.unwrap_or_else(|| ks.x_perp.op_norm()).max(f64::MIN_POSITIVE);
    let witness = find_witness(d, &ks.x_perp, eps / 3.0, delta, horizon, grid)?;
    let identity = Projection::identity(ctx);
    let p = Projection::meet_all(ctx, [&witness.e, &identity, &identity])?;
    let tau_p_perp = p.trace_perp().max(0.0);
    let basis = p.range_basis();
    let comp = Compressed { basis: if basis.ncols() == ctx.dim() { None } else { Some(basis) }, mode };

    let (n_grid, early, late) = report_n_grid(horizon);
    let (perp_late, perp_last, _) = compressed_averages(d, &ks.x_perp, grid, &late, &comp)?;
    let (perp_early, _, _) = compressed_averages(d, &ks.x_perp, grid, &early, &comp)?;
    let (raw_late, _, slack) = compressed_averages(d, x, grid, &late, &comp)?;
    let tails = pairwise_tails(&perp_late, grid.len());
    let early_tails = pairwise_tails(&perp_early, grid.len());
    let raw_tails = pairwise_tails(&raw_late, grid.len());

    let ergodic = d.validate(0, 0).ergodic;
    let zero = Operator::zero(ctx);
    let mut per_lambda = Vec::with_capacity(grid.len());
    let mut non_scalar = 0usize;
    for (i, &angle) in grid.angles().iter().enumerate() {
        let exact = k_limit(&split, &comps, angle, &zero);
        // the flag looks at the exact K part; the K⊥ residue is finite-N noise
        if (&exact - &Operator::scalar(ctx, exact.trace())).norm2() > SCALAR_TOL * x.norm2().max(1.0) {
            non_scalar += 1;
        }
        let limit = &exact + &perp_last[i];
        let scalar_deviation = (&limit - &Operator::scalar(ctx, limit.trace())).norm2();
        let verdict = if tails[i] <= opts.threshold {
            Verdict::Converged
        } else if tails[i] >= 0.9 * early_tails[i] {
            Verdict::Diverged
        } else {
            Verdict::Inconclusive
        };
        per_lambda.push(LambdaVerdict { angle, limit, cauchy_tail: tails[i], raw_tail: raw_tails[i], scalar_deviation, verdict });
    }
    if ergodic && non_scalar > 0 {
        warnings.push(format!("x_λ is not a scalar multiple of 𝕀 at {non_scalar} grid point(s) despite ergodicity"));
    }
    if !witness.within_budget {
        warnings.push(format!(
            "witness for the K⊥ part missed its budget: τ(e⊥) = {:.3e}, δ' = {:.3e}",
            witness.eps_achieved, witness.delta_achieved
        ));
    }
    Ok(ConvergenceReport {
        mode,
        eps,
        threshold: opts.threshold,
        p,
        tau_p_perp,
        uniform_tail: tails.iter().copied().fold(0.0, f64::max),
        raw_uniform_tail: raw_tails.iter().copied().fold(0.0, f64::max),
        per_lambda,
        witness,
        kronecker_dim: split.dim(),
        x_perp_norm2: ks.x_perp.norm2(),
        n_grid,
        tail_window: late,
        lipschitz_slack: slack,
        warnings,
    })
}

/// `x_λ` for the grid angle closest to `angle` is `report.per_lambda[i].limit`;
/// this helper returns the index.
pub fn lambda_index(report: &ConvergenceReport, angle: f64) -> usize {
    let dist = |a: f64| {
        let s = (a - angle).rem_euclid(1.0);
        s.min(1.0 - s)
    };
    (0..report.per_lambda.len())
        .min_by(|&i, &j| dist(report.per_lambda[i].angle).total_cmp(&dist(report.per_lambda[j].angle)))
        .unwrap_or(0)
}

/// `(1/n) Σ_{k<n} z^k` for `|z| = 1`.
pub fn geometric_mean_weight(angle: f64, n: usize) -> C64 {
    let s = angle.rem_euclid(1.0);
    if s.min(1.0 - s) <= UNIMODULAR_TOL {
        return C64::new(1.0, 0.0);
    }
    (C64::new(1.0, 0.0) - unit_power(angle, n)) / (C64::new(1.0, 0.0) - unit_power(angle, 1)) / n as f64
}
