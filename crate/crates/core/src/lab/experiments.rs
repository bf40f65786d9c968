use serde::Serialize;

use super::verdict::{lambda_index, ww_verdict, ConvergenceReport, Mode, Verdict, VerdictOptions};
use crate::algebra::{Operator, Projection};
use crate::averages::{log_grid, sup_profile, Compressor, LambdaGrid, WeightedAverager};
use crate::dynamics::Dynamics;
use crate::linalg::{self, CMat, CompensatedSum};
use crate::spectral::{correlation, eigen_split};
use crate::vdc::{asymptotic_bound, bound_chain_sweep, BoundChainRow};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationRow {
    pub n: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanErgodicReport {
    pub tau: C64,
    pub spectral_gap: f64,
    pub rows: Vec<DeviationRow>,
}

impl MeanErgodicReport {
    /// First grid `n` with deviation `≤ tol`.
    pub fn first_below(&self, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.deviation <= tol).map(|r| r.n)
    }

    pub fn final_deviation(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.deviation)
    }
}

fn require_ergodic(d: &Dynamics) -> Result<crate::DynamicsReport> {
    let report = d.validate(0, 0);
    if !report.ergodic {
        return Err(Error::Hypothesis(format!(
            "dynamics is not ergodic: fixed space has dimension {}",
            report.fixed_space_dim
        )));
    }
    Ok(report)
}

/// `‖a_n(x) − τ(x)𝕀‖₂` on an increasing `n` grid.
pub fn mean_ergodic_curve(d: &Dynamics, x: &Operator, n_grid: &[usize]) -> Result<MeanErgodicReport> {
    crate::averages::validate_n_grid(n_grid)?;
    d.ctx().check_op(x)?;
    let report = require_ergodic(d)?;
    let tau = x.trace();
    let dim = x.dim();
    let target = Operator::scalar(x.ctx(), tau);
    let mut sum = CompensatedSum::zeros(dim, dim);
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut orbit = d.orbit(x);
    let mut k = 0;
    for &n in n_grid {
        while k < n {
            sum.add_scaled(orbit.next().expect("orbit is infinite").matrix(), C64::new(1.0, 0.0));
            k += 1;
        }
        let avg = Operator::from_matrix_unchecked(x.ctx(), sum.value() / C64::new(n as f64, 0.0));
        rows.push(DeviationRow { n, deviation: (&avg - &target).norm2() });
    }
    Ok(MeanErgodicReport { tau, spectral_gap: report.spectral_gap, rows })
}

/// Mean ergodic check on a log-spaced grid up to `N`.
pub fn mean_ergodic_check(d: &Dynamics, x: &Operator, horizon: usize) -> Result<MeanErgodicReport> {
    mean_ergodic_curve(d, x, &log_grid(horizon, 64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// `max_{λ ≠ 1} ‖p a_n(x,λ) p‖_∞` over the grid.
    pub sup_nontrivial: f64,
    /// `‖p(a_n(x) − τ(x)𝕀)p‖_∞`.
    pub trivial_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakMixingReport {
    pub verdict: ConvergenceReport,
    pub decay: Vec<DecayRow>,
    pub final_sup_nontrivial: f64,
    pub final_trivial_deviation: f64,
    /// `‖x_1 − τ(x)𝕀‖₂` for the reported `λ = 1` limit.
    pub limit_deviation: f64,
}

impl WeakMixingReport {
    /// Both halves of the dichotomy within `tol_nontrivial` / `tol_trivial`.
    pub fn dichotomy_holds(&self, tol_nontrivial: f64, tol_trivial: f64) -> bool {
        self.final_sup_nontrivial <= tol_nontrivial && self.final_trivial_deviation <= tol_trivial
    }
}

fn is_trivial_angle(a: f64) -> bool {
    let s = a.rem_euclid(1.0);
    s.min(1.0 - s) <= crate::dynamics::UNIMODULAR_TOL
}

pub fn weak_mixing_experiment(
    d: &Dynamics,
    x: &Operator,
    eps: f64,
    horizon: usize,
    grid: &LambdaGrid,
    opts: &VerdictOptions,
) -> Result<WeakMixingReport> {
    let report = d.validate(0, 0);
    if !report.weakly_mixing {
        return Err(Error::Hypothesis(format!(
            "dynamics is not weakly mixing: unimodular spectrum {:?}, fixed space dimension {}",
            report.unimodular_spectrum, report.fixed_space_dim
        )));
    }
    let verdict = ww_verdict(d, x, eps, horizon, grid, Mode::Bilateral, opts)?;
    let comp = Compressor::new(&verdict.p);
    let ctx = x.ctx();
    let target = Operator::scalar(ctx, x.trace());
    let one = LambdaGrid::from_angles(vec![0.0])?;
    let n_grid = log_grid(horizon, 40);
    let mut avg = WeightedAverager::new(d, x, grid)?;
    let mut trivial = WeightedAverager::new(d, x, &one)?;
    let mut decay = Vec::with_capacity(n_grid.len());
    for &n in &n_grid {
        avg.advance_to(n);
        trivial.advance_to(n);
        let values = avg.values();
        let sup_nontrivial = grid
            .angles()
            .iter()
            .zip(&values)
            .filter(|(a, _)| !is_trivial_angle(**a))
            .map(|(_, v)| comp.bilateral(v))
            .fold(0.0, f64::max);
        let a1 = trivial.values().pop().expect("one grid point");
        decay.push(DecayRow { n, sup_nontrivial, trivial_deviation: comp.bilateral(&(&a1 - &target)) });
    }
    let last = *decay.last().expect("nonempty grid");
    let limit_deviation = grid
        .angles()
        .iter()
        .position(|&a| is_trivial_angle(a))
        .map_or(f64::NAN, |i| (&verdict.per_lambda[i].limit - &target).norm2());
    Ok(WeakMixingReport {
        verdict,
        decay,
        final_sup_nontrivial: last.sup_nontrivial,
        final_trivial_deviation: last.trivial_deviation,
        limit_deviation,
    })
}

#[derive(Debug, Clone)]
pub struct Theorem6Options {
    /// Refuse non-ergodic dynamics; when false the violation becomes a warning.
    pub require_ergodic: bool,
    pub verdict: VerdictOptions,
    pub chain_points: usize,
}

impl Default for Theorem6Options {
    fn default() -> Self {
        Self { require_ergodic: true, verdict: VerdictOptions::default(), chain_points: 24 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainRow {
    #[serde(flatten)]
    pub row: BoundChainRow,
    /// `m ≤ n − 1`, the range where the norm inequality is proved.
    pub in_range: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub m: usize,
    pub bound: f64,
    pub bound_times_m1: f64,
    /// `2/(m+1)‖x‖₂² + 4/(m+1) Σ|γ(l)|`.
    pub asymptotic_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "WW")]
    Ww,
    #[serde(rename = "bWW")]
    Bww,
    #[serde(rename = "none")]
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem6Report {
    pub classification: Classification,
    pub bilateral: ConvergenceReport,
    pub one_sided: ConvergenceReport,
    pub kronecker_dim: usize,
    pub x_perp_norm2: f64,
    /// `‖x − τ(x)𝕀‖₂`.
    pub mean_zero_norm2: f64,
    pub chain: Vec<ChainRow>,
    pub chain_holds: bool,
    /// `max_λ ‖a_N(x₀,λ)p‖²` for `x₀ = x − τ(x)𝕀`.
    pub final_uniform_sup_sq: f64,
    /// `max_λ ‖a_N(x_⊥,λ)p‖`, the uniform average on `K⊥`.
    pub perp_uniform_sup: f64,
    pub largest_m: usize,
    pub bound_at_largest_m: f64,
    pub tail_below_largest_m_bound: bool,
    pub scaling: Vec<ScalingRow>,
    /// `max/min` of `(m+1)·bound` over the sweep at `n = N`.
    pub scaling_spread: f64,
    pub scaling_within_factor_2: bool,
    pub warnings: Vec<String>,
}

pub fn theorem6_experiment(
    d: &Dynamics,
    x: &Operator,
    eps: f64,
    horizon: usize,
    m_sweep: &[usize],
    grid: &LambdaGrid,
    opts: &Theorem6Options,
) -> Result<Theorem6Report> {
    if !d.is_homomorphism_kind() {
        return Err(Error::Hypothesis("theorem 6 needs a *-homomorphism".into()));
    }
    if m_sweep.is_empty() {
        return Err(Error::InvalidParameter("m sweep must be nonempty".into()));
    }
    let report = d.validate(0, 0);
    let mut warnings = Vec::new();
    if !report.ergodic {
        let msg = format!("hypothesis violated: dynamics is not ergodic (fixed space dimension {})", report.fixed_space_dim);
        if opts.require_ergodic {
            return Err(Error::Hypothesis(msg));
        }
        warnings.push(msg);
    }
    let bilateral = ww_verdict(d, x, eps, horizon, grid, Mode::Bilateral, &opts.verdict)?;
    let one_sided = ww_verdict(d, x, eps, horizon, grid, Mode::OneSided, &opts.verdict)?;
    warnings.extend(bilateral.warnings.iter().cloned());
    let classification = if one_sided.all_converged() {
        Classification::Ww
    } else if bilateral.all_converged() {
        Classification::Bww
    } else {
        Classification::Neither
    };

    let ctx = x.ctx();
    let x0 = x - &Operator::scalar(ctx, x.trace());
    let p = bilateral.p.clone();
    let mut ms = m_sweep.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let n_grid = log_grid(horizon, opts.chain_points);
    let rows = bound_chain_sweep(d, &x0, &p, &n_grid, &ms, grid)?;
    let scale = x0.op_norm().powi(2).max(f64::MIN_POSITIVE);
    let chain: Vec<ChainRow> = rows
        .into_iter()
        .map(|row| {
            let holds = row.holds(1e-12 * scale);
            ChainRow { in_range: row.m < row.n, holds, row }
        })
        .collect();
    let chain_holds = chain.iter().filter(|r| r.in_range).all(|r| r.holds);

    let largest_m = *ms.last().expect("nonempty");
    let at_n: Vec<&ChainRow> = chain.iter().filter(|r| r.row.n == horizon).collect();
    let final_uniform_sup_sq = at_n.first().map_or(0.0, |r| r.row.uniform_sup_sq);
    let bound_at_largest_m = at_n.iter().find(|r| r.row.m == largest_m).map_or(f64::NAN, |r| r.row.bound);
    let c = correlation(d, &x0, largest_m)?;
    let scaling: Vec<ScalingRow> = at_n
        .iter()
        .map(|r| ScalingRow {
            m: r.row.m,
            bound: r.row.bound,
            bound_times_m1: r.row.bound * (r.row.m as f64 + 1.0),
            asymptotic_bound: asymptotic_bound(&c, r.row.m).unwrap_or(f64::NAN),
        })
        .collect();
    let (lo, hi) = scaling
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.bound_times_m1), hi.max(s.bound_times_m1)));
    let scaling_spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };

    let split = eigen_split(d).split(d, x);
    let perp_uniform_sup = sup_profile(d, &split.x_perp, &p, &[horizon], grid)?[0].sup_one_sided();

    Ok(Theorem6Report {
        classification,
        kronecker_dim: bilateral.kronecker_dim,
        x_perp_norm2: bilateral.x_perp_norm2,
        bilateral,
        one_sided,
        mean_zero_norm2: x0.norm2(),
        chain,
        chain_holds,
        final_uniform_sup_sq,
        perp_uniform_sup,
        largest_m,
        bound_at_largest_m,
        tail_below_largest_m_bound: final_uniform_sup_sq <= bound_at_largest_m,
        scaling,
        scaling_spread,
        scaling_within_factor_2: scaling_spread <= 2.0,
        warnings,
    })
}

/// `p_λ = p ∧ e_λ` with `τ(p − p_λ) ≤ ν` along which the one-sided
/// differences `(a_n(x,λ) − x_λ)p_λ` are tracked.
#[derive(Debug, Clone, Serialize)]
pub struct Refinement {
    pub angle: f64,
    pub nu: f64,
    #[serde(serialize_with = "super::witness::serialize_projection")]
    pub p_lambda: Projection,
    pub trace_loss: f64,
    /// `(n, ‖(a_n(x,λ) − x_λ)p_λ‖_∞)` over the report's tail window.
    pub one_sided_errors: Vec<(usize, f64)>,
}

pub fn refine_for_lambda(d: &Dynamics, x: &Operator, report: &ConvergenceReport, angle: f64, nu: f64) -> Result<Refinement> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter("nu must be non-negative".into()));
    }
    let i = lambda_index(report, angle);
    let lv = &report.per_lambda[i];
    let ctx = x.ctx();
    let dim = x.dim();
    let single = LambdaGrid::from_angles(vec![lv.angle])?;
    let mut avg = WeightedAverager::new(d, x, &single)?;
    let mut diffs = Vec::new();
    for &n in &report.tail_window {
        avg.advance_to(n);
        let a = avg.values().pop().expect("one point");
        diffs.push((n, &a - &lv.limit));
    }
    let mut y = CMat::zeros(dim, dim);
    for (_, e) in &diffs {
        y += e.matrix().adjoint() * e.matrix();
    }
    // ascending eigenvalues: keep the smallest, drop the top `removable`
    let (_, vecs) = linalg::hermitian_eigh(&y);
    let removable = ((nu * dim as f64) + 1e-9).floor() as usize;
    let keep = dim - removable.min(dim);
    let cols = vecs.columns(0, keep).into_owned();
    let e_lambda = Projection::from_orthonormal_columns(ctx, &cols);
    let p_lambda = report.p.meet(&e_lambda)?;
    let comp = Compressor::new(&p_lambda);
    let one_sided_errors = diffs.iter().map(|(n, e)| (*n, comp.one_sided(e))).collect();
    Ok(Refinement {
        angle: lv.angle,
        nu,
        trace_loss: (report.p.trace() - p_lambda.trace()).max(0.0),
        p_lambda,
        one_sided_errors,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub horizon: usize,
    pub verdicts: Vec<Verdict>,
    pub doubled: Vec<Verdict>,
    pub stable: bool,
}

/// Verdicts at `N` and `2N` agree.
pub fn verdict_stability(
    d: &Dynamics,
    x: &Operator,
    eps: f64,
    horizon: usize,
    grid: &LambdaGrid,
    mode: Mode,
    opts: &VerdictOptions,
) -> Result<StabilityReport> {
    let a = ww_verdict(d, x, eps, horizon, grid, mode, opts)?.verdicts();
    let b = ww_verdict(d, x, eps, 2 * horizon, grid, mode, opts)?.verdicts();
    Ok(StabilityReport { horizon, stable: a == b, verdicts: a, doubled: b })
}
