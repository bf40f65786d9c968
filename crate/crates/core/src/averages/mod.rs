//! Ergodic averages `a_n(x) = (1/n) Σ_{k<n} α^k(x)` and weighted averages
//! `a_n(x, λ) = (1/n) Σ_{k<n} λ^k α^k(x)`.
//!
//! [`WeightedAverager`] walks the orbit once and keeps one compensated
//! accumulator per grid point, or, for grids of `q`-th roots of unity, one
//! accumulator per residue `k mod q` which an FFT turns into all grid values
//! at once. Orbits are streamed, never stored.

mod grid;

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::algebra::{Operator, Projection};
use crate::dynamics::Dynamics;
use crate::linalg::{self, CMat, CompensatedSum};
use crate::{Error, Result, C64};

pub use grid::{cis_turns, unit_power, LambdaGrid, LambdaGridSpec};

fn check_dim(d: &Dynamics, x: &Operator) -> Result<()> {
    if x.dim() != d.ctx().dim() {
        return Err(Error::DimensionMismatch { expected: d.ctx().dim(), found: x.dim() });
    }
    Ok(())
}

fn sum_orbit(d: &Dynamics, x: &Operator, n: usize, weight: impl Fn(usize) -> C64) -> Operator {
    let dim = x.dim();
    let mut acc = CompensatedSum::zeros(dim, dim);
    for (k, y) in d.orbit(x).take(n).enumerate() {
        acc.add_scaled(y.matrix(), weight(k));
    }
    Operator::from_matrix_unchecked(x.ctx(), acc.value() / C64::new(n as f64, 0.0))
}

/// `a_n(x)`.
pub fn ergodic_avg(d: &Dynamics, x: &Operator, n: usize) -> Result<Operator> {
    check_dim(d, x)?;
    if n == 0 {
        return Err(Error::InvalidParameter("average length n must be >= 1".into()));
    }
    Ok(sum_orbit(d, x, n, |_| C64::new(1.0, 0.0)))
}

/// `a_n(x, λ)` for `λ` on the unit circle.
pub fn weighted_avg(d: &Dynamics, x: &Operator, lambda: C64, n: usize) -> Result<Operator> {
    let tol = d.ctx().tol().max(1e-12);
    if (lambda.norm() - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!("|λ| = {} is not 1", lambda.norm())));
    }
    weighted_avg_angle(d, x, lambda.arg() / std::f64::consts::TAU, n)
}

/// `a_n(x, e^{2πi·angle})`.
pub fn weighted_avg_angle(d: &Dynamics, x: &Operator, angle: f64, n: usize) -> Result<Operator> {
    check_dim(d, x)?;
    if n == 0 {
        return Err(Error::InvalidParameter("average length n must be >= 1".into()));
    }
    Ok(sum_orbit(d, x, n, |k| unit_power(angle, k)))
}

enum Engine {
    PerPoint(Vec<CompensatedSum>),
    Residues { sums: Vec<CompensatedSum>, fft: Arc<dyn Fft<f64>> },
}

/// Incremental evaluator of `a_n(x, λ)` for every `λ` of a grid.
pub struct WeightedAverager<'a> {
    dynamics: &'a Dynamics,
    grid: &'a LambdaGrid,
    next: Operator,
    n: usize,
    engine: Engine,
    max_orbit_norm: f64,
}

impl<'a> WeightedAverager<'a> {
    /// Uses the residue/FFT path whenever the grid is a full root-of-unity grid.
    pub fn new(dynamics: &'a Dynamics, x: &Operator, grid: &'a LambdaGrid) -> Result<Self> {
        let batched = grid.order().is_some();
        Self::with_path(dynamics, x, grid, batched)
    }

    /// Forces the per-point path (reference evaluation).
    pub fn naive(dynamics: &'a Dynamics, x: &Operator, grid: &'a LambdaGrid) -> Result<Self> {
        Self::with_path(dynamics, x, grid, false)
    }

    fn with_path(dynamics: &'a Dynamics, x: &Operator, grid: &'a LambdaGrid, batched: bool) -> Result<Self> {
        check_dim(dynamics, x)?;
        let dim = x.dim();
        let engine = match grid.order() {
            Some(q) if batched => Engine::Residues {
                sums: vec![CompensatedSum::zeros(dim, dim); q],
                fft: FftPlanner::new().plan_fft_inverse(q),
            },
            _ => Engine::PerPoint(vec![CompensatedSum::zeros(dim, dim); grid.len()]),
        };
        Ok(Self { dynamics, grid, next: x.clone(), n: 0, engine, max_orbit_norm: 0.0 })
    }

    /// Number of orbit terms summed so far.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &LambdaGrid {
        self.grid
    }

    /// `max_{k<n} ‖α^k(x)‖_∞`.
    pub fn max_orbit_norm(&self) -> f64 {
        self.max_orbit_norm
    }

    /// Adds the term `λ^n α^n(x)` and moves to `n + 1`.
    pub fn advance(&mut self) {
        let k = self.n;
        let y = self.next.matrix();
        match &mut self.engine {
            Engine::PerPoint(sums) => {
                for (i, s) in sums.iter_mut().enumerate() {
                    s.add_scaled(y, self.grid.power(i, k));
                }
            }
            Engine::Residues { sums, .. } => {
                let q = sums.len();
                sums[k % q].add_scaled(y, C64::new(1.0, 0.0));
            }
        }
        self.max_orbit_norm = self.max_orbit_norm.max(linalg::op_norm(y));
        self.next = self.dynamics.apply_op(&self.next);
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.advance();
        }
    }

    /// Unnormalized sums `Σ_{k<n} λ_i^k α^k(x)`, one matrix per grid point.
    fn sums(&self) -> Vec<CMat> {
        match &self.engine {
            Engine::PerPoint(sums) => sums.iter().map(CompensatedSum::value).collect(),
            Engine::Residues { sums, fft } => {
                let q = sums.len();
                let dim = self.next.dim();
                let residues: Vec<CMat> = sums.iter().map(CompensatedSum::value).collect();
                let mut out = vec![CMat::zeros(dim, dim); q];
                let mut buf = vec![C64::new(0.0, 0.0); q];
                for r in 0..dim {
                    for c in 0..dim {
                        for (b, m) in buf.iter_mut().zip(&residues) {
                            *b = m[(r, c)];
                        }
                        // inverse FFT: out_j = Σ_r buf_r e^{+2πi jr/q}
                        fft.process(&mut buf);
                        for (o, b) in out.iter_mut().zip(&buf) {
                            o[(r, c)] = *b;
                        }
                    }
                }
                out
            }
        }
    }

    /// `a_n(x, λ_i)` for every grid point.
    pub fn values(&self) -> Vec<Operator> {
        assert!(self.n > 0, "no terms accumulated yet");
        let scale = C64::new(1.0 / self.n as f64, 0.0);
        let ctx = self.next.ctx();
        self.sums().into_iter().map(|m| Operator::from_matrix_unchecked(ctx, m * scale)).collect()
    }

    /// Bound on `|∂_θ a_n|` times the grid's covering radius: how far the
    /// grid supremum can sit below the supremum over the whole circle.
    pub fn lipschitz_slack(&self) -> f64 {
        lipschitz_slack(self.n, self.max_orbit_norm, self.grid)
    }
}

/// `2π(n−1)·max_k‖α^k(x)‖_∞ · r` with `r` the grid covering radius (in turns).
pub fn lipschitz_slack(n: usize, max_orbit_norm: f64, grid: &LambdaGrid) -> f64 {
    std::f64::consts::TAU * n.saturating_sub(1) as f64 * max_orbit_norm * grid.covering_radius()
}

/// Compressed uniform norms `‖a p‖_∞` and `‖p a p‖_∞` against a fixed projection.
#[derive(Debug, Clone)]
pub struct Compressor {
    basis: Option<CMat>,
}

impl Compressor {
    pub fn new(p: &Projection) -> Self {
        let basis = p.range_basis();
        let full = basis.ncols() == p.ctx().dim();
        Self { basis: if full { None } else { Some(basis) } }
    }

    pub fn identity() -> Self {
        Self { basis: None }
    }

    /// `‖a p‖_∞`.
    pub fn one_sided(&self, a: &Operator) -> f64 {
        match &self.basis {
            None => a.op_norm(),
            Some(v) => linalg::op_norm(&(a.matrix() * v)),
        }
    }

    /// `‖p a p‖_∞`.
    pub fn bilateral(&self, a: &Operator) -> f64 {
        match &self.basis {
            None => a.op_norm(),
            Some(v) => linalg::op_norm(&(v.adjoint() * a.matrix() * v)),
        }
    }

    pub fn norm(&self, a: &Operator, bilateral: bool) -> f64 {
        if bilateral {
            self.bilateral(a)
        } else {
            self.one_sided(a)
        }
    }
}

/// Stored `a_n(x, λ)` values for a grid of `n` and `λ`.
#[derive(Debug, Clone)]
pub struct AverageTrajectory {
    pub n_grid: Vec<usize>,
    pub grid: LambdaGrid,
    /// `values[i][j] = a_{n_grid[i]}(x, λ_j)`.
    pub values: Vec<Vec<Operator>>,
}

impl AverageTrajectory {
    pub fn value(&self, n_index: usize, lambda_index: usize) -> &Operator {
        &self.values[n_index][lambda_index]
    }
}

pub(crate) fn validate_n_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be a nonempty increasing list of positive integers".into()));
    }
    Ok(())
}

/// `a_n(x, λ)` at every `n` in `n_grid` and every grid point, from a single orbit pass.
pub fn trajectory(d: &Dynamics, x: &Operator, n_grid: &[usize], grid: &LambdaGrid) -> Result<AverageTrajectory> {
    validate_n_grid(n_grid)?;
    let mut avg = WeightedAverager::new(d, x, grid)?;
    let mut values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        avg.advance_to(n);
        values.push(avg.values());
    }
    Ok(AverageTrajectory { n_grid: n_grid.to_vec(), grid: grid.clone(), values })
}

/// Per-`λ` compressed norms at one `n`.
#[derive(Debug, Clone, Serialize)]
pub struct SupRow {
    pub n: usize,
    pub one_sided: Vec<f64>,
    pub bilateral: Vec<f64>,
    pub lipschitz_slack: f64,
}

impl SupRow {
    pub fn sup_one_sided(&self) -> f64 {
        self.one_sided.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_bilateral(&self) -> f64 {
        self.bilateral.iter().copied().fold(0.0, f64::max)
    }
}

/// Compressed norms of `a_n(x, λ)` against `p` for each `n` in `n_grid`.
pub fn sup_profile(d: &Dynamics, x: &Operator, p: &Projection, n_grid: &[usize], grid: &LambdaGrid) -> Result<Vec<SupRow>> {
    validate_n_grid(n_grid)?;
    let comp = Compressor::new(p);
    let mut avg = WeightedAverager::new(d, x, grid)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        avg.advance_to(n);
        let values = avg.values();
        let (one_sided, bilateral): (Vec<f64>, Vec<f64>) =
            values.par_iter().map(|a| (comp.one_sided(a), comp.bilateral(a))).unzip();
        rows.push(SupRow { n, one_sided, bilateral, lipschitz_slack: avg.lipschitz_slack() });
    }
    Ok(rows)
}

/// `max_λ ‖a_n(x, λ) p‖_∞` (or `‖p a_n(x, λ) p‖_∞` when `bilateral`) over the grid.
pub fn uniform_sup(d: &Dynamics, x: &Operator, p: &Projection, n: usize, grid: &LambdaGrid, bilateral: bool) -> Result<f64> {
    let row = sup_profile(d, x, p, &[n], grid)?.pop().expect("one row");
    Ok(if bilateral { row.sup_bilateral() } else { row.sup_one_sided() })
}

/// Log-spaced increasing grid `1 ≤ n ≤ n_max` with about `points` entries,
/// always containing `n_max`.
pub fn log_grid(n_max: usize, points: usize) -> Vec<usize> {
    let n_max = n_max.max(1);
    let points = points.max(2);
    let mut out: Vec<usize> = (0..points)
        .map(|i| (n_max as f64).powf(i as f64 / (points - 1) as f64).round() as usize)
        .map(|v| v.clamp(1, n_max))
        .collect();
    out.push(n_max);
    out.sort_unstable();
    out.dedup();
    out
}
