use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Dynamics, Subalgebra};
use crate::algebra::{random, Operator};
use crate::linalg::{self, CMat};
use crate::C64;

/// Clustering tolerance on `|μ| − 1` and on angular separation.
pub const UNIMODULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsReport {
    pub trace_preserving: bool,
    pub positive_on_samples: bool,
    pub contraction_inf: bool,
    pub homomorphism: bool,
    pub ergodic: bool,
    pub weakly_mixing: bool,
    pub fixed_space_dim: usize,
    /// Angles `t ∈ [0, 1)` of unimodular eigenvalues `e^{2πit}`, clustered and sorted.
    pub unimodular_spectrum: Vec<f64>,
    /// `1 − max{|μ| : μ not unimodular}`; `1` when every eigenvalue is unimodular or zero.
    pub spectral_gap: f64,
    pub samples: usize,
    pub seed: u64,
}

fn angle_of(z: C64) -> f64 {
    (z.arg() / std::f64::consts::TAU).rem_euclid(1.0)
}

/// Groups the unimodular entries of `eigs` into clusters of nearby angles.
///
/// Returns `(representative angle, member indices)` sorted by angle. Angles
/// within `UNIMODULAR_TOL` of 1 are folded onto 0.
pub fn cluster_unimodular(eigs: &[C64]) -> Vec<(f64, Vec<usize>)> {
    let mut items: Vec<(f64, usize)> = eigs
        .iter()
        .enumerate()
        .filter(|(_, z)| (z.norm() - 1.0).abs() <= UNIMODULAR_TOL)
        .map(|(i, z)| {
            let a = angle_of(*z);
            (if 1.0 - a <= UNIMODULAR_TOL { 0.0 } else { a }, i)
        })
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    for (a, i) in items {
        match clusters.last_mut() {
            Some((_, idx)) if a - members.last().copied().unwrap_or(a) <= UNIMODULAR_TOL => {
                idx.push(i);
                members.push(a);
            }
            _ => {
                if let Some(last) = clusters.last_mut() {
                    last.0 = members.iter().sum::<f64>() / members.len() as f64;
                }
                members.clear();
                members.push(a);
                clusters.push((a, vec![i]));
            }
        }
    }
    if let Some(last) = clusters.last_mut() {
        last.0 = members.iter().sum::<f64>() / members.len() as f64;
    }
    clusters
}

fn sample(d: &Dynamics, rng: &mut ChaCha8Rng) -> Operator {
    let x = random::ginibre(d.ctx, rng);
    match d.algebra {
        Subalgebra::Full => x,
        Subalgebra::Diagonal => d.from_coefficients(&d.coefficients(&x)),
    }
}

fn homomorphism_defect(d: &Dynamics) -> f64 {
    let n = d.ctx.dim();
    let units: Vec<(usize, usize)> = match d.algebra {
        Subalgebra::Full => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
        Subalgebra::Diagonal => (0..n).map(|i| (i, i)).collect(),
    };
    let images: Vec<CMat> = units.iter().map(|&(i, j)| d.apply_matrix(Operator::unit(d.ctx, i, j).matrix())).collect();
    let index = |i: usize, j: usize| units.iter().position(|&u| u == (i, j));
    let mut worst: f64 = 0.0;
    // α(e_ij) α(e_kl) must equal α(e_ij e_kl) = δ_jk α(e_il)
    for (a, &(i, j)) in units.iter().enumerate() {
        for (b, &(k, l)) in units.iter().enumerate() {
            let prod = &images[a] * &images[b];
            let defect = if j == k {
                let c = index(i, l).expect("unit set closed under products");
                linalg::max_abs(&(prod - &images[c]))
            } else {
                linalg::max_abs(&prod)
            };
            worst = worst.max(defect);
            if worst > 1e-6 {
                return worst;
            }
        }
    }
    worst
}

pub(super) fn validate(d: &Dynamics, samples: usize, seed: u64) -> DynamicsReport {
    let tol = d.ctx.tol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace_preserving = true;
    let mut positive = true;
    let mut contraction = true;
    for _ in 0..samples {
        let x = sample(d, &mut rng);
        let ax = d.apply_op(&x);
        if (ax.trace() - x.trace()).norm() > tol * x.norm2().max(1.0) {
            trace_preserving = false;
        }
        if ax.op_norm() > x.op_norm() * (1.0 + tol) + tol {
            contraction = false;
        }
        let y = sample(d, &mut rng);
        let yy = &y.adjoint() * &y;
        if !d.apply_op(&yy).is_positive() {
            positive = false;
        }
    }
    let homomorphism = homomorphism_defect(d) <= 1e-9;

    let s = d.superoperator();
    let size = s.nrows();
    let fixed = linalg::null_space(&(&s - CMat::identity(size, size)), UNIMODULAR_TOL).ncols();
    let eigs = linalg::eigenvalues(&s);
    let clusters = cluster_unimodular(&eigs);
    let unimodular: Vec<f64> = clusters.iter().map(|c| c.0).collect();
    let inner_radius = eigs
        .iter()
        .map(|z| z.norm())
        .filter(|r| (r - 1.0).abs() > UNIMODULAR_TOL)
        .fold(0.0, f64::max);
    let ergodic = fixed == 1;
    DynamicsReport {
        trace_preserving,
        positive_on_samples: positive,
        contraction_inf: contraction,
        homomorphism,
        ergodic,
        weakly_mixing: ergodic && unimodular == [0.0],
        fixed_space_dim: fixed,
        unimodular_spectrum: unimodular,
        spectral_gap: 1.0 - inner_radius,
        samples,
        seed,
    }
}
