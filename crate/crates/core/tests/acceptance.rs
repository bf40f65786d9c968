//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wwlab_core::algebra::random;
use wwlab_core::averages::{cis_turns, unit_power};
use wwlab_core::lab::{find_witness, mean_ergodic_curve, theorem6_experiment, weak_mixing_experiment, Theorem6Options, VerdictOptions};
use wwlab_core::scenario::{self, list_scenarios};
use wwlab_core::spectral::{check_positive_definite, correlation, spectral_measure, split_invariants, wiener_criterion};
use wwlab_core::vdc::{fuzz_instance, vdc_gap};
use wwlab_core::{AlgebraCtx, Dynamics, LambdaGrid, Operator, Subalgebra, WeightedAverager, C64};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn ctx(n: usize) -> AlgebraCtx {
    AlgebraCtx::new(n).unwrap()
}

fn q_cycle(q: usize) -> Dynamics {
    Dynamics::cyclic_shift(ctx(q)).on_subalgebra(Subalgebra::Diagonal).unwrap()
}

fn built(name: &str) -> scenario::Built {
    scenario::bundled(name).unwrap().build().unwrap()
}

/// Every certificate for every window `0 ≤ m ≤ n − 1` of 1000 random instances.
fn vdc_certificates() -> Vec<wwlab_core::VdcCertificate> {
    (0..1000u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let (a, _) = fuzz_instance(seed, 6, 8);
            (0..a.len()).map(move |m| vdc_gap(&a, m).unwrap()).collect::<Vec<_>>()
        })
        .collect()
}

fn c1_operator_inequality() -> Check {
    let certs = vdc_certificates();
    let worst = certs
        .iter()
        .map(|c| if c.gap_norm > 0.0 { c.gap_min_eig / c.gap_norm } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    let fails = certs.iter().filter(|c| c.gap_min_eig < -1e-9 * c.gap_norm).count();
    check(fails == 0, format!("{} certificates, worst min-eig/norm {worst:.3e}, {fails} below -1e-9", certs.len()))
}

fn c2_norm_bound() -> Check {
    let certs = vdc_certificates();
    let worst = certs.iter().map(|c| c.lhs_norm - c.rhs_norm_bound).fold(f64::NEG_INFINITY, f64::max);
    let fails = certs.iter().filter(|c| c.lhs_norm > c.rhs_norm_bound + 1e-9).count();
    check(fails == 0, format!("{} certificates, worst lhs - rhs {worst:.3e}, {fails} violations", certs.len()))
}

fn homomorphism_sample(seed: u64) -> (Dynamics, Operator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8usize);
    let k = ctx(n);
    let d = match seed % 3 {
        0 => Dynamics::unitary(random::unitary(k, &mut rng)).unwrap(),
        1 => Dynamics::permutation(k, random::permutation(n, &mut rng)).unwrap(),
        _ => Dynamics::permutation(k, random::permutation(n, &mut rng)).unwrap().on_subalgebra(Subalgebra::Diagonal).unwrap(),
    };
    let mut x = random::ginibre(k, &mut rng);
    if d.subalgebra() == Subalgebra::Diagonal {
        let diag: Vec<C64> = (0..n).map(|i| x.matrix()[(i, i)]).collect();
        x = Operator::diag(k, &diag).unwrap();
    }
    let s = x.norm2();
    (d, &x * (1.0 / s))
}

fn c3_positive_definite() -> Check {
    let worst = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let (d, x) = homomorphism_sample(seed);
            let c = correlation(&d, &x, 16).unwrap();
            (0..=16).map(|m| check_positive_definite(&c, m).unwrap()).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    check(worst >= -1e-10, format!("200 pairs, m <= 16, smallest Toeplitz eigenvalue {worst:.3e}"))
}

fn c4_eigenoperator_closed_form() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let n = 4;
    let angles: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let u = Operator::diag(ctx(n), &angles.iter().map(|&t| cis_turns(t)).collect::<Vec<_>>()).unwrap();
    let d = Dynamics::unitary(u).unwrap();
    let (i, j) = (1, 3);
    let x = Operator::unit(ctx(n), i, j);
    // u e_ij u* = e^{2πi(θ_i − θ_j)} e_ij
    let mu = angles[i] - angles[j];
    let grid = LambdaGrid::roots_of_unity(1024).unwrap();
    let horizon = 10_000;
    let mut avg = WeightedAverager::new(&d, &x, &grid).unwrap();
    let mut sums = vec![C64::new(0.0, 0.0); grid.len()];
    let mut worst = 0.0f64;
    for k in 0..horizon {
        avg.advance();
        let values = avg.values();
        for (g, s) in sums.iter_mut().enumerate() {
            *s += cis_turns((grid.angles()[g] + mu) * k as f64);
            let expected = *s / (k + 1) as f64;
            // Frobenius dominates the operator norm
            let m = values[g].matrix();
            let mut err = 0.0;
            for (r, c) in (0..n).flat_map(|r| (0..n).map(move |c| (r, c))) {
                let target = if (r, c) == (i, j) { expected } else { C64::new(0.0, 0.0) };
                err += (m[(r, c)] - target).norm_sqr();
            }
            worst = worst.max(err.sqrt());
        }
    }
    check(worst <= 1e-12, format!("n <= {horizon}, 1024 grid points, max error {worst:.3e}"))
}

fn c5_mean_ergodic() -> Check {
    let b = built("channel-weakmix");
    let gap = b.dynamics.validate(1, 0).spectral_gap;
    let n_max = (10.0 / gap * (1e6f64).ln()).floor() as usize;
    let curve = mean_ergodic_curve(&b.dynamics, &b.observable, &(1..=n_max).collect::<Vec<_>>()).unwrap();
    let reached = curve.first_below(1e-6);
    let q = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<f64> = (0..q).map(|_| rng.random::<f64>()).collect();
    let x = Operator::diag_real(ctx(q), &v).unwrap();
    let cyc = mean_ergodic_curve(&q_cycle(q), &x, &[q, 2 * q, 3 * q]).unwrap();
    let cyc_worst = cyc.rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    check(
        reached.is_some() && cyc_worst <= 1e-13,
        format!(
            "channel gap {gap:.4}, deviation {:.3e} at n = {n_max} (need 1e-6, first reached {reached:?}); q-cycle worst {cyc_worst:.1e}",
            curve.final_deviation()
        ),
    )
}

fn c6_split_invariants() -> Check {
    let mut worst = (0.0f64, 0.0f64);
    for s in list_scenarios() {
        let b = built(s.name);
        let inv = split_invariants(&b.dynamics, &b.observable).unwrap();
        worst = (worst.0.max(inv.orthogonality), worst.1.max(inv.invariance));
    }
    check(
        worst.0 <= 1e-10 && worst.1 <= 1e-10,
        format!("{} scenarios, orthogonality {:.2e}, invariance {:.2e}", list_scenarios().len(), worst.0, worst.1),
    )
}

fn c7_reconstruction() -> Check {
    let mut cases: Vec<(String, Dynamics, Operator)> = list_scenarios()
        .iter()
        .map(|s| (s.name.to_string(), built(s.name)))
        .filter(|(_, b)| b.dynamics.is_homomorphism_kind() && b.dynamics.ctx().dim() <= 8)
        .map(|(n, b)| (n, b.dynamics, b.observable))
        .collect();
    for seed in 0..6u64 {
        let (d, x) = homomorphism_sample(1000 + seed);
        cases.push((format!("random-{seed}"), d, x));
    }
    let mut worst = 0.0f64;
    for (_, d, x) in &cases {
        let c = correlation(d, x, 64).unwrap();
        worst = worst.max(spectral_measure(d, x).unwrap().reconstruction_error(&c));
    }
    check(worst <= 1e-9, format!("{} automorphism cases, |l| <= 64, max error {worst:.3e}", cases.len()))
}

fn c8_wiener_limit() -> Check {
    let q = 12;
    let b = built("spectral-q12");
    let xs: Vec<C64> = (0..q).map(|i| b.observable.matrix()[(i, i)]).collect();
    // masses |c_k|² with c_k = (1/q) Σ_j x_j e^{−2πijk/q}
    let mass_sq: f64 = (0..q)
        .map(|k| {
            let c: C64 = (0..q).map(|j| xs[j] * unit_power(-((j * k) as f64) / q as f64, 1)).sum::<C64>() / q as f64;
            c.norm_sqr().powi(2)
        })
        .sum();
    let m = 200 * q;
    let c = correlation(&b.dynamics, &b.observable, m).unwrap();
    let w = wiener_criterion(&c, m).unwrap();
    let err = (w - mass_sq).abs();
    check(err <= 1e-8, format!("m = {m}, W_m = {w:.10}, sum of squared masses {mass_sq:.10}, error {err:.3e}"))
}

fn c9_bound_chain() -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, q) in [("classical-q12", 12usize), ("tensorshift-4q", 4)] {
        let cfg = scenario::bundled(name).unwrap();
        let b = cfg.build().unwrap();
        let grid = LambdaGrid::from_spec(&cfg.params.lambda_grid).unwrap();
        let opts = Theorem6Options { require_ergodic: false, ..Default::default() };
        let t = theorem6_experiment(&b.dynamics, &b.observable, cfg.params.eps, 50 * q, &[0, 4, 16, 64], &grid, &opts).unwrap();
        let violations = t.chain.iter().filter(|r| !r.row.holds(1e-9)).count();
        let ok = violations == 0 && t.tail_below_largest_m_bound && t.scaling_within_factor_2;
        pass &= ok;
        parts.push(format!(
            "{name}: {violations}/{} chain violations, tail {:.2e} vs m=64 bound {:.2e}, (m+1)·bound spread {:.2}",
            t.chain.len(),
            t.final_uniform_sup_sq,
            t.bound_at_largest_m,
            t.scaling_spread
        ));
    }
    check(pass, parts.join("; "))
}

fn c10_weak_mixing() -> Check {
    let b = built("channel-weakmix");
    let grid = LambdaGrid::roots_of_unity(1024).unwrap();
    let w = weak_mixing_experiment(&b.dynamics, &b.observable, 0.1, 10_000, &grid, &VerdictOptions::default()).unwrap();
    check(
        w.final_sup_nontrivial <= 1e-5 && w.limit_deviation <= 1e-6,
        format!(
            "n = 10^4: max over lambda != 1 {:.3e} (need 1e-5), lambda = 1 deviation {:.3e} (need 1e-6)",
            w.final_sup_nontrivial, w.limit_deviation
        ),
    )
}

/// `max_{n ≤ N, λ} |a_n(x,λ)_ii|` for diagonal `x` under the cyclic shift.
fn diagonal_maxima(x: &[f64], horizon: usize, grid: &LambdaGrid) -> Vec<f64> {
    let q = x.len();
    let mut best = vec![0.0f64; q];
    let mut sums = vec![vec![C64::new(0.0, 0.0); q]; grid.len()];
    let mut y = x.to_vec();
    for k in 0..horizon {
        for (g, s) in sums.iter_mut().enumerate() {
            let w = unit_power(grid.angles()[g], k);
            for i in 0..q {
                s[i] += w * y[i];
                best[i] = best[i].max(s[i].norm() / (k + 1) as f64);
            }
        }
        y.rotate_right(1);
    }
    best
}

fn c11_witness() -> Check {
    let q = 12;
    let d = q_cycle(q);
    let grid = LambdaGrid::roots_of_unity(64).unwrap();
    let horizon = 4 * q;
    let mut deltas = Vec::new();
    let mut sound = true;
    for gamma in [0.1, 0.01] {
        let mut v = vec![0.0; q];
        v[0] = q as f64 * gamma;
        let x = Operator::diag_real(ctx(q), &v).unwrap();
        let w = find_witness(&d, &x, 0.5, 0.25 * v[0], horizon, &grid).unwrap();
        let maxima = diagonal_maxima(&v, horizon, &grid);
        let e = w.e.as_operator().matrix().clone();
        let kept: Vec<usize> = (0..q).filter(|&i| e[(i, i)].re > 0.5).collect();
        let observed = kept.iter().map(|&i| maxima[i]).fold(0.0, f64::max);
        let mut sorted = maxima.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let optimum = sorted.get(q - kept.len()).copied().unwrap_or(0.0);
        sound &= observed <= w.delta_achieved + 1e-12
            && optimum <= w.delta_achieved + 1e-12
            && (w.eps_achieved - (q - kept.len()) as f64 / q as f64).abs() < 1e-12
            && w.eps_achieved <= 0.5 + 1e-12;
        deltas.push(w.delta_achieved);
    }
    let ratio = deltas[0] / deltas[1];
    check(
        sound && (2.5..=40.0).contains(&ratio),
        format!("delta' = {:.3e} / {:.3e} (ratio {ratio:.3}), oracle consistent: {sound}", deltas[0], deltas[1]),
    )
}

fn c12_reproducibility() -> Check {
    let mut differing = Vec::new();
    for s in list_scenarios() {
        let cfg = scenario::bundled(s.name).unwrap();
        let a = scenario::run(&cfg, None).unwrap();
        let b = scenario::run(&cfg, None).unwrap();
        if a.table_csv != b.table_csv {
            differing.push(s.name);
        }
    }
    check(differing.is_empty(), format!("{} scenarios rerun, differing: {differing:?}", list_scenarios().len()))
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Check);
    let criteria: [Criterion; 12] = [
        (1, "vdc operator inequality", Duration::from_secs(30), c1_operator_inequality),
        (2, "vdc norm bound", Duration::from_secs(30), c2_norm_bound),
        (3, "correlation positive definiteness", Duration::from_secs(20), c3_positive_definite),
        (4, "eigenoperator closed form", Duration::from_secs(10), c4_eigenoperator_closed_form),
        (5, "mean ergodic convergence", Duration::from_secs(10), c5_mean_ergodic),
        (6, "kronecker split invariants", Duration::from_secs(5), c6_split_invariants),
        (7, "spectral measure reconstruction", Duration::from_secs(10), c7_reconstruction),
        (8, "wiener criterion limit", Duration::from_secs(5), c8_wiener_limit),
        (9, "uniform bound chain", Duration::from_secs(120), c9_bound_chain),
        (10, "weak mixing dichotomy", Duration::from_secs(30), c10_weak_mixing),
        (11, "witness soundness", Duration::from_secs(30), c11_witness),
        (12, "scenario reproducibility", Duration::from_secs(300), c12_reproducibility),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        let t = Instant::now();
        let c = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= budget;
        let pass = c.pass && in_time;
        failed += usize::from(!pass);
        let timing = if in_time { String::new() } else { format!(", over the {budget:?} budget") };
        println!(
            "{} [{id:>2}] {name}: {} ({:.2?}{timing})",
            if pass { "PASS" } else { "FAIL" },
            c.detail,
            elapsed
        );
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
