use serde::Serialize;
use serde_json::{json, Value};

use super::build::Built;
use super::config::{Experiment, Params, ScenarioConfig, SCHEMA_VERSION};
use crate::lab::{
    find_witness, theorem6_experiment, weak_mixing_experiment, ww_verdict, Classification, ConvergenceReport,
    Theorem6Options, VerdictOptions,
};
use crate::spectral::{check_positive_definite, correlation, default_horizon, spectral_measure, split_invariants};
use crate::vdc::{fuzz_suite, vdc_gap, ww_bound_chain};
use crate::{Error, LambdaGrid, Result};

/// Tolerances asserted by the runner.
pub const VDC_NORM_TOL: f64 = 1e-9;
pub const TOEPLITZ_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
pub const SPLIT_TOL: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
/// An asserted verdict or certificate did not pass.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit code for an error surfaced while loading or running a scenario.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_SCHEMA,
    }
}

/// In-memory artifacts of one scenario run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: String,
    pub experiment: Experiment,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub report: Value,
    pub table_csv: String,
    /// Run metadata without timestamps.
    pub meta: Value,
}

impl Outcome {
    pub fn exit_code(&self, strict: bool) -> i32 {
        if !self.passed {
            EXIT_FAILED
        } else if strict && !self.warnings.is_empty() {
            EXIT_HYPOTHESIS
        } else {
            EXIT_OK
        }
    }
}

struct Parts {
    report: Value,
    csv: String,
    passed: bool,
    warnings: Vec<String>,
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn grid(p: &Params) -> Result<LambdaGrid> {
    LambdaGrid::from_spec(&p.lambda_grid)
}

fn verdict_options(p: &Params) -> VerdictOptions {
    VerdictOptions { threshold: p.threshold, delta: p.delta }
}

/// Runs `cfg`, replacing its root seed when `seed_override` is given.
pub fn run(cfg: &ScenarioConfig, seed_override: Option<u64>) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    let built = cfg.build()?;
    let inv = split_invariants(&built.dynamics, &built.observable)?;
    let mut parts = match cfg.experiment {
        Experiment::Validate => validate(&cfg, &built)?,
        Experiment::Vdc => vdc(&cfg, &built)?,
        Experiment::Spectral => spectral(&cfg, &built)?,
        Experiment::Witness => witness(&cfg, &built)?,
        Experiment::Ww => ww(&cfg, &built)?,
        Experiment::Theorem6 => theorem6(&cfg, &built)?,
        Experiment::Weakmix => weakmix(&cfg, &built)?,
    };
    if inv.orthogonality > SPLIT_TOL || inv.invariance > SPLIT_TOL {
        parts.warnings.push(format!(
            "Kronecker split defects: orthogonality {:e}, invariance {:e}",
            inv.orthogonality, inv.invariance
        ));
    }
    if let Value::Object(map) = &mut parts.report {
        map.insert("scenario".into(), json!(cfg.name));
        map.insert("experiment".into(), json!(cfg.experiment.as_str()));
        map.insert("passed".into(), json!(parts.passed));
        map.insert("warnings".into(), json!(parts.warnings));
        map.insert("kronecker_split".into(), serde_json::to_value(inv)?);
    }
    let meta = json!({
        "scenario": cfg.name,
        "experiment": cfg.experiment.as_str(),
        "schema_version": SCHEMA_VERSION,
        "seeds": built.seeds,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    });
    Ok(Outcome {
        scenario: cfg.name.clone(),
        experiment: cfg.experiment,
        passed: parts.passed,
        warnings: parts.warnings,
        report: parts.report,
        table_csv: parts.csv,
        meta,
    })
}

#[derive(Serialize)]
struct ValidateRow {
    trace_preserving: bool,
    positive_on_samples: bool,
    contraction_inf: bool,
    homomorphism: bool,
    ergodic: bool,
    weakly_mixing: bool,
    fixed_space_dim: usize,
    unimodular_count: usize,
    spectral_gap: f64,
}

fn validate(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let r = b.dynamics.validate(p.samples, b.seeds.dynamics);
    let mut passed = r.trace_preserving && r.positive_on_samples && r.contraction_inf;
    let mut warnings = Vec::new();
    for (name, want, got) in [
        ("ergodic", p.expect.ergodic, r.ergodic),
        ("weakly_mixing", p.expect.weakly_mixing, r.weakly_mixing),
        ("homomorphism", p.expect.homomorphism, r.homomorphism),
    ] {
        if let Some(w) = want {
            if w != got {
                passed = false;
                warnings.push(format!("expected {name} = {w}, found {got}"));
            }
        }
    }
    let row = ValidateRow {
        trace_preserving: r.trace_preserving,
        positive_on_samples: r.positive_on_samples,
        contraction_inf: r.contraction_inf,
        homomorphism: r.homomorphism,
        ergodic: r.ergodic,
        weakly_mixing: r.weakly_mixing,
        fixed_space_dim: r.fixed_space_dim,
        unimodular_count: r.unimodular_spectrum.len(),
        spectral_gap: r.spectral_gap,
    };
    Ok(Parts { report: json!({ "dynamics_report": r }), csv: to_csv(&[row])?, passed, warnings })
}

#[derive(Serialize)]
struct VdcRow {
    n: usize,
    m: usize,
    dim: usize,
    gap_min_eig: f64,
    gap_norm: f64,
    lhs: f64,
    rhs: f64,
    operator_holds: bool,
    norm_holds: bool,
}

fn vdc(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let rows: Vec<VdcRow> = match p.instances {
        Some(k) => fuzz_suite(k, b.seeds.root, p.max_dim, p.max_n)
            .into_iter()
            .map(|r| VdcRow {
                n: r.n,
                m: r.m,
                dim: r.dim,
                gap_min_eig: r.gap_min_eig,
                gap_norm: r.gap_norm,
                lhs: r.lhs,
                rhs: r.rhs,
                operator_holds: r.operator_holds(),
                norm_holds: r.norm_holds(VDC_NORM_TOL),
            })
            .collect(),
        None => {
            let orbit = b.dynamics.iterate(&b.observable, p.n - 1)?;
            p.m_sweep
                .iter()
                .map(|&m| {
                    let c = vdc_gap(&orbit, m)?;
                    Ok(VdcRow {
                        n: c.n,
                        m: c.m,
                        dim: c.dim,
                        gap_min_eig: c.gap_min_eig,
                        gap_norm: c.gap_norm,
                        lhs: c.lhs_norm,
                        rhs: c.rhs_norm_bound,
                        operator_holds: c.operator_holds(),
                        norm_holds: c.norm_holds(VDC_NORM_TOL),
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let operator_failures = rows.iter().filter(|r| !r.operator_holds).count();
    let norm_failures = rows.iter().filter(|r| !r.norm_holds).count();
    let worst_rel = rows
        .iter()
        .map(|r| if r.gap_norm > 0.0 { r.gap_min_eig / r.gap_norm } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    let report = json!({
        "rows": rows.len(),
        "operator_failures": operator_failures,
        "norm_failures": norm_failures,
        "worst_relative_gap": if rows.is_empty() { 0.0 } else { worst_rel },
    });
    Ok(Parts { report, csv: to_csv(&rows)?, passed: operator_failures == 0 && norm_failures == 0, warnings: vec![] })
}

#[derive(Serialize)]
struct LagRow {
    l: usize,
    gamma_re: f64,
    gamma_im: f64,
    atoms_re: Option<f64>,
    atoms_im: Option<f64>,
}

#[derive(Serialize)]
struct WienerRow {
    m: usize,
    w: f64,
    sum_squared_masses: Option<f64>,
}

fn spectral(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let (d, x) = (&b.dynamics, &b.observable);
    let mut warnings = Vec::new();
    let base = p.horizon.unwrap_or_else(|| default_horizon(d));
    let horizon = p.wiener_m.iter().copied().chain([base, p.toeplitz_order]).max().unwrap_or(base);
    let c = correlation(d, x, horizon)?;
    let order = p.toeplitz_order.min(horizon);
    let min_eig = check_positive_definite(&c, order)?;
    let pd_ok = min_eig >= -TOEPLITZ_TOL * c.get(0).re.max(1.0);
    let measure = match spectral_measure(d, x) {
        Ok(m) => Some(m),
        Err(Error::Unsupported(msg)) => {
            warnings.push(format!("no atomic measure: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    let recon = measure.as_ref().map(|m| {
        let short = crate::spectral::CorrelationSequence::from_nonnegative(c.nonnegative()[..=base.min(horizon)].to_vec())
            .expect("nonempty prefix");
        m.reconstruction_error(&short)
    });
    let recon_ok = recon.is_none_or(|e| e <= RECONSTRUCTION_TOL);
    let wiener: Vec<WienerRow> = p
        .wiener_m
        .iter()
        .map(|&m| {
            Ok(WienerRow {
                m,
                w: crate::spectral::wiener_criterion(&c, m)?,
                sum_squared_masses: measure.as_ref().map(|s| s.sum_squared_masses()),
            })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<LagRow> = (0..=horizon)
        .map(|l| {
            let g = c.get(l as i64);
            let f = measure.as_ref().map(|m| m.fourier(l as i64));
            LagRow { l, gamma_re: g.re, gamma_im: g.im, atoms_re: f.map(|z| z.re), atoms_im: f.map(|z| z.im) }
        })
        .collect();
    let report = json!({
        "horizon": horizon,
        "toeplitz_order": order,
        "toeplitz_min_eig": min_eig,
        "measure": measure,
        "reconstruction_error": recon,
        "wiener": wiener,
    });
    Ok(Parts { report, csv: to_csv(&rows)?, passed: pd_ok && recon_ok, warnings })
}

#[derive(Serialize)]
struct WitnessRow {
    l1_norm: f64,
    eps_budget: f64,
    delta_target: f64,
    eps_achieved: f64,
    delta_achieved: f64,
    grid_sup_observed: f64,
    rank: usize,
    within_budget: bool,
}

fn witness(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let g = grid(p)?;
    let x = &b.observable;
    let l1 = x.lp_norm(1.0)?;
    let delta = p.delta.unwrap_or(0.25 * x.op_norm());
    let scales = p.l1_scales.clone().unwrap_or_else(|| vec![l1]);
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for gamma in scales {
        let f = if l1 > 0.0 { gamma / l1 } else { 1.0 };
        let xs = x * f;
        let w = find_witness(&b.dynamics, &xs, p.eps, delta * f, p.n, &g)?;
        if !w.within_budget {
            warnings.push(format!(
                "witness at ||x||_1 = {gamma:e} is best effort: (eps, delta) = ({:e}, {:e}) for budget ({:e}, {:e})",
                w.eps_achieved, w.delta_achieved, p.eps, w.delta_target
            ));
        }
        rows.push(WitnessRow {
            l1_norm: gamma,
            eps_budget: p.eps,
            delta_target: w.delta_target,
            eps_achieved: w.eps_achieved,
            delta_achieved: w.delta_achieved,
            grid_sup_observed: w.grid_sup_observed,
            rank: w.e.rank(),
            within_budget: w.within_budget,
        });
        witnesses.push(w);
    }
    Ok(Parts { report: json!({ "witnesses": witnesses }), csv: to_csv(&rows)?, passed: true, warnings })
}

#[derive(Serialize)]
struct LambdaRow {
    angle: f64,
    verdict: crate::lab::Verdict,
    cauchy_tail: f64,
    raw_tail: f64,
    scalar_deviation: f64,
    limit_norm2: f64,
    limit_tau_re: f64,
    limit_tau_im: f64,
}

fn lambda_rows(r: &ConvergenceReport) -> Vec<LambdaRow> {
    r.per_lambda
        .iter()
        .map(|v| LambdaRow {
            angle: v.angle,
            verdict: v.verdict,
            cauchy_tail: v.cauchy_tail,
            raw_tail: v.raw_tail,
            scalar_deviation: v.scalar_deviation,
            limit_norm2: v.limit.norm2(),
            limit_tau_re: v.limit.trace().re,
            limit_tau_im: v.limit.trace().im,
        })
        .collect()
}

/// The common top-level report keys for convergence experiments.
fn convergence_report(r: &ConvergenceReport, chain: Value) -> Value {
    json!({
        "mode": r.mode,
        "eps": r.eps,
        "tau_p_perp": r.tau_p_perp,
        "uniform_tail": r.uniform_tail,
        "lipschitz_slack": r.lipschitz_slack,
        "per_lambda": r.per_lambda,
        "witness": r.witness,
        "vdc_chain": chain,
        "convergence": {
            "threshold": r.threshold,
            "raw_uniform_tail": r.raw_uniform_tail,
            "kronecker_dim": r.kronecker_dim,
            "x_perp_norm2": r.x_perp_norm2,
            "n_grid": r.n_grid,
            "tail_window": r.tail_window,
            "warnings": r.warnings,
        },
    })
}

fn ww(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let g = grid(p)?;
    let (d, x) = (&b.dynamics, &b.observable);
    let r = ww_verdict(d, x, p.eps, p.n, &g, p.mode, &verdict_options(p))?;
    let chain = if d.is_homomorphism_kind() {
        p.m_sweep
            .iter()
            .filter(|&&m| m < p.n)
            .map(|&m| ww_bound_chain(d, x, &r.p, p.n, m, &g))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![]
    };
    let mut warnings = r.warnings.clone();
    if let Some(row) = chain.iter().find(|row| !row.holds(1e-9)) {
        warnings.push(format!("bound chain fails at m = {}", row.m));
    }
    let passed = !p.expect_converged || r.all_converged();
    let report = convergence_report(&r, serde_json::to_value(&chain)?);
    Ok(Parts { report, csv: to_csv(&lambda_rows(&r))?, passed, warnings })
}

#[derive(Serialize)]
struct ChainCsvRow {
    n: usize,
    m: usize,
    uniform_sup_sq: f64,
    bound: f64,
    diagonal_term: f64,
    in_range: bool,
    holds: bool,
}

fn theorem6(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let g = grid(p)?;
    let opts = Theorem6Options { require_ergodic: p.require_ergodic, verdict: verdict_options(p), ..Default::default() };
    let t = theorem6_experiment(&b.dynamics, &b.observable, p.eps, p.n, &p.m_sweep, &g, &opts)?;
    let mut warnings = t.warnings.clone();
    if !t.scaling_within_factor_2 {
        warnings.push(format!("(m+1)·bound spread {:.3} exceeds factor 2 across the m sweep", t.scaling_spread));
    }
    let rows: Vec<ChainCsvRow> = t
        .chain
        .iter()
        .map(|c| ChainCsvRow {
            n: c.row.n,
            m: c.row.m,
            uniform_sup_sq: c.row.uniform_sup_sq,
            bound: c.row.bound,
            diagonal_term: c.row.diagonal_term,
            in_range: c.in_range,
            holds: c.holds,
        })
        .collect();
    let passed = t.chain_holds && t.classification != Classification::Neither && t.tail_below_largest_m_bound;
    let mut report = convergence_report(&t.bilateral, serde_json::to_value(&t.chain)?);
    report["theorem6"] = json!({
        "classification": t.classification,
        "kronecker_dim": t.kronecker_dim,
        "x_perp_norm2": t.x_perp_norm2,
        "mean_zero_norm2": t.mean_zero_norm2,
        "chain_holds": t.chain_holds,
        "final_uniform_sup_sq": t.final_uniform_sup_sq,
        "perp_uniform_sup": t.perp_uniform_sup,
        "largest_m": t.largest_m,
        "bound_at_largest_m": t.bound_at_largest_m,
        "tail_below_largest_m_bound": t.tail_below_largest_m_bound,
        "scaling": t.scaling,
        "scaling_spread": t.scaling_spread,
        "scaling_within_factor_2": t.scaling_within_factor_2,
        "one_sided": convergence_report(&t.one_sided, Value::Null),
    });
    Ok(Parts { report, csv: to_csv(&rows)?, passed, warnings })
}

fn weakmix(cfg: &ScenarioConfig, b: &Built) -> Result<Parts> {
    let p = &cfg.params;
    let g = grid(p)?;
    let w = weak_mixing_experiment(&b.dynamics, &b.observable, p.eps, p.n, &g, &verdict_options(p))?;
    let passed = w.verdict.all_converged() && w.dichotomy_holds(p.tol_nontrivial, p.tol_trivial);
    let mut report = convergence_report(&w.verdict, Value::Null);
    report["weak_mixing"] = json!({
        "decay": w.decay,
        "final_sup_nontrivial": w.final_sup_nontrivial,
        "final_trivial_deviation": w.final_trivial_deviation,
        "limit_deviation": w.limit_deviation,
        "tol_nontrivial": p.tol_nontrivial,
        "tol_trivial": p.tol_trivial,
    });
    Ok(Parts { report, csv: to_csv(&w.decay)?, passed, warnings: w.verdict.warnings.clone() })
}
