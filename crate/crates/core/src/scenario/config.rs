use serde::{Deserialize, Serialize};

use crate::averages::LambdaGridSpec;
use crate::dynamics::{DynamicsSpec, Subalgebra};
use crate::algebra::OperatorJson;
use crate::lab::Mode;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A single scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub algebra: AlgebraSpec,
    /// Root seed; dynamics and observable generators draw from streams
    /// derived from it.
    #[serde(default)]
    pub seed: u64,
    pub dynamics: DynamicsConfig,
    pub observable: ObservableConfig,
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub dim: usize,
    #[serde(default)]
    pub subalgebra: Subalgebra,
}

/// Dynamics generators, or an explicit kind in the dynamics wire format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DynamicsConfig {
    Identity,
    /// `e_j ↦ e_{j+1 mod n}`.
    CyclicShift,
    /// Cyclic shift of tensor factors of `(ℂ²)^{⊗q}`.
    QubitCyclicShift { qubits: u32 },
    RandomUnitary,
    RandomPermutation,
    /// `u = diag(e^{2πi·angles})`.
    DiagonalUnitary { angles: Vec<f64> },
    /// Mixture of Haar unitaries, equal weights unless given.
    RandomKraus {
        unitaries: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    #[serde(untagged)]
    Explicit(DynamicsSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableConfig {
    #[serde(flatten)]
    pub source: ObservableSource,
    /// Rescale to `‖x‖₂ = 1`.
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableSource {
    RandomHermitian,
    /// Hermitian with `τ(x) = 0`.
    TracelessRandom,
    RandomGinibre,
    /// `Σ_{i ∈ indices} e_ii`.
    DiagonalIndicator { indices: Vec<usize> },
    /// Element of the unimodular eigenbasis of the dynamics.
    EigenoperatorIndex { index: usize },
    Identity,
    MatrixUnit { i: usize, j: usize },
    Diagonal { values: Vec<f64> },
    Explicit { matrix: OperatorJson },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Validate,
    Vdc,
    Spectral,
    Witness,
    Ww,
    Theorem6,
    Weakmix,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::Vdc => "vdc",
            Experiment::Spectral => "spectral",
            Experiment::Witness => "witness",
            Experiment::Ww => "ww",
            Experiment::Theorem6 => "theorem6",
            Experiment::Weakmix => "weakmix",
        }
    }
}

/// Expected dynamics properties asserted by `validate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergodic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weakly_mixing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homomorphism: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Horizon `N`.
    #[serde(rename = "N")]
    pub n: usize,
    pub m_sweep: Vec<usize>,
    pub lambda_grid: LambdaGridSpec,
    pub eps: f64,
    /// Witness target; experiment-specific default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub threshold: f64,
    pub mode: Mode,
    /// `ww`: assert every λ converged.
    pub expect_converged: bool,
    /// `theorem6`: refuse non-ergodic dynamics.
    pub require_ergodic: bool,
    /// `validate`: sample count and expected properties.
    pub samples: usize,
    pub expect: Expectations,
    /// `vdc`: random instance suite instead of an orbit window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    pub max_dim: usize,
    pub max_n: usize,
    /// `spectral`: correlation horizon (default `4·dim²`), Toeplitz order and
    /// Wiener averages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub toeplitz_order: usize,
    pub wiener_m: Vec<usize>,
    /// `witness`: rescale `x` to these `‖x‖₁` values, `δ` proportional.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_scales: Option<Vec<f64>>,
    /// `weakmix`: dichotomy tolerances.
    pub tol_nontrivial: f64,
    pub tol_trivial: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: 1000,
            m_sweep: vec![0, 4, 16, 64],
            lambda_grid: LambdaGridSpec::RootsOfUnity(64),
            eps: 0.1,
            delta: None,
            threshold: crate::lab::DEFAULT_TAIL_THRESHOLD,
            mode: Mode::Bilateral,
            expect_converged: true,
            require_ergodic: true,
            samples: 16,
            expect: Expectations::default(),
            instances: None,
            max_dim: 6,
            max_n: 8,
            horizon: None,
            toeplitz_order: 16,
            wiener_m: vec![],
            l1_scales: None,
            tol_nontrivial: 1e-5,
            tol_trivial: 1e-6,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Schema-level checks that need no numerics.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} unsupported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.name.is_empty() {
            return bad("name must be nonempty".into());
        }
        if self.algebra.dim == 0 {
            return bad("algebra.dim must be >= 1".into());
        }
        let p = &self.params;
        if p.n == 0 {
            return bad("params.N must be >= 1".into());
        }
        match &p.lambda_grid {
            LambdaGridSpec::RootsOfUnity(0) => return bad("lambda grid size must be >= 1".into()),
            LambdaGridSpec::Angles(a) if a.is_empty() => return bad("lambda grid size must be >= 1".into()),
            LambdaGridSpec::Angles(a) if a.iter().any(|t| !t.is_finite()) => {
                return bad("lambda angles must be finite".into())
            }
            _ => {}
        }
        if !(p.eps > 0.0 && p.eps < 1.0) {
            return bad(format!("params.eps = {} must lie in (0, 1)", p.eps));
        }
        if p.delta.is_some_and(|d| !(d > 0.0)) {
            return bad("params.delta must be positive".into());
        }
        if !(p.threshold > 0.0) || !(p.tol_nontrivial > 0.0) || !(p.tol_trivial > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.experiment == Experiment::Vdc && p.instances.is_none() {
            if let Some(&m) = p.m_sweep.iter().find(|&&m| m + 1 > p.n) {
                return bad(format!("vdc needs 0 <= m <= N - 1; got m = {m} with N = {}", p.n));
            }
        }
        if self.experiment == Experiment::Theorem6 && p.m_sweep.is_empty() {
            return bad("theorem6 needs a nonempty m_sweep".into());
        }
        if let Some(s) = &p.l1_scales {
            if s.is_empty() || s.iter().any(|g| !(*g > 0.0)) {
                return bad("l1_scales must be nonempty and positive".into());
            }
        }
        Ok(())
    }
}
