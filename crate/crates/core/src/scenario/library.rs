use super::config::*;
use crate::averages::LambdaGridSpec;
use crate::dynamics::Subalgebra;
use crate::lab::Mode;

/// Static metadata of a bundled scenario.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BundledScenario {
    pub name: &'static str,
    /// Section of the underlying theory the scenario exercises.
    pub anchor: &'static str,
    pub expected_runtime: &'static str,
    pub summary: &'static str,
}

pub const BUNDLED: &[BundledScenario] = &[
    BundledScenario {
        name: "classical-q12",
        anchor: "§5 / Thm. 6",
        expected_runtime: "~2 s",
        summary: "12-cycle on the diagonal algebra: WW classification and the uniform bound chain",
    },
    BundledScenario {
        name: "tensorshift-4q",
        anchor: "§5",
        expected_runtime: "~3 s",
        summary: "cyclic shift of 4 qubit factors on M_16 (non-ergodic, reported as a warning)",
    },
    BundledScenario {
        name: "channel-weakmix",
        anchor: "Remark 2",
        expected_runtime: "~10 s",
        summary: "primitive qubit mixed-unitary channel: weak mixing dichotomy on a 1024-point grid",
    },
    BundledScenario {
        name: "channel-validate",
        anchor: "§1 / Remark 2",
        expected_runtime: "<1 s",
        summary: "hypothesis checks for the qubit channel: ergodic, weakly mixing, not multiplicative",
    },
    BundledScenario {
        name: "vdc-fuzz-1000",
        anchor: "Thm. 5 / Cor. 1",
        expected_runtime: "~1 s",
        summary: "operator Van der Corput inequality on 1000 random instances",
    },
    BundledScenario {
        name: "vdc-orbit-rotation",
        anchor: "Thm. 5",
        expected_runtime: "<1 s",
        summary: "Van der Corput gap along an orbit of a random unitary conjugation, all m <= n-1",
    },
    BundledScenario {
        name: "spectral-rotation-8",
        anchor: "§4 / Eq. (4) / Prop. 4",
        expected_runtime: "<1 s",
        summary: "atomic spectral measure of a diagonal rotation on M_8 reproduces the correlations",
    },
    BundledScenario {
        name: "spectral-q12",
        anchor: "§4 / Wiener criterion",
        expected_runtime: "<1 s",
        summary: "q-cycle correlations, Toeplitz positivity and Wiener averages",
    },
    BundledScenario {
        name: "eigenoperator-rotation",
        anchor: "Prop. 3",
        expected_runtime: "<1 s",
        summary: "weighted averages of an eigenoperator under a diagonal unitary",
    },
    BundledScenario {
        name: "ww-q12-bilateral",
        anchor: "Thm. 4",
        expected_runtime: "<1 s",
        summary: "bilateral Wiener-Wintner verdicts on the 12-cycle",
    },
    BundledScenario {
        name: "witness-q12",
        anchor: "Lemma 2.2",
        expected_runtime: "<1 s",
        summary: "projection witnesses for a scaled indicator on the 12-cycle",
    },
];

pub fn list_scenarios() -> &'static [BundledScenario] {
    BUNDLED
}

fn base(name: &str, dim: usize, subalgebra: Subalgebra, dynamics: DynamicsConfig, observable: ObservableSource) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        algebra: AlgebraSpec { dim, subalgebra },
        seed: 0,
        dynamics,
        observable: ObservableConfig { source: observable, normalize: true },
        experiment: Experiment::Validate,
        params: Params::default(),
    }
}

fn q_cycle(name: &str, q: usize, observable: ObservableSource) -> ScenarioConfig {
    base(name, q, Subalgebra::Diagonal, DynamicsConfig::CyclicShift, observable)
}

fn channel(name: &str) -> ScenarioConfig {
    let mut c = base(
        name,
        2,
        Subalgebra::Full,
        DynamicsConfig::RandomKraus { unitaries: 2, weights: None },
        ObservableSource::TracelessRandom,
    );
    c.seed = 2024;
    c
}

/// Config of a bundled scenario.
pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    let c = match name {
        "classical-q12" => {
            let mut c = q_cycle(name, 12, ObservableSource::TracelessRandom);
            c.seed = 12;
            c.experiment = Experiment::Theorem6;
            c.params.n = 600;
            c
        }
        "tensorshift-4q" => {
            let mut c = base(name, 16, Subalgebra::Full, DynamicsConfig::QubitCyclicShift { qubits: 4 }, ObservableSource::TracelessRandom);
            c.seed = 4;
            c.experiment = Experiment::Theorem6;
            c.params.n = 200;
            c.params.require_ergodic = false;
            c
        }
        "channel-weakmix" => {
            let mut c = channel(name);
            c.experiment = Experiment::Weakmix;
            c.params.n = 400_000;
            c.params.lambda_grid = LambdaGridSpec::RootsOfUnity(1024);
            c.params.tol_trivial = 1e-5;
            c
        }
        "channel-validate" => {
            let mut c = channel(name);
            c.params.expect = Expectations { ergodic: Some(true), weakly_mixing: Some(true), homomorphism: Some(false) };
            c
        }
        "vdc-fuzz-1000" => {
            let mut c = base(name, 2, Subalgebra::Full, DynamicsConfig::Identity, ObservableSource::RandomHermitian);
            c.seed = 1;
            c.experiment = Experiment::Vdc;
            c.params.instances = Some(1000);
            c
        }
        "vdc-orbit-rotation" => {
            let mut c = base(name, 4, Subalgebra::Full, DynamicsConfig::RandomUnitary, ObservableSource::RandomGinibre);
            c.seed = 5;
            c.experiment = Experiment::Vdc;
            c.params.n = 8;
            c.params.m_sweep = (0..8).collect();
            c
        }
        "spectral-rotation-8" => {
            let angles = vec![0.0, 0.0, 0.125, 0.3, 0.3, 0.55, 0.71, 0.9];
            let mut c = base(name, 8, Subalgebra::Full, DynamicsConfig::DiagonalUnitary { angles }, ObservableSource::RandomHermitian);
            c.seed = 8;
            c.experiment = Experiment::Spectral;
            c.params.horizon = Some(64);
            c
        }
        "spectral-q12" => {
            let mut c = q_cycle(name, 12, ObservableSource::RandomHermitian);
            c.seed = 13;
            c.experiment = Experiment::Spectral;
            c.params.wiener_m = vec![12, 120, 2400];
            c
        }
        "eigenoperator-rotation" => {
            let angles = vec![0.0, 0.1, 0.25, 0.7];
            let mut c = base(name, 4, Subalgebra::Full, DynamicsConfig::DiagonalUnitary { angles }, ObservableSource::MatrixUnit { i: 2, j: 1 });
            c.experiment = Experiment::Ww;
            c.params.mode = Mode::OneSided;
            c
        }
        "ww-q12-bilateral" => {
            let mut c = q_cycle(name, 12, ObservableSource::RandomHermitian);
            c.seed = 14;
            c.experiment = Experiment::Ww;
            c.params.n = 1200;
            c
        }
        "witness-q12" => {
            let mut c = q_cycle(name, 12, ObservableSource::DiagonalIndicator { indices: vec![0] });
            c.experiment = Experiment::Witness;
            c.params.n = 48;
            c.params.eps = 0.5;
            c.params.l1_scales = Some(vec![0.1, 0.01]);
            c
        }
        _ => return None,
    };
    Some(c)
}
