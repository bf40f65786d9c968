//! Scenario configs, the bundled scenario library and the experiment runner.
//!
//! A scenario is one JSON document naming an algebra, dynamics, observable
//! and experiment. [`run`] produces a JSON report, a CSV table and run
//! metadata; writing them to disk is left to the caller.

mod build;
mod config;
mod library;
mod run;

pub use build::{build_dynamics, build_observable, Built, Seeds};
pub use config::{
    AlgebraSpec, DynamicsConfig, Expectations, Experiment, ObservableConfig, ObservableSource, Params, ScenarioConfig,
    SCHEMA_VERSION,
};
pub use library::{bundled, list_scenarios, BundledScenario, BUNDLED};
pub use run::{
    exit_code_for, run, Outcome, EXIT_FAILED, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK, EXIT_SCHEMA,
    RECONSTRUCTION_TOL, SPLIT_TOL, TOEPLITZ_TOL, VDC_NORM_TOL,
};
