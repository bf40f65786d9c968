//! Experiments: equicontinuity witnesses, Wiener–Wintner verdicts, the mean
//! ergodic check, weak mixing and the uniform Wiener–Wintner bound chain.

mod experiments;
mod verdict;
mod witness;

pub use experiments::{
    mean_ergodic_check, mean_ergodic_curve, refine_for_lambda, theorem6_experiment, verdict_stability,
    weak_mixing_experiment, ChainRow, Classification, DecayRow, DeviationRow, MeanErgodicReport, Refinement,
    ScalingRow, StabilityReport, Theorem6Options, Theorem6Report, WeakMixingReport,
};
pub use verdict::{
    geometric_mean_weight, lambda_index, ww_verdict, ConvergenceReport, LambdaVerdict, Mode, Verdict, VerdictOptions,
    DEFAULT_TAIL_THRESHOLD,
};
pub use witness::{find_witness, positive_parts, PartWitness, ProjectionWitness, WitnessMethod};
