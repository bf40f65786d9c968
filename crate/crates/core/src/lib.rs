//! Numerical laboratory for non-commutative Wiener–Wintner type ergodic
//! theorems on finite-dimensional tracial matrix algebras.
//!
//! The algebra is `M_n(ℂ)` (or its diagonal subalgebra) with the normalized
//! trace `τ = Tr/n`. On top of it the crate provides:
//!
//! * [`algebra`]: operators, `L^p` norms, projections and the measure topology.
//! * [`dynamics`]: positive trace-preserving maps, their superoperators and
//!   ergodicity / weak-mixing tests.
//! * [`averages`]: ergodic averages `a_n(x)` and weighted averages
//!   `a_n(x, λ)` over grids of the unit circle.
//! * [`spectral`]: eigenoperators, the Kronecker split, correlation sequences
//!   and atomic spectral measures.
//! * [`vdc`]: the operator Van der Corput inequality and the uniform bound chain.
//! * [`lab`]: projection witnesses and convergence experiments.
//! * [`scenario`]: JSON scenario configs, the bundled scenario library and
//!   report rendering used by the command-line front end.

pub mod algebra;
pub mod averages;
pub mod dynamics;
mod error;
pub mod lab;
pub(crate) mod linalg;
pub mod scenario;
pub mod spectral;
pub mod vdc;

pub use algebra::{AlgebraCtx, Operator, Projection};
pub use dynamics::{Dynamics, DynamicsKind, DynamicsReport, Subalgebra};
pub use averages::{AverageTrajectory, LambdaGrid, WeightedAverager};
pub use spectral::{CorrelationSequence, EigenOperator, KroneckerSplit, SpectralMeasure};
pub use vdc::VdcCertificate;
pub use lab::{ConvergenceReport, Mode, ProjectionWitness, Verdict};
pub use scenario::{Outcome, ScenarioConfig};
pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
