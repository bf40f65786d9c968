use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{DynamicsConfig, ObservableSource, ScenarioConfig};
use crate::algebra::random;
use crate::averages::cis_turns;
use crate::dynamics::Subalgebra;
use crate::spectral::eigen_split;
use crate::{AlgebraCtx, Dynamics, Error, Operator, Result, C64};

/// Seeds actually used for the generators of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Seeds {
    pub root: u64,
    pub dynamics: u64,
    pub observable: u64,
}

impl Seeds {
    pub fn from_root(root: u64) -> Self {
        Seeds { root, dynamics: root, observable: root.wrapping_add(1) }
    }
}

/// The numerical inputs of a scenario.
#[derive(Debug, Clone)]
pub struct Built {
    pub dynamics: Dynamics,
    pub observable: Operator,
    pub seeds: Seeds,
}

fn off_diagonal_defect(x: &Operator) -> f64 {
    let m = x.matrix();
    let n = x.dim();
    let mut s = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s.max(m[(i, j)].norm());
            }
        }
    }
    s
}

fn diagonal_part(x: &Operator) -> Operator {
    let m = x.matrix();
    let d: Vec<C64> = (0..x.dim()).map(|i| m[(i, i)]).collect();
    Operator::diag(x.ctx(), &d).expect("length matches")
}

pub fn build_dynamics(cfg: &ScenarioConfig, seed: u64) -> Result<Dynamics> {
    let ctx = AlgebraCtx::new(cfg.algebra.dim)?;
    let n = ctx.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = match &cfg.dynamics {
        DynamicsConfig::Identity => Dynamics::identity(ctx),
        DynamicsConfig::CyclicShift => Dynamics::cyclic_shift(ctx),
        DynamicsConfig::QubitCyclicShift { qubits } => {
            let d = Dynamics::qubit_cyclic_shift(*qubits)?;
            if d.ctx().dim() != n {
                return Err(Error::Config(format!("{qubits} qubits give dimension {}, algebra.dim is {n}", d.ctx().dim())));
            }
            d
        }
        DynamicsConfig::RandomUnitary => Dynamics::unitary(random::unitary(ctx, &mut rng))?,
        DynamicsConfig::RandomPermutation => Dynamics::permutation(ctx, random::permutation(n, &mut rng))?,
        DynamicsConfig::DiagonalUnitary { angles } => {
            if angles.len() != n {
                return Err(Error::Config(format!("diagonal_unitary needs {n} angles, got {}", angles.len())));
            }
            let entries: Vec<C64> = angles.iter().map(|&t| cis_turns(t)).collect();
            Dynamics::unitary(Operator::diag(ctx, &entries)?)?
        }
        DynamicsConfig::RandomKraus { unitaries, weights } => {
            if *unitaries == 0 {
                return Err(Error::Config("random_kraus needs at least one unitary".into()));
            }
            let w = match weights {
                Some(w) if w.len() != *unitaries => {
                    return Err(Error::Config(format!("{} weights for {unitaries} unitaries", w.len())))
                }
                Some(w) => w.clone(),
                None => vec![1.0 / *unitaries as f64; *unitaries],
            };
            let terms = w.into_iter().map(|wi| (wi, random::unitary(ctx, &mut rng))).collect();
            Dynamics::kraus(ctx, terms)?
        }
        DynamicsConfig::Explicit(spec) => spec.build(ctx)?,
    };
    d.on_subalgebra(cfg.algebra.subalgebra)
}

pub fn build_observable(cfg: &ScenarioConfig, d: &Dynamics, seed: u64) -> Result<Operator> {
    let ctx = d.ctx();
    let n = ctx.dim();
    let diagonal = cfg.algebra.subalgebra == Subalgebra::Diagonal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_index = |i: usize| {
        if i < n {
            Ok(i)
        } else {
            Err(Error::Config(format!("index {i} out of range for dimension {n}")))
        }
    };
    let generated = |x: Operator| if diagonal { diagonal_part(&x) } else { x };
    let x = match &cfg.observable.source {
        ObservableSource::RandomHermitian => generated(random::hermitian(ctx, &mut rng)),
        ObservableSource::TracelessRandom => {
            let h = generated(random::hermitian(ctx, &mut rng));
            &h - &Operator::scalar(ctx, h.trace())
        }
        ObservableSource::RandomGinibre => generated(random::ginibre(ctx, &mut rng)),
        ObservableSource::DiagonalIndicator { indices } => {
            let mut v = vec![0.0; n];
            for &i in indices {
                v[check_index(i)?] = 1.0;
            }
            Operator::diag_real(ctx, &v)?
        }
        ObservableSource::EigenoperatorIndex { index } => {
            let split = eigen_split(d);
            let b = split.basis.get(*index).ok_or_else(|| {
                Error::Config(format!("eigenoperator index {index} out of range ({} available)", split.basis.len()))
            })?;
            b.op.clone()
        }
        ObservableSource::Identity => Operator::identity(ctx),
        ObservableSource::MatrixUnit { i, j } => Operator::unit(ctx, check_index(*i)?, check_index(*j)?),
        ObservableSource::Diagonal { values } => {
            if values.len() != n {
                return Err(Error::Config(format!("diagonal observable needs {n} values, got {}", values.len())));
            }
            Operator::diag_real(ctx, values)?
        }
        ObservableSource::Explicit { matrix } => matrix.to_operator(ctx)?,
    };
    if diagonal && off_diagonal_defect(&x) > ctx.tol() {
        return Err(Error::Config("observable does not lie in the diagonal subalgebra".into()));
    }
    if cfg.observable.normalize {
        let s = x.norm2();
        if s == 0.0 {
            return Err(Error::Config("cannot normalize the zero observable".into()));
        }
        return Ok(&x * (1.0 / s));
    }
    Ok(x)
}

impl ScenarioConfig {
    /// Builds dynamics and observable from the root seed.
    pub fn build(&self) -> Result<Built> {
        self.check()?;
        let seeds = Seeds::from_root(self.seed);
        let dynamics = build_dynamics(self, seeds.dynamics)?;
        let observable = build_observable(self, &dynamics, seeds.observable)?;
        Ok(Built { dynamics, observable, seeds })
    }
}
