use serde::{Deserialize, Serialize};

use super::{Dynamics, DynamicsKind, Subalgebra};
use crate::algebra::{AlgebraCtx, OperatorJson};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausTermSpec {
    pub weight: f64,
    pub unitary: OperatorJson,
}

/// Tagged-union wire format for [`DynamicsKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DynamicsSpec {
    UnitaryConjugation { u: OperatorJson },
    PermutationConjugation { perm: Vec<usize> },
    KrausChannel { terms: Vec<KrausTermSpec> },
    Composition { parts: Vec<DynamicsSpec> },
    Power { base: Box<DynamicsSpec>, k: u32 },
}

/// Self-contained dynamics document: dimension, scenario algebra and kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsJson {
    pub dim: usize,
    #[serde(default)]
    pub subalgebra: Subalgebra,
    #[serde(flatten)]
    pub spec: DynamicsSpec,
}

impl DynamicsSpec {
    pub fn build(&self, ctx: AlgebraCtx) -> Result<Dynamics> {
        match self {
            DynamicsSpec::UnitaryConjugation { u } => Dynamics::unitary(u.to_operator(ctx)?),
            DynamicsSpec::PermutationConjugation { perm } => Dynamics::permutation(ctx, perm.clone()),
            DynamicsSpec::KrausChannel { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((t.weight, t.unitary.to_operator(ctx)?)))
                    .collect::<Result<Vec<_>>>()?;
                Dynamics::kraus(ctx, terms)
            }
            DynamicsSpec::Composition { parts } => {
                let parts = parts.iter().map(|p| p.build(ctx)).collect::<Result<Vec<_>>>()?;
                Dynamics::compose(ctx, parts)
            }
            DynamicsSpec::Power { base, k } => Ok(Dynamics::power(base.build(ctx)?, *k)),
        }
    }
}

impl From<&Dynamics> for DynamicsSpec {
    fn from(d: &Dynamics) -> Self {
        match &d.kind {
            DynamicsKind::UnitaryConjugation(u) => DynamicsSpec::UnitaryConjugation { u: u.into() },
            DynamicsKind::PermutationConjugation(p) => DynamicsSpec::PermutationConjugation { perm: p.clone() },
            DynamicsKind::KrausChannel(terms) => DynamicsSpec::KrausChannel {
                terms: terms.iter().map(|(w, u)| KrausTermSpec { weight: *w, unitary: u.into() }).collect(),
            },
            DynamicsKind::Composition(parts) => DynamicsSpec::Composition { parts: parts.iter().map(Into::into).collect() },
            DynamicsKind::Power(base, k) => DynamicsSpec::Power { base: Box::new(base.as_ref().into()), k: *k },
        }
    }
}

impl DynamicsJson {
    pub fn build(&self) -> Result<Dynamics> {
        let ctx = AlgebraCtx::new(self.dim)?;
        self.spec.build(ctx)?.on_subalgebra(self.subalgebra)
    }
}

impl From<&Dynamics> for DynamicsJson {
    fn from(d: &Dynamics) -> Self {
        DynamicsJson { dim: d.ctx.dim(), subalgebra: d.algebra, spec: d.into() }
    }
}

impl Serialize for Dynamics {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DynamicsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dynamics {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DynamicsJson::deserialize(d)?.build().map_err(|e: Error| serde::de::Error::custom(e))
    }
}
