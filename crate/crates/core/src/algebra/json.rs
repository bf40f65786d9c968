use serde::{Deserialize, Serialize};

use super::{AlgebraCtx, Operator};
use crate::linalg::CMat;
use crate::{Error, C64};

/// Wire format `{ "n": int, "re": [[...]], "im": [[...]] }`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Operator> for OperatorJson {
    fn from(x: &Operator) -> Self {
        let n = x.dim();
        let m = x.matrix();
        OperatorJson {
            n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

impl From<Operator> for OperatorJson {
    fn from(x: Operator) -> Self {
        OperatorJson::from(&x)
    }
}

impl OperatorJson {
    pub fn to_operator(&self, ctx: AlgebraCtx) -> Result<Operator, Error> {
        if self.n != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), found: self.n });
        }
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == self.n && rows.iter().all(|r| r.len() == self.n);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(Error::Config(format!("matrix payload is not {0}x{0}", self.n)));
        }
        let m = CMat::from_fn(self.n, self.n, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        Operator::new(ctx, m)
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self, Error> {
        let ctx = AlgebraCtx::new(j.n)?;
        j.to_operator(ctx)
    }
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        OperatorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = OperatorJson::deserialize(d)?;
        Operator::try_from(j).map_err(serde::de::Error::custom)
    }
}
