use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// A finite set of points `λ = e^{2πi·angle}` on the unit circle.
///
/// Equally spaced grids (`q`-th roots of unity) keep their order so weighted
/// sums over the whole grid can be batched through an FFT, and so powers
/// `λ^k` are looked up exactly instead of accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    angles: Vec<f64>,
    order: Option<usize>,
    roots: Vec<C64>,
}

/// Wire format: `{"roots_of_unity": q}` or `{"angles": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGridSpec {
    RootsOfUnity(usize),
    Angles(Vec<f64>),
}

/// `e^{2πi·t}`.
pub fn cis_turns(t: f64) -> C64 {
    let (s, c) = (TAU * t).sin_cos();
    C64::new(c, s)
}

/// `frac(angle · k)` with the product's rounding error carried along.
fn frac_product(angle: f64, k: usize) -> f64 {
    let kf = k as f64;
    let p = angle * kf;
    let err = angle.mul_add(kf, -p);
    (p - p.floor() + err).rem_euclid(1.0)
}

/// `λ^k` for `λ = e^{2πi·angle}`, accurate for large `k`.
pub fn unit_power(angle: f64, k: usize) -> C64 {
    cis_turns(frac_product(angle, k))
}

impl LambdaGrid {
    /// The `q` points `e^{2πij/q}`, `j = 0..q`.
    pub fn roots_of_unity(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("lambda grid must be nonempty".into()));
        }
        let roots = (0..q).map(|j| cis_turns(j as f64 / q as f64)).collect();
        Ok(Self { angles: (0..q).map(|j| j as f64 / q as f64).collect(), order: Some(q), roots })
    }

    /// Arbitrary angles, reduced mod 1.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidParameter("lambda grid must be nonempty".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("lambda angles must be finite".into()));
        }
        let angles: Vec<f64> = angles.into_iter().map(|a| a.rem_euclid(1.0)).collect();
        Ok(Self { angles, order: None, roots: Vec::new() })
    }

    /// Points given as complex numbers; each must satisfy `|λ| = 1` within `tol`.
    pub fn from_points(points: &[C64], tol: f64) -> Result<Self> {
        for z in points {
            if (z.norm() - 1.0).abs() > tol {
                return Err(Error::InvalidParameter(format!("|λ| = {} is not 1", z.norm())));
            }
        }
        Self::from_angles(points.iter().map(|z| z.arg() / TAU).collect())
    }

    pub fn from_spec(spec: &LambdaGridSpec) -> Result<Self> {
        match spec {
            LambdaGridSpec::RootsOfUnity(q) => Self::roots_of_unity(*q),
            LambdaGridSpec::Angles(a) => Self::from_angles(a.clone()),
        }
    }

    pub fn spec(&self) -> LambdaGridSpec {
        match self.order {
            Some(q) => LambdaGridSpec::RootsOfUnity(q),
            None => LambdaGridSpec::Angles(self.angles.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `Some(q)` for the full grid of `q`-th roots of unity.
    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn point(&self, i: usize) -> C64 {
        self.power(i, 1)
    }

    /// `λ_i^k`.
    pub fn power(&self, i: usize, k: usize) -> C64 {
        match self.order {
            Some(q) => self.roots[(i * (k % q)) % q],
            None => unit_power(self.angles[i], k),
        }
    }

    /// Largest distance (in turns) from any point of the circle to the grid.
    pub fn covering_radius(&self) -> f64 {
        let mut a = self.angles.clone();
        a.sort_by(f64::total_cmp);
        a.dedup();
        let mut gap = 1.0 - a[a.len() - 1] + a[0];
        for w in a.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap / 2.0
    }
}
