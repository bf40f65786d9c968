//! Dense complex helpers shared by the algebra and spectral layers.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub(crate) type CMat = DMatrix<C64>;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so tiny anti-Hermitian noise never leaks
/// into the decomposition.
pub(crate) fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub(crate) fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm.
pub(crate) fn op_norm(m: &CMat) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, _) | (_, 1) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        _ => singular_values(m).first().copied().unwrap_or(0.0),
    }
}

/// Orthonormal basis (as columns) of the right null space of a square matrix:
/// right-singular vectors whose singular value is at most `threshold`.
pub(crate) fn null_space(m: &CMat, threshold: f64) -> CMat {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut cols: Vec<DVector<C64>> = Vec::new();
    // nalgebra returns min(rows, cols) singular triples; square inputs only.
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            cols.push(v_t.row(i).adjoint());
        }
    }
    let mut out = CMat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Eigenvalues of a general complex square matrix.
///
/// Backed by faer: nalgebra's complex Schur iteration stalls on permutation
/// matrices, which are a core scenario here.
pub(crate) fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let fm = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    fm.eigenvalues()
        .expect("eigenvalue iteration failed to converge")
        .into_iter()
        .map(|z| C64::new(z.re, z.im))
        .collect()
}

/// Rotates `v` so its first non-negligible component is real and positive.
pub(crate) fn normalize_phase(v: &mut DVector<C64>) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-9 * scale).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|c| *c *= phase);
    }
}

/// Largest entrywise modulus.
pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Neumaier-compensated running sum of complex matrices, componentwise.
#[derive(Debug, Clone)]
pub(crate) struct CompensatedSum {
    sum: Vec<C64>,
    comp: Vec<C64>,
    rows: usize,
    cols: usize,
}

fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            sum: vec![C64::new(0.0, 0.0); rows * cols],
            comp: vec![C64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
        }
    }

    /// Adds `w · m`.
    pub(crate) fn add_scaled(&mut self, m: &CMat, w: C64) {
        for (idx, z) in m.iter().enumerate() {
            let v = *z * w;
            let (s, c) = (&mut self.sum[idx], &mut self.comp[idx]);
            neumaier(&mut s.re, &mut c.re, v.re);
            neumaier(&mut s.im, &mut c.im, v.im);
        }
    }

    pub(crate) fn value(&self) -> CMat {
        // column-major, matching nalgebra's iteration order
        CMat::from_iterator(
            self.rows,
            self.cols,
            self.sum.iter().zip(&self.comp).map(|(s, c)| s + c),
        )
    }
}
