//! Hermitian eigendecompositions, matrix functions and SVD-based rank and
//! pseudo-inverse helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::types::{hermitize, max_abs_diff, CMat, HermitianOp, PSD_EIG_TOL};

/// Relative cutoff used by the numerical rank rule: singular values below
/// `max(rows, cols) * RANK_EPSILON * σ_max` count as zero.
pub const RANK_EPSILON: f64 = 1e-12;

fn sort_ascending<T: nalgebra::ComplexField<RealField = f64>>(
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<T>,
) -> (DVector<f64>, DMatrix<T>) {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: ties keep input order.
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    let values = DVector::from_fn(n, |i, _| eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(eigenvectors.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigendecomposition of a Hermitian operator; eigenvalues real and sorted
/// ascending, eigenvectors as the matching columns.
pub fn eigh(op: &HermitianOp) -> (DVector<f64>, CMat) {
    let se = nalgebra::linalg::SymmetricEigen::new(op.matrix().clone());
    sort_ascending(se.eigenvalues, se.eigenvectors)
}

/// Eigendecomposition of a real symmetric matrix, sorted ascending.
///
/// The input is symmetrized first; asymmetry beyond round-off is a caller bug.
pub fn eigh_real(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()).scale(0.5);
    let se = nalgebra::linalg::SymmetricEigen::new(sym);
    sort_ascending(se.eigenvalues, se.eigenvectors)
}

/// `exp(-i·scale·H)` for Hermitian `H`, via eigendecomposition. Unitary.
pub fn expm_hermitian(h: &HermitianOp, scale: f64) -> CMat {
    let (values, vectors) = eigh(h);
    let d = h.dim();
    let phases = DVector::from_fn(d, |i, _| C64::from_polar(1.0, -scale * values[i]));
    scaled_columns(&vectors, &phases) * vectors.adjoint()
}

/// `m · diag(w)` without forming the diagonal matrix.
fn scaled_columns(m: &CMat, w: &DVector<C64>) -> CMat {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        for x in col.iter_mut() {
            *x *= w[j];
        }
    }
    out
}

/// PSD square root via eigendecomposition. Eigenvalues in `[-1e-9, 0)` are
/// clipped to zero; anything more negative is rejected.
pub fn sqrtm_psd(a: &HermitianOp) -> Result<HermitianOp> {
    let (values, vectors) = eigh(a);
    if values[0] < -PSD_EIG_TOL {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: values[0],
            tol: PSD_EIG_TOL,
        });
    }
    let d = a.dim();
    let roots = DVector::from_fn(d, |i, _| C64::new(values[i].max(0.0).sqrt(), 0.0));
    let m = scaled_columns(&vectors, &roots) * vectors.adjoint();
    HermitianOp::new(hermitize(&m))
}

/// Spectral decomposition of a unitary matrix.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// Eigenphases `φ_j` with `U v_j = e^{-iφ_j} v_j`, in `[-π, π)`, sorted
    /// ascending.
    pub phases: DVector<f64>,
    /// Unit-circle eigenvalues `e^{-iφ_j}` in the same order.
    pub eigenvalues: DVector<C64>,
    /// Orthonormal eigenvectors as columns, matching `phases`.
    pub vectors: CMat,
}

/// Maximum residual `|U V - V Λ|` tolerated by [`unitary_eigensystem`].
const UNITARY_EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Eigendecomposition of a unitary matrix.
///
/// A unitary is normal, so its Hermitian part `H = (U + U†)/2` and
/// anti-Hermitian part `K = (U - U†)/2i` commute and share eigenspaces with
/// `U`. `H` is diagonalized first; inside each (near-)degenerate cluster of
/// `H`, `K` is diagonalized to split eigenvalues that share a real part
/// (conjugate phase pairs). Genuine degeneracies of `U` survive as repeated
/// phases with an arbitrary orthonormal basis of the eigenspace.
pub fn unitary_eigensystem(u: &CMat) -> Result<UnitaryEigen> {
    crate::types::check_unitary(u, crate::types::UNITARITY_TOL)?;
    let d = u.nrows();
    let h = HermitianOp::new(hermitize(u))?;
    let k_mat = (u - u.adjoint()).scale(0.5) * C64::new(0.0, -1.0);
    let k = HermitianOp::new(hermitize(&k_mat))?;

    let (h_values, mut vectors) = eigh(&h);

    // Single-linkage clusters of H eigenvalues. Eigenvalues of H lie in
    // [-1, 1], so an absolute linkage is adequate.
    let cluster_tol = 1e-9;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && h_values[end] - h_values[end - 1] < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let projected = block.adjoint() * k.matrix() * &block;
            let kb = HermitianOp::new(hermitize(&projected))?;
            let (_, w) = eigh(&kb);
            let rotated = block * w;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    // Rayleigh quotients pin the eigenvalue for each refined vector.
    let mut eigenvalues = DVector::from_element(d, C64::ZERO);
    let mut phases = DVector::zeros(d);
    for j in 0..d {
        let v = vectors.column(j);
        let lambda = (v.adjoint() * u * v)[(0, 0)];
        let lambda = lambda / lambda.norm();
        eigenvalues[j] = lambda;
        phases[j] = -lambda.arg();
    }

    // Order by eigenphase.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| phases[a].partial_cmp(&phases[b]).unwrap());
    let phases = DVector::from_fn(d, |i, _| phases[order[i]]);
    let eigenvalues = DVector::from_fn(d, |i, _| eigenvalues[order[i]]);
    let mut sorted_vectors = CMat::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }

    let residual = max_abs_diff(
        &(u * &sorted_vectors),
        &scaled_columns(&sorted_vectors, &eigenvalues),
    );
    if residual > UNITARY_EIGEN_RESIDUAL_TOL {
        return Err(Error::UnstableEigendecomposition {
            residual,
            tol: UNITARY_EIGEN_RESIDUAL_TOL,
        });
    }

    Ok(UnitaryEigen {
        phases,
        eigenvalues,
        vectors: sorted_vectors,
    })
}

/// Thin SVD of a real matrix with the rank rule applied, reusable as a
/// Moore-Penrose pseudo-inverse.
#[derive(Debug, Clone)]
pub struct Pinv {
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    singular_values: DVector<f64>,
    rank: usize,
    threshold: f64,
}

impl Pinv {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let svd = m.clone().svd(true, true);
        let singular_values = svd.singular_values;
        let sigma_max = singular_values.iter().cloned().fold(0.0, f64::max);
        let threshold = m.nrows().max(m.ncols()) as f64 * RANK_EPSILON * sigma_max;
        let rank = singular_values.iter().filter(|&&s| s > threshold).count();
        Self {
            u: svd.u.expect("svd requested u"),
            v_t: svd.v_t.expect("svd requested v_t"),
            singular_values,
            rank,
            threshold,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `pinv(M) · rhs`, inverting only over the retained singular directions.
    pub fn apply(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let projected = self.u.columns(0, self.rank).transpose() * rhs;
        let mut scaled = projected;
        for i in 0..self.rank {
            scaled[i] /= self.singular_values[i];
        }
        self.v_t.rows(0, self.rank).transpose() * scaled
    }

    /// Orthogonal projector onto the row space (the support of `MᵀM`).
    pub fn row_space_projector(&self) -> DMatrix<f64> {
        let v_r = self.v_t.rows(0, self.rank).transpose().into_owned();
        &v_r * v_r.transpose()
    }
}

/// Numerical rank of a real matrix under the shared rank rule.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = m.nrows().max(m.ncols()) as f64 * RANK_EPSILON * sigma_max;
    svd.singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}
