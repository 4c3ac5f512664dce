//! Domain types: complex matrices, Hermitian operators, density matrices and
//! their coordinate vectors in a traceless operator basis.
//!
//! Validation happens at construction. An operator that fails its invariant is
//! rejected rather than repaired, so upstream bugs surface where they occur.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<C64>;
/// Dense complex vector.
pub type CVec = DVector<C64>;

/// Max-abs deviation from Hermiticity accepted by [`HermitianOp::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Max-abs residual of `UU† - I` accepted by unitarity checks.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Absolute deviation of the trace from 1 accepted by [`DensityMatrix::new`].
pub const UNIT_TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted by [`DensityMatrix::new`] (clipped to 0).
pub const PSD_EIG_TOL: f64 = 1e-9;

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs entry of `a - b`; both must have the same shape.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-abs deviation of `m` from its own conjugate transpose.
pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Max-abs residual of `m m† - I`.
pub fn unitarity_error(m: &CMat) -> f64 {
    let d = m.nrows();
    max_abs_diff(&(m * m.adjoint()), &CMat::identity(d, d))
}

/// `(m + m†)/2`. Used to control round-off drift after conjugations.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Checks `u` is square and unitary within `tol` (max-abs of `UU† - I`).
pub fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    check_square(u)?;
    let residual = unitarity_error(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    Ok(())
}

/// A validated Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    matrix: CMat,
}

impl HermitianOp {
    /// Validates Hermiticity within [`HERMITICITY_TOL`] (max-abs entry norm).
    pub fn new(matrix: CMat) -> Result<Self> {
        check_square(&matrix)?;
        let deviation = hermiticity_error(&matrix);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(Self { matrix })
    }

    /// Builds from a real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self {
            matrix: CMat::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::ZERO
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Real trace. The imaginary part of a Hermitian trace is round-off.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_inner(&self, other: &HermitianOp) -> f64 {
        trace_product(&self.matrix, &other.matrix).re
    }
}

/// `Tr(a b)` without forming the full product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = C64::ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// up to [`PSD_EIG_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOp,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let op = HermitianOp::new(matrix)?;
        let trace = op.trace();
        if (trace - 1.0).abs() > UNIT_TRACE_TOL {
            return Err(Error::NonUnitTrace {
                trace,
                tol: UNIT_TRACE_TOL,
            });
        }
        let eigenvalues = crate::linalg::eigh(&op).0;
        if eigenvalues[0] < -PSD_EIG_TOL {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: eigenvalues[0],
                tol: PSD_EIG_TOL,
            });
        }
        Ok(Self { op })
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMat::identity(dim, dim).scale(1.0 / dim as f64);
        Self {
            op: HermitianOp { matrix: m },
        }
    }

    /// Outer product of a normalized state vector.
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidConfig("zero state vector".into()));
        }
        let psi = psi.scale(1.0 / norm);
        let m = CMat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj());
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn as_operator(&self) -> &HermitianOp {
        &self.op
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_product(self.matrix(), self.matrix()).re
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, observable: &HermitianOp) -> f64 {
        trace_product(observable.matrix(), self.matrix()).re
    }
}

/// Coordinates of a unit-trace Hermitian matrix in a traceless orthonormal
/// basis, identity part removed: `ρ = Σ_α r_α E_α + I/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateVector {
    dim_d: usize,
    values: DVector<f64>,
}

impl CoordinateVector {
    /// Length must be exactly `d² - 1`.
    pub fn new(dim_d: usize, values: DVector<f64>) -> Result<Self> {
        let expected = dim_d * dim_d - 1;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self { dim_d, values })
    }

    pub fn zeros(dim_d: usize) -> Self {
        Self {
            dim_d,
            values: DVector::zeros(dim_d * dim_d - 1),
        }
    }

    /// Hilbert-space dimension `d` (not the coordinate length).
    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Euclidean norm; equals the traceless Hilbert-Schmidt norm of the
    /// operator the coordinates represent.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}
