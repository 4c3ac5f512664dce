//! Spin-J angular momentum operators in the standard |J,m⟩ basis.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::types::{CMat, HermitianOp};

/// A spin quantum number, stored as 2J so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    /// Accepts J ≥ 1/2 with 2J integral (within 1e-9 of an integer).
    pub fn new(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        let rounded = two_j.round();
        if !(two_j.is_finite() && (two_j - rounded).abs() < 1e-9 && rounded >= 1.0) {
            return Err(Error::InvalidSpin { value: j });
        }
        Ok(Self {
            two_j: rounded as u32,
        })
    }

    pub fn from_doubled(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin { value: 0.0 });
        }
        Ok(Self { two_j })
    }

    /// Spin J for Hilbert-space dimension d = 2J + 1.
    pub fn for_dimension(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpin {
                value: (dim as f64 - 1.0) / 2.0,
            });
        }
        Ok(Self {
            two_j: (dim - 1) as u32,
        })
    }

    pub fn value(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// d = 2J + 1.
    pub fn dimension(self) -> usize {
        self.two_j as usize + 1
    }

    /// Whether J is an integer (relevant for parity: P² = (-1)^{2J} I).
    pub fn is_integer(self) -> bool {
        self.two_j.is_multiple_of(2)
    }

    /// Magnetic quantum numbers m = J, J-1, …, -J in basis order.
    pub fn magnetic_numbers(self) -> DVector<f64> {
        let j = self.value();
        DVector::from_fn(self.dimension(), |i, _| j - i as f64)
    }
}

/// The triple (Jx, Jy, Jz) in the |J,m⟩ basis with m descending from J to -J:
/// Jz is diagonal with entries m, and J± are tridiagonal with the usual
/// ladder coefficients √(J(J+1) - m(m±1)).
pub fn spin_matrices(spin: Spin) -> (HermitianOp, HermitianOp, HermitianOp) {
    let d = spin.dimension();
    let j = spin.value();
    let ms = spin.magnetic_numbers();

    let jz = HermitianOp::from_diagonal(ms.as_slice());

    // Raising: |J,m⟩ → |J,m+1⟩ moves one index up (m descends with index).
    let mut j_plus = CMat::zeros(d, d);
    for col in 1..d {
        let m = ms[col];
        j_plus[(col - 1, col)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let j_minus = j_plus.adjoint();

    let jx = HermitianOp::new((&j_plus + &j_minus).scale(0.5))
        .expect("Jx is Hermitian by construction");
    let jy = HermitianOp::new((&j_plus - &j_minus) * C64::new(0.0, -0.5))
        .expect("Jy is Hermitian by construction");
    (jx, jy, jz)
}

/// Jz for dimension d (spin J = (d-1)/2).
pub fn jz_for_dimension(dim: usize) -> Result<HermitianOp> {
    Ok(spin_matrices(Spin::for_dimension(dim)?).2)
}

/// Jx for dimension d.
pub fn jx_for_dimension(dim: usize) -> Result<HermitianOp> {
    Ok(spin_matrices(Spin::for_dimension(dim)?).0)
}
