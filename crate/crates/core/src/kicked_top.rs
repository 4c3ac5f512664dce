//! Quantum kicked top and double kicked top Floquet unitaries, the parity
//! operator exp(-iπJx) and the block-structure rank prediction for
//! parity-symmetric measurement records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, unitary_eigensystem};
use crate::spin::{spin_matrices, Spin};
use crate::types::{CMat, HermitianOp};

/// Twist-and-kick parameters: U = e^{-iφJz²/J}·e^{-iθJx}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KickedTopParams {
    pub spin: f64,
    /// Nonlinear twist angle φ (radians).
    pub phi: f64,
    /// Linear kick angle θ (radians).
    pub theta: f64,
}

impl KickedTopParams {
    /// The globally chaotic working point used throughout: φ=7, θ=0.228 at
    /// J=3.
    pub fn chaotic_j3() -> Self {
        Self {
            spin: 3.0,
            phi: 7.0,
            theta: 0.228,
        }
    }
}

/// Double-top parameters: U = e^{-iφJz²/J}·e^{-iθxJx}·e^{-iφ′Jz²/J}·e^{-iθyJy}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DoubleKickedTopParams {
    pub spin: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub theta_x: f64,
    pub theta_y: f64,
}

impl DoubleKickedTopParams {
    /// The symmetry-free working point: φ=φ′=6, θx=π/2, θy=0.228 at J=3.
    pub fn chaotic_j3() -> Self {
        Self {
            spin: 3.0,
            phi: 6.0,
            phi_prime: 6.0,
            theta_x: std::f64::consts::FRAC_PI_2,
            theta_y: 0.228,
        }
    }
}

/// Jz²/J, the twist generator shared by both tops.
fn twist_generator(spin: Spin) -> HermitianOp {
    let j = spin.value();
    let ms = spin.magnetic_numbers();
    let diag: Vec<f64> = ms.iter().map(|m| m * m / j).collect();
    HermitianOp::from_diagonal(&diag)
}

/// Kicked-top Floquet operator. Products apply right to left: the kick acts
/// first, then the twist.
pub fn qkt_floquet(params: &KickedTopParams) -> Result<CMat> {
    let spin = Spin::new(params.spin)?;
    let (jx, _, _) = spin_matrices(spin);
    let twist = expm_hermitian(&twist_generator(spin), params.phi);
    let kick = expm_hermitian(&jx, params.theta);
    Ok(twist * kick)
}

/// Double kicked top Floquet operator: the four factors of the period, right
/// to left.
pub fn dkt_floquet(params: &DoubleKickedTopParams) -> Result<CMat> {
    let spin = Spin::new(params.spin)?;
    let (jx, jy, _) = spin_matrices(spin);
    let twist_gen = twist_generator(spin);
    let twist = expm_hermitian(&twist_gen, params.phi);
    let twist_prime = expm_hermitian(&twist_gen, params.phi_prime);
    let kick_x = expm_hermitian(&jx, params.theta_x);
    let kick_y = expm_hermitian(&jy, params.theta_y);
    Ok(twist * kick_x * twist_prime * kick_y)
}

/// Parity operator exp(-iπJx): squares to (-1)^{2J}·I.
pub fn parity_operator(spin: Spin) -> CMat {
    let (jx, _, _) = spin_matrices(spin);
    expm_hermitian(&jx, std::f64::consts::PI)
}

/// Dimensions of the two parity eigenspaces, smaller first, computed from
/// the spectrum of [`parity_operator`] by eigenvalue clustering rather than
/// hardcoded.
pub fn parity_block_dims(spin: Spin) -> Result<(usize, usize)> {
    let p = parity_operator(spin);
    let eig = unitary_eigensystem(&p)?;
    // Two clusters at opposite points of the unit circle; split by the sign
    // of the inner product with the first eigenvalue.
    let reference = eig.eigenvalues[0];
    let mut with_reference = 0;
    for lambda in eig.eigenvalues.iter() {
        if (lambda - reference).norm() < 1e-6 {
            with_reference += 1;
        } else if (lambda + reference).norm() >= 1e-6 {
            return Err(Error::InvalidConfig(
                "parity spectrum is not two-valued".into(),
            ));
        }
    }
    let other = spin.dimension() - with_reference;
    Ok((with_reference.min(other), with_reference.max(other)))
}

/// Rank attainable by a parity-symmetric record: d² - d + 1 - 2pq, the full
/// bound minus the two off-diagonal blocks a block-diagonal observable can
/// never reach.
pub fn symmetric_record_rank_prediction(dim: usize, block_dims: (usize, usize)) -> Result<usize> {
    let (p, q) = block_dims;
    if p + q != dim {
        return Err(Error::InvalidBlockDims { p, q, dim });
    }
    Ok(dim * dim - dim + 1 - 2 * p * q)
}
