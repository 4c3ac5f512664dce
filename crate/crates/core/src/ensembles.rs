//! Seeded sampling of Ginibre matrices, Haar-random unitaries and random
//! pure/mixed states.
//!
//! All samplers take an explicit generator handle and are deterministic
//! functions of (dimension, seed, call order). The generator is ChaCha12: a
//! counter-based stream cipher with identical output on every platform, so a
//! stored seed reproduces a sample exactly.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::types::{hermitize, CMat, CVec, DensityMatrix};

/// The crate-wide deterministic generator.
pub type SeededRng = ChaCha12Rng;

/// Generator for one trial: `seed = base_seed + trial_index`, so trials can
/// run in any order or in parallel without sharing a stream.
pub fn trial_rng(base_seed: u64, trial_index: u64) -> SeededRng {
    SeededRng::seed_from_u64(base_seed.wrapping_add(trial_index))
}

fn complex_normal(rng: &mut SeededRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// d×d matrix of i.i.d. complex Gaussians (real and imaginary parts each
/// standard normal). Entries are drawn in row-major order.
pub fn ginibre(dim: usize, rng: &mut SeededRng) -> CMat {
    let entries: Vec<C64> = (0..dim * dim).map(|_| complex_normal(rng)).collect();
    CMat::from_row_slice(dim, dim, &entries)
}

/// Haar-distributed unitary via QR of a Ginibre sample with the R-diagonal
/// phase correction (each column of Q multiplied by R_jj/|R_jj|). Without the
/// correction plain QR is biased toward the QR convention's phase choice.
pub fn haar_unitary(dim: usize, rng: &mut SeededRng) -> CMat {
    let g = ginibre(dim, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::ONE
        };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Rank-1 state from the Fubini-Study measure: a normalized vector of i.i.d.
/// complex Gaussians.
pub fn random_pure_fubini_study(dim: usize, rng: &mut SeededRng) -> DensityMatrix {
    let psi: CVec = DVector::from_fn(dim, |_, _| complex_normal(rng));
    DensityMatrix::from_pure(&psi).expect("Gaussian vector is nonzero almost surely")
}

/// Hilbert-Schmidt-distributed mixed state: GG†/Tr(GG†).
pub fn random_mixed_hs(dim: usize, rng: &mut SeededRng) -> DensityMatrix {
    let g = ginibre(dim, rng);
    let m = hermitize(&(&g * g.adjoint()));
    let trace = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / trace)).expect("Wishart matrix is PSD")
}

/// Bures-distributed mixed state: (I+U) GG† (I+U†) normalized, with U Haar.
/// Only the final result is normalized; the intermediate product may be
/// near-singular.
pub fn random_mixed_bures(dim: usize, rng: &mut SeededRng) -> DensityMatrix {
    let g = ginibre(dim, rng);
    let u = haar_unitary(dim, rng);
    let one_plus_u = CMat::identity(dim, dim) + u;
    let m = hermitize(&(&one_plus_u * (&g * g.adjoint()) * one_plus_u.adjoint()));
    let trace = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / trace)).expect("Bures construction is PSD")
}
