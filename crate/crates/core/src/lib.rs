//! Quantum state reconstruction from a one-parameter measurement record.
//!
//! A fixed unitary U₀ is applied repeatedly to a single observable O,
//! producing the orbit O_n = (U₀†)ⁿ O U₀ⁿ. Measuring the expectation value of
//! each O_n on an ensemble prepared in ρ₀ yields a time series that can be
//! inverted back to an estimate of ρ₀: a least-squares fit over the measured
//! operator subspace followed by a positivity-constrained refinement. The
//! crate provides
//!
//! - the operator toolbox: spin matrices, the orthonormal traceless operator
//!   basis, coordinate maps and Hermitian matrix functions ([`spin`],
//!   [`basis`], [`linalg`], [`types`]);
//! - seeded random ensembles: Haar unitaries, Ginibre matrices, Fubini-Study,
//!   Hilbert-Schmidt and Bures states ([`ensembles`]);
//! - orbit and record construction with the design and covariance matrices
//!   ([`orbit`]);
//! - span analysis: commutant dimension, saturation conditions on U₀ and the
//!   Vandermonde diagnostic ([`span`]);
//! - reconstruction: pseudo-inverse estimate, projected-gradient positivity
//!   fit, Uhlmann fidelity, pure-state diagonal recovery ([`reconstruct`]);
//! - kicked-top and double-kicked-top Floquet maps with their parity block
//!   analysis ([`kicked_top`]);
//! - reproducible experiment batches with CSV/JSON output ([`experiment`],
//!   [`io`]).
//!
//! Experiment trials run in parallel through rayon when the default
//! `parallel` feature is enabled; `--no-default-features` builds a fully
//! sequential crate with the same results.

pub mod basis;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kicked_top;
pub mod linalg;
pub mod orbit;
pub mod reconstruct;
pub mod span;
pub mod spin;
pub mod types;

pub use error::{Error, Result};
pub use types::{CMat, CVec, CoordinateVector, DensityMatrix, HermitianOp};
