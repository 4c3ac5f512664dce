//! The one-parameter operator orbit O_n = (U₀†)ⁿ O U₀ⁿ, its design matrix in
//! an operator basis, the covariance (Gram) matrix, and simulated noisy
//! measurement records.

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;

use crate::basis::OperatorBasis;
use crate::ensembles::SeededRng;
use crate::error::{Error, Result};
use crate::types::{check_unitary, hermitize, CMat, DensityMatrix, HermitianOp, UNITARITY_TOL};

/// The orbit O₀, O₁, …, O_{n_max} of an observable under repeated
/// conjugation by a fixed unitary.
#[derive(Debug, Clone)]
pub struct OperatorOrbit {
    u0: CMat,
    operators: Vec<HermitianOp>,
}

impl OperatorOrbit {
    /// Iterative conjugation O_{n+1} = U₀† O_n U₀ with re-Hermitization each
    /// step to keep round-off drift bounded over long orbits.
    pub fn build(u0: &CMat, o0: &HermitianOp, n_max: usize) -> Result<Self> {
        check_unitary(u0, UNITARITY_TOL)?;
        if u0.nrows() != o0.dim() {
            return Err(Error::DimensionMismatch {
                expected: u0.nrows(),
                actual: o0.dim(),
            });
        }
        let u0_dag = u0.adjoint();
        let mut operators = Vec::with_capacity(n_max + 1);
        operators.push(o0.clone());
        let mut current = o0.matrix().clone();
        for _ in 0..n_max {
            current = hermitize(&(&u0_dag * current * u0));
            operators.push(HermitianOp::new(current.clone()).expect("re-Hermitized"));
        }
        Ok(Self {
            u0: u0.clone(),
            operators,
        })
    }

    pub fn u0(&self) -> &CMat {
        &self.u0
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Number of operators, n_max + 1.
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[HermitianOp] {
        &self.operators
    }

    /// Noiseless expectation values Tr(O_n ρ₀) for every operator.
    pub fn expectations(&self, rho0: &DensityMatrix) -> Result<DVector<f64>> {
        if rho0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho0.dim(),
            });
        }
        Ok(DVector::from_fn(self.len(), |n, _| {
            rho0.expectation(&self.operators[n])
        }))
    }
}

/// Rectangular matrix with rows Õ_{nα} = Tr(O_n E_α): one row per orbit step,
/// one column per basis element.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
    dim: usize,
}

impl DesignMatrix {
    pub fn from_orbit(orbit: &OperatorOrbit, basis: &OperatorBasis) -> Result<Self> {
        if basis.dim() != orbit.dim() {
            return Err(Error::DimensionMismatch {
                expected: orbit.dim(),
                actual: basis.dim(),
            });
        }
        let rows = orbit.len();
        let cols = basis.len();
        let mut entries = DMatrix::zeros(rows, cols);
        for (n, op) in orbit.operators().iter().enumerate() {
            let r = basis.to_coordinates(op.matrix())?;
            entries.row_mut(n).copy_from(&r.values().transpose());
        }
        Ok(Self {
            entries,
            dim: orbit.dim(),
        })
    }

    /// Wraps externally supplied entries (e.g. read back from CSV); the
    /// column count must be d²-1.
    pub fn from_entries(entries: DMatrix<f64>, dim: usize) -> Result<Self> {
        if entries.ncols() != dim * dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                actual: entries.ncols(),
            });
        }
        Ok(Self { entries, dim })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// Hilbert-space dimension d with cols = d²-1.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The design matrix restricted to the first `n` measurements.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.rows() {
            return Err(Error::InvalidConfig(format!(
                "prefix length {n} outside 1..={}",
                self.rows()
            )));
        }
        Ok(Self {
            entries: self.entries.rows(0, n).into_owned(),
            dim: self.dim,
        })
    }

    /// Covariance (Gram) matrix C = ÕᵀÕ: symmetric PSD, rank equal to the
    /// span dimension of the measured operators.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.entries.transpose() * &self.entries
    }
}

/// A simulated stroboscopic record M_n = N·Tr(O_n ρ₀) + σ·w_n.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    values: DVector<f64>,
    ensemble_size: f64,
    noise_sigma: f64,
    seed: u64,
}

impl MeasurementRecord {
    pub fn new(values: DVector<f64>, ensemble_size: f64, noise_sigma: f64, seed: u64) -> Self {
        Self {
            values,
            ensemble_size,
            noise_sigma,
            seed,
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ensemble_size(&self) -> f64 {
        self.ensemble_size
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Record restricted to the first `n` measurements.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            values: self.values.rows(0, n.min(self.len())).into_owned(),
            ensemble_size: self.ensemble_size,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
        }
    }
}

/// Simulates the record for a prepared state over a full orbit. With σ = 0
/// the values are the exact scaled expectation values; the rng is untouched.
pub fn simulate_record(
    rho0: &DensityMatrix,
    orbit: &OperatorOrbit,
    ensemble_size: f64,
    noise_sigma: f64,
    rng: &mut SeededRng,
    seed_label: u64,
) -> Result<MeasurementRecord> {
    let mut values = orbit.expectations(rho0)? * ensemble_size;
    if noise_sigma > 0.0 {
        use rand::Rng;
        for v in values.iter_mut() {
            let w: f64 = rng.sample(StandardNormal);
            *v += noise_sigma * w;
        }
    }
    Ok(MeasurementRecord::new(
        values,
        ensemble_size,
        noise_sigma,
        seed_label,
    ))
}
