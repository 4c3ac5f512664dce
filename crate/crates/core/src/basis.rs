//! Orthonormal traceless Hermitian operator basis (generalized Gell-Mann) and
//! the coordinate maps `ρ ↔ r` with `ρ = Σ_α r_α E_α + I/d`.
//!
//! Element order is fixed so serialized coordinates are reproducible:
//! symmetric pairs (j<k) row-major, then antisymmetric pairs in the same
//! order, then the d-1 diagonal elements.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::types::{CMat, CoordinateVector, HermitianOp};

/// The d²-1 generalized Gell-Mann operators for one Hilbert-space dimension,
/// orthonormal under the trace inner product: Tr(E_α E_β) = δ_αβ.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<HermitianOp>,
    /// Index pairs (j, k) with j < k shared by the symmetric and
    /// antisymmetric families, in element order.
    pairs: Vec<(usize, usize)>,
}

impl OperatorBasis {
    pub fn gell_mann(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "operator basis requires d >= 2, got {dim}"
            )));
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(dim * dim - 1);
        let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);

        // Symmetric: (|j⟩⟨k| + |k⟩⟨j|)/√2.
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut m = CMat::zeros(dim, dim);
                m[(j, k)] = C64::new(inv_sqrt2, 0.0);
                m[(k, j)] = C64::new(inv_sqrt2, 0.0);
                elements.push(HermitianOp::new(m).expect("symmetric element"));
                pairs.push((j, k));
            }
        }
        // Antisymmetric: -i(|j⟩⟨k| - |k⟩⟨j|)/√2.
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut m = CMat::zeros(dim, dim);
                m[(j, k)] = C64::new(0.0, -inv_sqrt2);
                m[(k, j)] = C64::new(0.0, inv_sqrt2);
                elements.push(HermitianOp::new(m).expect("antisymmetric element"));
            }
        }
        // Diagonal: √(1/(l(l+1))) (Σ_{m<l} |m⟩⟨m| - l|l⟩⟨l|).
        for l in 1..dim {
            let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut diag = vec![0.0; dim];
            for entry in diag.iter_mut().take(l) {
                *entry = scale;
            }
            diag[l] = -(l as f64) * scale;
            elements.push(HermitianOp::from_diagonal(&diag));
        }

        Ok(Self {
            dim,
            elements,
            pairs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOp] {
        &self.elements
    }

    /// Coordinates r_α = Tr(m E_α) of a Hermitian matrix. The identity
    /// component Tr(m)/d is simply not represented.
    ///
    /// Exploits the known sparsity of the basis elements instead of forming
    /// each trace product; the literal definition is kept as a test oracle.
    pub fn to_coordinates(&self, m: &CMat) -> Result<CoordinateVector> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: m.nrows(),
            });
        }
        let d = self.dim;
        let n_pairs = self.pairs.len();
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut values = DVector::zeros(d * d - 1);
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            // Tr(m·sym_jk) = √2·Re m_jk, Tr(m·asym_jk) = -√2·Im m_jk
            // for Hermitian m.
            values[p] = sqrt2 * m[(j, k)].re;
            values[n_pairs + p] = -sqrt2 * m[(j, k)].im;
        }
        for l in 1..d {
            let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut acc = 0.0;
            for j in 0..l {
                acc += m[(j, j)].re;
            }
            values[2 * n_pairs + l - 1] = scale * (acc - l as f64 * m[(l, l)].re);
        }
        CoordinateVector::new(self.dim, values)
    }

    /// `Σ_α r_α E_α + I/d`: always Hermitian with unit trace, not
    /// necessarily positive.
    pub fn from_coordinates(&self, r: &CoordinateVector) -> Result<HermitianOp> {
        if r.len() != self.elements.len() {
            return Err(Error::DimensionMismatch {
                expected: self.elements.len(),
                actual: r.len(),
            });
        }
        let d = self.dim;
        let n_pairs = self.pairs.len();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v = r.values();
        let mut m = CMat::zeros(d, d);
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            let entry = C64::new(v[p] * inv_sqrt2, -v[n_pairs + p] * inv_sqrt2);
            m[(j, k)] = entry;
            m[(k, j)] = entry.conj();
        }
        let mut diag = vec![1.0 / d as f64; d];
        for l in 1..d {
            let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let weight = v[2 * n_pairs + l - 1];
            for entry in diag.iter_mut().take(l) {
                *entry += scale * weight;
            }
            diag[l] -= scale * weight * l as f64;
        }
        for (j, value) in diag.into_iter().enumerate() {
            m[(j, j)] = C64::new(value, 0.0);
        }
        HermitianOp::new(m)
    }
}
