//! State estimation from a measurement record: pseudo-inverse least-squares
//! fit, positivity-constrained refinement under the covariance seminorm,
//! Uhlmann fidelity, and the closed-form diagonal recovery for pure states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigh_real, sqrtm_psd, Pinv};
use crate::orbit::{DesignMatrix, MeasurementRecord};
use crate::types::{hermitize, CMat, CoordinateVector, DensityMatrix, PSD_EIG_TOL};

/// Least-squares estimate of the state coordinates.
#[derive(Debug, Clone)]
pub struct MlEstimate {
    r_ml: CoordinateVector,
    covariance_rank: usize,
    used_pseudo_inverse: bool,
}

impl MlEstimate {
    /// Wraps externally produced coordinates (synthetic inputs, file-based
    /// records) so they can enter [`positivity_fit`].
    pub fn from_parts(
        r_ml: CoordinateVector,
        covariance_rank: usize,
        used_pseudo_inverse: bool,
    ) -> Self {
        Self {
            r_ml,
            covariance_rank,
            used_pseudo_inverse,
        }
    }

    pub fn coordinates(&self) -> &CoordinateVector {
        &self.r_ml
    }

    /// Rank of C = ÕᵀÕ under the shared rank rule.
    pub fn covariance_rank(&self) -> usize {
        self.covariance_rank
    }

    /// True when the record was incomplete and the Moore-Penrose
    /// pseudo-inverse replaced the plain inverse.
    pub fn used_pseudo_inverse(&self) -> bool {
        self.used_pseudo_inverse
    }
}

/// `r^ML = (1/N) (ÕᵀÕ)⁻¹ Õᵀ M`, with the pseudo-inverse when the covariance
/// is rank deficient. Components of the estimate in the null space of the
/// covariance come out exactly zero. Rank deficiency is reported, not an
/// error. The ensemble size N is taken from the record.
pub fn ml_estimate(design: &DesignMatrix, record: &MeasurementRecord) -> Result<MlEstimate> {
    if record.len() != design.rows() {
        return Err(Error::RecordLengthMismatch {
            record: record.len(),
            rows: design.rows(),
        });
    }
    let pinv = Pinv::new(design.entries());
    let rank = pinv.rank();
    let r = pinv.apply(record.values()).scale(1.0 / record.ensemble_size());
    Ok(MlEstimate {
        r_ml: CoordinateVector::new(design.dim(), r)?,
        covariance_rank: rank,
        used_pseudo_inverse: rank < design.cols(),
    })
}

/// Stopping controls for [`positivity_fit`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative cost decrease over one sweep below which the fit stops.
    pub rel_tol: f64,
    /// Iterations between convergence checks.
    pub sweep: usize,
    /// Iteration budget for the interior tiebreak among seminorm minimizers
    /// (0 disables it).
    pub tiebreak_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            rel_tol: 1e-10,
            sweep: 64,
            tiebreak_iterations: 2_000,
        }
    }
}

/// A positivity-constrained fit outcome.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub rho_bar: DensityMatrix,
    /// Final seminorm² value (r^ML - r̄)ᵀ C (r^ML - r̄).
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    /// JSON-friendly view; `fidelity` is supplied when the truth is known.
    pub fn summary(&self, fidelity: Option<f64>) -> FitSummary {
        FitSummary {
            cost: self.cost,
            iterations: self.iterations,
            converged: self.converged,
            fidelity,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

/// Euclidean projection of a real vector onto the probability simplex.
fn project_simplex(values: &DVector<f64>) -> DVector<f64> {
    let n = values.len();
    let mut sorted: Vec<f64> = values.iter().cloned().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        acc += v;
        let candidate = (acc - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            tau = candidate;
        }
    }
    DVector::from_fn(n, |i, _| (values[i] - tau).max(0.0))
}

/// Nearest state in coordinate space: eigendecompose, project the eigenvalue
/// vector onto the simplex, rebuild.
fn project_to_states(r: &DVector<f64>, basis: &OperatorBasis) -> DVector<f64> {
    let op = basis
        .from_coordinates(&CoordinateVector::new(basis.dim(), r.clone()).expect("length checked"))
        .expect("from_coordinates is total on correct lengths");
    let (values, vectors) = eigh(&op);
    let projected = project_simplex(&values);
    let d = basis.dim();
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        if projected[j] != 0.0 {
            let col = vectors.column(j);
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] += col[a] * col[b].conj() * projected[j];
                }
            }
        }
    }
    basis
        .to_coordinates(&hermitize(&m))
        .expect("dimensions match")
        .values()
        .clone()
}

/// Eigenvalue clip-and-renormalize of ρ^ML: the crude feasible baseline the
/// solver must never lose to.
fn clip_and_renormalize(r_ml: &DVector<f64>, basis: &OperatorBasis) -> DVector<f64> {
    let op = basis
        .from_coordinates(&CoordinateVector::new(basis.dim(), r_ml.clone()).expect("length"))
        .expect("length");
    let (values, vectors) = eigh(&op);
    let clipped = DVector::from_fn(values.len(), |i, _| values[i].max(0.0));
    let total: f64 = clipped.sum();
    let normalized = if total > 0.0 {
        clipped.scale(1.0 / total)
    } else {
        DVector::from_element(values.len(), 1.0 / values.len() as f64)
    };
    let d = basis.dim();
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        let col = vectors.column(j);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] += col[a] * col[b].conj() * normalized[j];
            }
        }
    }
    basis
        .to_coordinates(&hermitize(&m))
        .expect("dimensions match")
        .values()
        .clone()
}

/// Minimizes (r - r^ML)ᵀ C (r - r^ML) over density-matrix coordinates by
/// accelerated projected gradient descent: fixed step 1/λ_max(C) on the
/// direction C(y - r^ML) (half the gradient, i.e. the classical 1/L step for
/// this quadratic), Nesterov momentum with restart on cost increase, and
/// eigenvalue simplex projection back onto the PSD unit-trace set after every
/// step. The returned iterate is the best one visited, so the cost can never
/// exceed the eigenvalue clip-and-renormalize baseline it starts from.
///
/// The seminorm can have many minimizers; the contract is on cost and
/// feasibility, not on the coordinates themselves. If ρ^ML is already a
/// state it is returned unchanged with cost 0.
pub fn positivity_fit(
    ml: &MlEstimate,
    covariance: &DMatrix<f64>,
    basis: &OperatorBasis,
    options: &FitOptions,
) -> Result<FitResult> {
    let n = basis.len();
    if ml.coordinates().len() != n || covariance.nrows() != n || covariance.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: ml.coordinates().len().min(covariance.nrows()),
        });
    }
    let r_ml = ml.coordinates().values().clone();

    // Already physical: nothing to optimize.
    let assembled = basis.from_coordinates(ml.coordinates())?;
    let (eigenvalues, _) = eigh(&assembled);
    if eigenvalues[0] >= -PSD_EIG_TOL {
        return Ok(FitResult {
            rho_bar: DensityMatrix::new(assembled.into_matrix())?,
            cost: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let (c_values, c_vectors) = eigh_real(covariance);
    let lambda_max = c_values[c_values.len() - 1].max(0.0);
    let cost_of = |x: &DVector<f64>| -> f64 {
        let delta = x - &r_ml;
        (covariance * &delta).dot(&delta)
    };

    // Start from the better of the two cheap feasible candidates.
    let projected_start = project_to_states(&r_ml, basis);
    let baseline = clip_and_renormalize(&r_ml, basis);
    let baseline_cost = cost_of(&baseline);
    let mut x = if cost_of(&projected_start) <= baseline_cost {
        projected_start
    } else {
        baseline.clone()
    };

    if lambda_max <= 0.0 {
        // C = 0: every state is a minimizer.
        let rho = basis.from_coordinates(&CoordinateVector::new(basis.dim(), x)?)?;
        return Ok(FitResult {
            rho_bar: DensityMatrix::new(rho.into_matrix())?,
            cost: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let step = 1.0 / lambda_max;
    let cost_floor = 1e-24 * lambda_max * (1.0 + r_ml.norm_squared());
    let mut cost = cost_of(&x);
    let mut best_cost = cost;
    let mut best = x.clone();
    let mut previous = x.clone();
    let mut momentum: f64 = 1.0;
    let mut checkpoint = cost;
    let mut iterations = 0;
    let mut converged = cost <= cost_floor;
    while !converged && iterations < options.max_iterations {
        let momentum_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / momentum_next;
        let y = &x + (&x - &previous).scale(beta);
        let half_grad = covariance * (&y - &r_ml);
        let next = project_to_states(&(y - half_grad.scale(step)), basis);
        previous = std::mem::replace(&mut x, next);
        momentum = momentum_next;
        iterations += 1;

        let previous_cost = cost;
        cost = cost_of(&x);
        if cost > previous_cost {
            // Adaptive restart: momentum overshot the valley.
            momentum = 1.0;
        }
        if cost < best_cost {
            best_cost = cost;
            best.copy_from(&x);
        }
        if best_cost <= cost_floor {
            converged = true;
        } else if iterations % options.sweep == 0 {
            if checkpoint - best_cost < options.rel_tol * checkpoint {
                converged = true;
            }
            checkpoint = best_cost;
        }
    }

    if options.tiebreak_iterations > 0 {
        interior_tiebreak(&mut best, &c_values, &c_vectors, basis, options);
        best_cost = cost_of(&best).max(0.0);
    }

    let rho = basis.from_coordinates(&CoordinateVector::new(basis.dim(), best)?)?;
    let result = FitResult {
        rho_bar: DensityMatrix::new(rho.into_matrix())?,
        // The quadratic form can round to a tiny negative on null directions.
        cost: best_cost.max(0.0),
        iterations,
        converged,
    };
    debug_assert!(
        result.cost <= baseline_cost * (1.0 + 1e-9) + cost_floor,
        "fit lost to the clip-and-renormalize baseline"
    );
    Ok(result)
}

/// Moves a converged iterate along the null space of the covariance toward
/// the interior of the optimal face by ascending Σᵢ log(λᵢ + ε).
///
/// The seminorm is flat along these directions, so the cost contract is
/// untouched; among the many minimizers this selects the analytic-center-like
/// one, which is what barrier-based semidefinite solvers return. Step length
/// is tied to the smallest eigenvalue, so a solution pinned to the boundary
/// of the cone (a pure state forced by the record) simply stays put.
fn interior_tiebreak(
    r: &mut DVector<f64>,
    covariance_eigenvalues: &DVector<f64>,
    covariance_eigenvectors: &DMatrix<f64>,
    basis: &OperatorBasis,
    options: &FitOptions,
) {
    let n = basis.len();
    let lambda_max = covariance_eigenvalues[n - 1].max(0.0);
    let null_tol = n as f64 * crate::linalg::RANK_EPSILON * lambda_max;
    let null_indices: Vec<usize> = (0..n)
        .filter(|&i| covariance_eigenvalues[i] <= null_tol)
        .collect();
    if null_indices.is_empty() {
        return;
    }
    let mut null_basis = DMatrix::zeros(n, null_indices.len());
    for (c, &i) in null_indices.iter().enumerate() {
        null_basis.set_column(c, &covariance_eigenvectors.column(i));
    }

    let epsilon = 1e-9;
    let spectrum = |x: &DVector<f64>| -> (DVector<f64>, crate::types::CMat) {
        let op = basis
            .from_coordinates(&CoordinateVector::new(basis.dim(), x.clone()).expect("length"))
            .expect("length");
        eigh(&op)
    };
    let barrier = |values: &DVector<f64>| -> f64 {
        values.iter().map(|&v| (v + epsilon).ln()).sum()
    };

    let (mut values, mut vectors) = spectrum(r);
    let mut objective = barrier(&values);
    for _ in 0..options.tiebreak_iterations {
        if values[0] <= -epsilon * 0.5 {
            break;
        }
        // Gradient of Σ log(λ+ε) in coordinates: the traceless components of
        // (ρ + εI)^{-1}.
        let d = basis.dim();
        let mut inverse = crate::types::CMat::zeros(d, d);
        for j in 0..d {
            let weight = 1.0 / (values[j] + epsilon);
            let col = vectors.column(j);
            for a in 0..d {
                for b in 0..d {
                    inverse[(a, b)] += col[a] * col[b].conj() * weight;
                }
            }
        }
        let grad = basis
            .to_coordinates(&hermitize(&inverse))
            .expect("dimensions match");
        let grad_null = null_basis.transpose() * grad.values();
        let direction = &null_basis * &grad_null;
        let norm = direction.norm();
        if norm < 1e-12 {
            break;
        }
        // λ_min(ρ + Δ) ≥ λ_min - ‖Δ‖_F: half that margin keeps us inside.
        let mut step = 0.5 * (values[0] + epsilon).max(0.0) / norm;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &*r + direction.scale(step);
            let (cand_values, cand_vectors) = spectrum(&candidate);
            let cand_objective = barrier(&cand_values);
            if cand_values[0] > -epsilon * 0.5 && cand_objective > objective {
                *r = candidate;
                values = cand_values;
                vectors = cand_vectors;
                accepted = true;
                let improved = cand_objective - objective;
                objective = cand_objective;
                if improved < 1e-10 * objective.abs().max(1.0) {
                    return;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
}

/// Uhlmann fidelity F(a, b) = [Tr √(√a b √a)]², symmetric in its arguments
/// and clipped to [0, 1] only against round-off at the boundary.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let root = sqrtm_psd(a.as_operator())?;
    let inner = hermitize(&(root.matrix() * b.matrix() * root.matrix()));
    let (values, _) = eigh(&crate::types::HermitianOp::new(inner)?);
    if values[0] < -PSD_EIG_TOL {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: values[0],
            tol: PSD_EIG_TOL,
        });
    }
    // Round-off leaves eigenvalues of order ε·λ_max where exact zeros
    // belong; the square root would amplify them to ~1e-8 each.
    let floor = values[values.len() - 1].max(0.0) * 1e-13;
    let trace_root: f64 = values
        .iter()
        .filter(|&&v| v > floor)
        .map(|&v| v.sqrt())
        .sum();
    let mut f = trace_root * trace_root;
    if f > 1.0 && f < 1.0 + 1e-9 {
        f = 1.0;
    }
    if f < 0.0 && f > -1e-9 {
        f = 0.0;
    }
    Ok(f)
}

/// Recovers the diagonal of a pure state from its off-diagonal matrix
/// elements in the eigenbasis of the evolution unitary.
///
/// For a pure state every 2×2 minor vanishes, so |ρ_ij| = x_i·x_j with
/// x_i = |ψ_i| and the diagonal follows from ρ_ii = |ρ_ij||ρ_ik|/|ρ_jk|.
/// Rows whose off-diagonals all vanish belong to zero amplitudes. A state
/// supported on exactly two levels leaves a sign ambiguity in the quadratic
/// ρ_ii(s - ρ_ii) = |ρ_ij|²; the larger root goes to the lower index. If
/// every off-diagonal vanishes the state is an eigenstate of the unitary and
/// recovery is impossible.
///
/// The input's diagonal entries are ignored; the result lives in the same
/// basis as the input and is renormalized to unit trace.
pub fn pure_state_diagonal_recovery(off_diagonals: &CMat) -> Result<DensityMatrix> {
    let d = off_diagonals.nrows();
    if d != off_diagonals.ncols() {
        return Err(Error::NotSquare {
            rows: d,
            cols: off_diagonals.ncols(),
        });
    }
    let mut magnitude = DMatrix::<f64>::zeros(d, d);
    let mut max_offdiag = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                // Hermitian symmetrization of the measured data.
                let value = 0.5 * (off_diagonals[(i, j)].norm() + off_diagonals[(j, i)].norm());
                magnitude[(i, j)] = value;
                max_offdiag = max_offdiag.max(value);
            }
        }
    }
    if max_offdiag < 1e-12 {
        return Err(Error::EigenstateAmbiguity);
    }
    let zero_tol = 1e-12 * max_offdiag;

    let mut diagonal: Vec<Option<f64>> = vec![None; d];
    for i in 0..d {
        let row_max = (0..d)
            .filter(|&j| j != i)
            .map(|j| magnitude[(i, j)])
            .fold(0.0, f64::max);
        if row_max <= zero_tol {
            diagonal[i] = Some(0.0);
        }
    }

    // Triple formula, using the largest available denominator per row.
    for i in 0..d {
        if diagonal[i].is_some() {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        let mut best_value = zero_tol;
        for j in 0..d {
            for k in (j + 1)..d {
                if j != i && k != i && magnitude[(j, k)] > best_value {
                    best_value = magnitude[(j, k)];
                    best = Some((j, k));
                }
            }
        }
        if let Some((j, k)) = best {
            diagonal[i] = Some(magnitude[(i, j)] * magnitude[(i, k)] / magnitude[(j, k)]);
        }
    }

    // Rows connected to an already-recovered row: ρ_ii = |ρ_ij|²/ρ_jj.
    loop {
        let mut progressed = false;
        for i in 0..d {
            if diagonal[i].is_some() {
                continue;
            }
            for j in 0..d {
                if j == i || magnitude[(i, j)] <= zero_tol {
                    continue;
                }
                if let Some(v) = diagonal[j] {
                    if v > zero_tol * zero_tol {
                        diagonal[i] =
                            Some(magnitude[(i, j)] * magnitude[(i, j)] / v);
                        progressed = true;
                        break;
                    }
                }
            }
        }
        if !progressed {
            break;
        }
    }

    // What remains is a two-level system: solve the quadratic on the
    // residual trace.
    let unresolved: Vec<usize> = (0..d).filter(|&i| diagonal[i].is_none()).collect();
    match unresolved.len() {
        0 => {}
        2 => {
            let (i, j) = (unresolved[0], unresolved[1]);
            if magnitude[(i, j)] <= zero_tol {
                return Err(Error::InvalidConfig(
                    "off-diagonal data does not connect the remaining rows".into(),
                ));
            }
            let resolved_sum: f64 = diagonal.iter().flatten().sum();
            let share = (1.0 - resolved_sum).max(0.0);
            let disc = (share * share - 4.0 * magnitude[(i, j)].powi(2)).max(0.0);
            let larger = 0.5 * (share + disc.sqrt());
            diagonal[i] = Some(larger);
            diagonal[j] = Some(share - larger);
        }
        _ => {
            return Err(Error::InvalidConfig(
                "off-diagonal data insufficient to recover the diagonal".into(),
            ));
        }
    }

    let mut rho = hermitize(off_diagonals);
    for i in 0..d {
        rho[(i, i)] = C64::new(diagonal[i].expect("all rows resolved"), 0.0);
    }
    let trace = rho.trace().re;
    if trace <= 0.0 {
        return Err(Error::InvalidConfig("recovered trace is not positive".into()));
    }
    DensityMatrix::new(rho.scale(1.0 / trace))
}
