//! Informational completeness of a one-parameter record: commutant dimension,
//! orbit span dimension, the three saturation conditions on the evolution
//! unitary, and the Vandermonde determinant diagnostic behind them.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::basis::OperatorBasis;
use crate::error::Result;
use crate::linalg::{unitary_eigensystem, UnitaryEigen};
use crate::orbit::{DesignMatrix, OperatorOrbit};
use crate::types::{CMat, HermitianOp};

/// Default tolerance for phase-difference distinctness (radians).
pub const TOL_PHASE: f64 = 1e-9;
/// Default tolerance below which a matrix element counts as zero.
pub const TOL_ELEMENT: f64 = 1e-10;
/// Eigenvalue gap below which eigenvectors of a cluster are arbitrary.
const DEGENERACY_GAP: f64 = 1e-10;
/// Linkage distance for grouping equal eigenvalues of the unitary.
const MULTIPLICITY_LINKAGE: f64 = 1e-9;

/// Groups sorted eigenphases into clusters of (numerically) equal unit-circle
/// eigenvalues by single linkage, merging across the ±π wrap.
fn eigenvalue_clusters(phases: &[f64], linkage: f64) -> Vec<Vec<usize>> {
    let n = phases.len();
    if n == 0 {
        return Vec::new();
    }
    // Chord distance between neighbouring phases; phases arrive sorted.
    let chord = |a: f64, b: f64| 2.0 * ((a - b) / 2.0).sin().abs();
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        if chord(phases[i], phases[i - 1]) < linkage {
            clusters.last_mut().unwrap().push(i);
        } else {
            clusters.push(vec![i]);
        }
    }
    // Wraparound: e^{-iπ} and e^{+iπ} are the same eigenvalue.
    if clusters.len() > 1 {
        let first = phases[0];
        let last = phases[n - 1];
        if 2.0 * ((first + std::f64::consts::TAU - last) / 2.0).sin().abs() < linkage {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    clusters
}

/// Dimension of the commutant of `u0` inside the traceless Hermitian
/// operators: Σᵢ mᵢ² - 1 over the eigenvalue multiplicities mᵢ. Equals d-1
/// (a Cartan subalgebra) for nondegenerate spectra.
pub fn commutant_dimension(u0: &CMat) -> Result<usize> {
    let eig = unitary_eigensystem(u0)?;
    let clusters = eigenvalue_clusters(eig.phases.as_slice(), MULTIPLICITY_LINKAGE);
    Ok(clusters.iter().map(|c| c.len() * c.len()).sum::<usize>() - 1)
}

/// Lower bound on the dimension of the unmeasured operator subspace: the
/// commutant dimension minus one when the observable has a nonzero component
/// in the commutant, the full commutant dimension otherwise.
pub fn missing_subspace_dimension(u0: &CMat, o0: &HermitianOp) -> Result<usize> {
    let eig = unitary_eigensystem(u0)?;
    let clusters = eigenvalue_clusters(eig.phases.as_slice(), MULTIPLICITY_LINKAGE);
    let dim_g = clusters.iter().map(|c| c.len() * c.len()).sum::<usize>() - 1;

    // Commutant component of O: the block-diagonal part (over eigenvalue
    // clusters) of O in the eigenbasis, with the identity share removed.
    let d = o0.dim();
    let o_eig = eig.vectors.adjoint() * o0.matrix() * &eig.vectors;
    let trace_share = o0.trace() / d as f64;
    let mut component: f64 = 0.0;
    for cluster in &clusters {
        for &i in cluster {
            for &j in cluster {
                let value = if i == j {
                    o_eig[(i, j)] - C64::new(trace_share, 0.0)
                } else {
                    o_eig[(i, j)]
                };
                component = component.max(value.norm());
            }
        }
    }
    Ok(if component > TOL_ELEMENT {
        dim_g - 1
    } else {
        dim_g
    })
}

/// Numerical rank of the orbit's design matrix: the dimension actually
/// spanned by the measured operators.
pub fn span_dimension(orbit: &OperatorOrbit, basis: &OperatorBasis) -> Result<usize> {
    let design = DesignMatrix::from_orbit(orbit, basis)?;
    Ok(crate::linalg::numerical_rank(design.entries()))
}

/// Two phase differences that coincide modulo 2π, or one difference that
/// vanishes (`second_pair` absent).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseCollision {
    pub first_pair: (usize, usize),
    pub second_pair: Option<(usize, usize)>,
    pub difference: f64,
}

/// Outcome of the three saturation conditions on (U₀, O), evaluated in the
/// eigenbasis of U₀.
#[derive(Debug, Clone, Serialize)]
pub struct SaturationReport {
    /// Condition 1: some diagonal element ⟨j|O|j⟩ is nonzero.
    pub diagonal_nonzero: bool,
    /// Index of the first nonzero diagonal element, if any.
    pub diagonal_witness: Option<usize>,
    /// Condition 2: every off-diagonal element ⟨k|O|j⟩ is nonzero.
    pub offdiagonals_nonzero: bool,
    /// First vanishing off-diagonal element, if any.
    pub first_zero_offdiagonal: Option<(usize, usize)>,
    /// Condition 3: all ordered pairwise eigenphase differences are distinct
    /// modulo 2π and distinct from zero.
    pub phase_differences_distinct: bool,
    /// First collision found while scanning sorted differences, if any.
    pub first_phase_collision: Option<PhaseCollision>,
    /// Eigenphases φ_j of U₀ = Σ e^{-iφ_j}|j⟩⟨j|, sorted ascending (radians).
    pub eigenphases: Vec<f64>,
    /// The spectrum has an eigenvalue gap below 1e-10. Conditions 1-2 are
    /// then evaluated in an arbitrary basis of the degenerate subspace and
    /// should not be trusted; condition 3 fails regardless.
    pub degenerate_spectrum: bool,
    /// All three conditions hold.
    pub saturated: bool,
}

/// Evaluates the saturation conditions for the orbit of `o0` under `u0`.
pub fn check_saturation(
    u0: &CMat,
    o0: &HermitianOp,
    tol_phase: f64,
    tol_element: f64,
) -> Result<SaturationReport> {
    let eig = unitary_eigensystem(u0)?;
    Ok(saturation_from_eigensystem(&eig, o0, tol_phase, tol_element))
}

/// Same as [`check_saturation`] with the default tolerances.
pub fn check_saturation_default(u0: &CMat, o0: &HermitianOp) -> Result<SaturationReport> {
    check_saturation(u0, o0, TOL_PHASE, TOL_ELEMENT)
}

fn saturation_from_eigensystem(
    eig: &UnitaryEigen,
    o0: &HermitianOp,
    tol_phase: f64,
    tol_element: f64,
) -> SaturationReport {
    let d = o0.dim();
    let o_eig = eig.vectors.adjoint() * o0.matrix() * &eig.vectors;

    let mut diagonal_witness = None;
    for j in 0..d {
        if o_eig[(j, j)].norm() > tol_element {
            diagonal_witness = Some(j);
            break;
        }
    }

    let mut first_zero_offdiagonal = None;
    'outer: for j in 0..d {
        for k in 0..d {
            if j != k && o_eig[(j, k)].norm() <= tol_element {
                first_zero_offdiagonal = Some((j, k));
                break 'outer;
            }
        }
    }

    // Condition 3 on the d²-d ordered differences, sorted modulo 2π so only
    // adjacent entries need comparing.
    let mut differences: Vec<(f64, (usize, usize))> = Vec::with_capacity(d * d - d);
    for j in 0..d {
        for k in 0..d {
            if j != k {
                let diff = (eig.phases[j] - eig.phases[k]).rem_euclid(std::f64::consts::TAU);
                differences.push((diff, (j, k)));
            }
        }
    }
    differences.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut first_phase_collision = None;
    for &(diff, pair) in &differences {
        // e^{-i·diff} = 1 collides with the constant diagonal node.
        if diff < tol_phase || std::f64::consts::TAU - diff < tol_phase {
            first_phase_collision = Some(PhaseCollision {
                first_pair: pair,
                second_pair: None,
                difference: diff,
            });
            break;
        }
    }
    if first_phase_collision.is_none() {
        for w in differences.windows(2) {
            if w[1].0 - w[0].0 < tol_phase {
                first_phase_collision = Some(PhaseCollision {
                    first_pair: w[0].1,
                    second_pair: Some(w[1].1),
                    difference: w[0].0,
                });
                break;
            }
        }
    }

    let mut min_gap = f64::INFINITY;
    for j in 0..d {
        for k in (j + 1)..d {
            min_gap = min_gap.min((eig.eigenvalues[j] - eig.eigenvalues[k]).norm());
        }
    }

    let diagonal_nonzero = diagonal_witness.is_some();
    let offdiagonals_nonzero = first_zero_offdiagonal.is_none();
    let phase_differences_distinct = first_phase_collision.is_none();
    SaturationReport {
        diagonal_nonzero,
        diagonal_witness,
        offdiagonals_nonzero,
        first_zero_offdiagonal,
        phase_differences_distinct,
        first_phase_collision,
        eigenphases: eig.phases.iter().cloned().collect(),
        degenerate_spectrum: d > 1 && min_gap < DEGENERACY_GAP,
        saturated: diagonal_nonzero && offdiagonals_nonzero && phase_differences_distinct,
    }
}

/// The d²-d+1 Vandermonde nodes of a saturated record: the constant node 1
/// together with e^{-i(φ_j-φ_k)} for all ordered pairs.
pub fn saturation_nodes(phases: &[f64]) -> Vec<C64> {
    let d = phases.len();
    let mut nodes = Vec::with_capacity(d * d - d + 1);
    nodes.push(C64::ONE);
    for j in 0..d {
        for k in 0..d {
            if j != k {
                nodes.push(C64::from_polar(1.0, -(phases[j] - phases[k])));
            }
        }
    }
    nodes
}

/// log|det V| and arg(det V) of the Vandermonde matrix on `nodes`, via the
/// product formula Π_{j<k}(x_k - x_j) accumulated in log-magnitude form.
/// A repeated node yields log|det| = -∞.
pub fn vandermonde_log_det(nodes: &[C64]) -> (f64, f64) {
    let mut log_abs = 0.0_f64;
    let mut arg = 0.0_f64;
    for j in 0..nodes.len() {
        for k in (j + 1)..nodes.len() {
            let factor = nodes[k] - nodes[j];
            log_abs += factor.norm().ln();
            arg += factor.arg();
        }
    }
    let arg = arg.rem_euclid(std::f64::consts::TAU);
    // Fold into (-π, π] for readability.
    let arg = if arg > std::f64::consts::PI {
        arg - std::f64::consts::TAU
    } else {
        arg
    };
    (log_abs, arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar_unitary, trial_rng};
    use crate::spin::jz_for_dimension;
    use nalgebra::DMatrix;

    fn diagonal_unitary(phases_of_lambda: &[f64]) -> CMat {
        let d = phases_of_lambda.len();
        CMat::from_fn(d, d, |i, j| {
            if i == j {
                C64::from_polar(1.0, phases_of_lambda[i])
            } else {
                C64::ZERO
            }
        })
    }

    #[test]
    fn commutant_of_identity_is_full_algebra() {
        assert_eq!(commutant_dimension(&CMat::identity(3, 3)).unwrap(), 8);
    }

    #[test]
    fn commutant_of_nondegenerate_unitary_is_cartan() {
        let u = diagonal_unitary(&[0.0, 1.0, 2.5]);
        assert_eq!(commutant_dimension(&u).unwrap(), 2);
    }

    #[test]
    fn commutant_dimension_matches_superoperator_null_space() {
        // Oracle: the map g ↦ U₀ g U₀† - g on the traceless Hermitian basis;
        // its null space is the commutant.
        let d = 6;
        let u0 = haar_unitary(d, &mut trial_rng(99, 0));
        let basis = OperatorBasis::gell_mann(d).unwrap();
        let n = basis.len();
        let mut superop = DMatrix::<f64>::zeros(n, n);
        for (alpha, e_alpha) in basis.elements().iter().enumerate() {
            let mapped = &u0 * e_alpha.matrix() * u0.adjoint() - e_alpha.matrix();
            let coords = basis.to_coordinates(&mapped).unwrap();
            superop.set_column(alpha, coords.values());
        }
        let null_dim = n - crate::linalg::numerical_rank(&superop);
        assert_eq!(null_dim, d - 1);
        assert_eq!(commutant_dimension(&u0).unwrap(), d - 1);
    }

    #[test]
    fn degenerate_unitary_grows_commutant() {
        let u = diagonal_unitary(&[0.7, 0.7, -1.1]);
        // Multiplicities (2,1): 4 + 1 - 1 = 4.
        assert_eq!(commutant_dimension(&u).unwrap(), 4);
    }

    #[test]
    fn missing_subspace_is_zero_for_qubits() {
        let u0 = haar_unitary(2, &mut trial_rng(50, 0));
        let o0 = jz_for_dimension(2).unwrap();
        assert_eq!(missing_subspace_dimension(&u0, &o0).unwrap(), 0);
    }

    #[test]
    fn missing_subspace_matches_span_complement_at_d5() {
        let d = 5;
        let u0 = haar_unitary(d, &mut trial_rng(51, 0));
        let o0 = jz_for_dimension(d).unwrap();
        assert_eq!(missing_subspace_dimension(&u0, &o0).unwrap(), d - 2);
        // Cross-check: (d²-1) - span rank for a saturating record.
        let basis = OperatorBasis::gell_mann(d).unwrap();
        let orbit = OperatorOrbit::build(&u0, &o0, d * d - d).unwrap();
        let span = span_dimension(&orbit, &basis).unwrap();
        assert_eq!((d * d - 1) - span, d - 2);
    }

    #[test]
    fn missing_subspace_under_identity_is_everything_but_o() {
        let d = 4;
        let o0 = jz_for_dimension(d).unwrap();
        assert_eq!(
            missing_subspace_dimension(&CMat::identity(d, d), &o0).unwrap(),
            d * d - 2
        );
    }

    #[test]
    fn span_of_identity_orbit_is_one() {
        let d = 4;
        let o0 = jz_for_dimension(d).unwrap();
        let basis = OperatorBasis::gell_mann(d).unwrap();
        let orbit = OperatorOrbit::build(&CMat::identity(d, d), &o0, 10).unwrap();
        assert_eq!(span_dimension(&orbit, &basis).unwrap(), 1);
    }

    #[test]
    fn span_saturates_bound_for_haar_at_d7() {
        let d = 7;
        let u0 = haar_unitary(d, &mut trial_rng(52, 0));
        let o0 = jz_for_dimension(d).unwrap();
        let basis = OperatorBasis::gell_mann(d).unwrap();
        let orbit = OperatorOrbit::build(&u0, &o0, d * d - d).unwrap();
        assert_eq!(span_dimension(&orbit, &basis).unwrap(), 43);
    }

    #[test]
    fn span_never_exceeds_bound() {
        for d in 3..=8usize {
            let basis = OperatorBasis::gell_mann(d).unwrap();
            let o0 = jz_for_dimension(d).unwrap();
            for trial in 0..50 {
                let u0 = haar_unitary(d, &mut trial_rng(53, (d * 100 + trial) as u64));
                let orbit = OperatorOrbit::build(&u0, &o0, d * d - d + 4).unwrap();
                let span = span_dimension(&orbit, &basis).unwrap();
                assert!(span <= d * d - d + 1, "span {span} exceeds bound at d={d}");
            }
        }
    }

    #[test]
    fn span_respects_commutant_orthogonality_bound() {
        // Jz has a nonzero commutant component for generic u0, so the span
        // cannot exceed (d²-1) - (dim G - 1).
        for d in [3usize, 5, 6] {
            let basis = OperatorBasis::gell_mann(d).unwrap();
            let o0 = jz_for_dimension(d).unwrap();
            for trial in 0..5u64 {
                let u0 = haar_unitary(d, &mut trial_rng(57, d as u64 * 10 + trial));
                let orbit = OperatorOrbit::build(&u0, &o0, d * d - d + 3).unwrap();
                let span = span_dimension(&orbit, &basis).unwrap();
                let commutant = commutant_dimension(&u0).unwrap();
                assert!(span <= (d * d - 1) - (commutant - 1));
            }
        }
    }

    #[test]
    fn identity_fails_condition_three() {
        let o0 = jz_for_dimension(3).unwrap();
        let report = check_saturation_default(&CMat::identity(3, 3), &o0).unwrap();
        assert!(!report.phase_differences_distinct);
        assert!(!report.saturated);
        assert!(report.degenerate_spectrum);
    }

    #[test]
    fn quarter_turn_spectrum_collides() {
        // λ = (1, i, -1): φ differences repeat, e.g. φ₁-φ₂ = φ₂-φ₃.
        let u = diagonal_unitary(&[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]);
        // All-nonzero observable in this basis.
        let o = HermitianOp::new(CMat::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(1.0 + i as f64, 0.0)
            } else {
                C64::new(0.3, if i < j { 0.4 } else { -0.4 })
            }
        }))
        .unwrap();
        let report = check_saturation_default(&u, &o).unwrap();
        assert!(report.diagonal_nonzero);
        assert!(report.offdiagonals_nonzero);
        assert!(!report.phase_differences_distinct);
        assert!(report.first_phase_collision.is_some());
        assert!(!report.saturated);
    }

    #[test]
    fn haar_samples_saturate_at_d4() {
        let o0 = jz_for_dimension(4).unwrap();
        for trial in 0..100 {
            let u0 = haar_unitary(4, &mut trial_rng(54, trial));
            let report = check_saturation_default(&u0, &o0).unwrap();
            assert!(report.saturated, "trial {trial} not saturated: {report:?}");
        }
    }

    #[test]
    fn zeroed_offdiagonal_fails_condition_two() {
        // Build U₀ whose eigenbasis makes one off-diagonal element of O zero:
        // pick the eigenbasis so that two eigenvectors are Jz eigenstates.
        let d = 3;
        let phases = [0.3, 1.1, 2.2];
        let u0 = diagonal_unitary(&phases);
        let o0 = jz_for_dimension(d).unwrap();
        // O = Jz is diagonal in this eigenbasis: every off-diagonal is zero.
        let report = check_saturation_default(&u0, &o0).unwrap();
        assert!(report.diagonal_nonzero);
        assert!(!report.offdiagonals_nonzero);
        assert_eq!(report.first_zero_offdiagonal, Some((0, 1)));
        assert!(!report.saturated);
    }

    #[test]
    fn saturated_spectrum_has_nonzero_vandermonde() {
        let u0 = haar_unitary(4, &mut trial_rng(55, 0));
        let o0 = jz_for_dimension(4).unwrap();
        let report = check_saturation_default(&u0, &o0).unwrap();
        assert!(report.saturated);
        let nodes = saturation_nodes(&report.eigenphases);
        assert_eq!(nodes.len(), 13);
        let (log_abs, _) = vandermonde_log_det(&nodes);
        assert!(log_abs.is_finite());
    }

    #[test]
    fn repeated_node_gives_negative_infinity() {
        let nodes = [C64::ONE, C64::new(0.0, 1.0), C64::ONE];
        let (log_abs, _) = vandermonde_log_det(&nodes);
        assert_eq!(log_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn two_node_case() {
        // det [[1, 1], [x₀, x₁]] ... with rows (1, x_j, ...) the 2×2 case is
        // x₁ - x₀ = -2 for nodes (1, -1).
        let nodes = [C64::ONE, C64::new(-1.0, 0.0)];
        let (log_abs, arg) = vandermonde_log_det(&nodes);
        assert!((log_abs - 2.0_f64.ln()).abs() < 1e-14);
        assert!((arg - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn log_det_matches_dense_determinant() {
        let nodes: Vec<C64> = (0..5)
            .map(|i| C64::from_polar(1.0, 0.41 * i as f64 + 0.13))
            .collect();
        let n = nodes.len();
        let mut v = CMat::zeros(n, n);
        for (i, &x) in nodes.iter().enumerate() {
            let mut power = C64::ONE;
            for j in 0..n {
                v[(i, j)] = power;
                power *= x;
            }
        }
        let det = v.lu().determinant();
        let (log_abs, arg) = vandermonde_log_det(&nodes);
        assert!(
            (log_abs - det.norm().ln()).abs() < 1e-9 * det.norm().ln().abs().max(1.0),
            "log|det| mismatch"
        );
        let arg_diff = (arg - det.arg()).rem_euclid(std::f64::consts::TAU);
        assert!(arg_diff < 1e-9 || std::f64::consts::TAU - arg_diff < 1e-9);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn vandermonde_antisymmetric_under_swap(seed in 0u64..64) {
            let mut rng = trial_rng(56, seed);
            let u = haar_unitary(3, &mut rng);
            let eig = crate::linalg::unitary_eigensystem(&u).unwrap();
            let mut nodes = saturation_nodes(eig.phases.as_slice());
            let (log_before, arg_before) = vandermonde_log_det(&nodes);
            nodes.swap(1, 4);
            let (log_after, arg_after) = vandermonde_log_det(&nodes);
            prop_assert!((log_before - log_after).abs() < 1e-12 * log_before.abs().max(1.0));
            let shift = (arg_after - arg_before).rem_euclid(std::f64::consts::TAU);
            prop_assert!((shift - std::f64::consts::PI).abs() < 1e-9);
        }
    }
}
