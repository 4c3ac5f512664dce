//! Seeded experiment runners: batches of (unitary × state) reconstruction
//! trials with fidelity traced against record length.
//!
//! Trials are independent work items. With the `parallel` feature (default)
//! they run on a rayon pool; [`ExperimentConfig::run_sequential`] always runs
//! on the current thread so the two paths can be compared directly. Output
//! ordering is by trial index either way, so a (config, base_seed) pair
//! reproduces its rows byte for byte.
//!
//! Seed layout, all offsets from `base_seed`:
//! unitary u uses trial index `u`; the state with flat index `s` (family
//! blocks concatenated) uses `n_unitaries + s`; the noise stream for state
//! `s` under unitary `u` uses `n_unitaries + S + u·S + s` where `S` is the
//! total number of states.

use serde::{Deserialize, Serialize};

use crate::basis::OperatorBasis;
use crate::ensembles::{
    ginibre, haar_unitary, random_mixed_bures, random_mixed_hs, random_pure_fubini_study,
    trial_rng,
};
use crate::error::{Error, Result};
use crate::kicked_top::{
    dkt_floquet, parity_operator, qkt_floquet, DoubleKickedTopParams, KickedTopParams,
};
use crate::linalg::{unitary_eigensystem, UnitaryEigen};
use crate::orbit::{simulate_record, DesignMatrix, OperatorOrbit};
use crate::reconstruct::{
    fidelity, ml_estimate, positivity_fit, pure_state_diagonal_recovery, FitOptions,
};
use crate::spin::{jx_for_dimension, jz_for_dimension, Spin};
use crate::types::{hermitize, CMat, CVec, DensityMatrix, HermitianOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Fidelity vs record length for pure states (Fubini-Study).
    Pure,
    /// Long-record fidelity for mixed states (Bures or Hilbert-Schmidt).
    Mixed,
    /// Kicked-top evolution over four state families.
    Qkt,
    /// Double-kicked-top evolution over four state families.
    Dkt,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UnitaryKind {
    Haar,
    Qkt(KickedTopParams),
    Dkt(DoubleKickedTopParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Jz,
    Jx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateMeasure {
    FubiniStudy,
    HilbertSchmidt,
    Bures,
}

impl StateMeasure {
    pub fn label(self) -> &'static str {
        match self {
            StateMeasure::FubiniStudy => "fubini_study",
            StateMeasure::HilbertSchmidt => "hilbert_schmidt",
            StateMeasure::Bures => "bures",
        }
    }
}

/// Which record lengths get a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityGrid {
    /// Every step for d ≤ 5, logarithmic otherwise.
    Auto,
    EveryStep,
    /// Roughly geometric spacing, always including d²-d+1 and the final step.
    Logarithmic,
    FinalOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dim: usize,
    pub unitary: UnitaryKind,
    pub observable: ObservableKind,
    pub measure: StateMeasure,
    pub n_states: usize,
    pub n_unitaries: usize,
    pub record_length: usize,
    pub ensemble_size: f64,
    pub sigma: f64,
    pub base_seed: u64,
    pub fidelity_grid: FidelityGrid,
}

impl ExperimentConfig {
    /// Pure-state run at desk scale: record of d²-d+1 steps, σ = 0.
    pub fn pure(dim: usize) -> Self {
        Self {
            experiment: ExperimentKind::Pure,
            dim,
            unitary: UnitaryKind::Haar,
            observable: ObservableKind::Jz,
            measure: StateMeasure::FubiniStudy,
            n_states: 50,
            n_unitaries: 5,
            record_length: dim * dim - dim + 1,
            ensemble_size: 1.0,
            sigma: 0.0,
            base_seed: 0,
            fidelity_grid: FidelityGrid::Auto,
        }
    }

    /// Mixed-state run at desk scale: long record of 10(d²-d+1) steps.
    pub fn mixed(dim: usize, measure: StateMeasure) -> Self {
        Self {
            experiment: ExperimentKind::Mixed,
            measure,
            record_length: 10 * (dim * dim - dim + 1),
            fidelity_grid: FidelityGrid::FinalOnly,
            ..Self::pure(dim)
        }
    }

    /// Kicked-top run at the chaotic J=3 working point with O = Jx.
    pub fn qkt() -> Self {
        let params = KickedTopParams::chaotic_j3();
        let dim = (2.0 * params.spin) as usize + 1;
        Self {
            experiment: ExperimentKind::Qkt,
            dim,
            unitary: UnitaryKind::Qkt(params),
            observable: ObservableKind::Jx,
            measure: StateMeasure::FubiniStudy,
            n_states: 20,
            n_unitaries: 1,
            record_length: 10 * (dim * dim - dim + 1),
            ensemble_size: 1.0,
            sigma: 0.0,
            base_seed: 0,
            fidelity_grid: FidelityGrid::Auto,
        }
    }

    /// Double-kicked-top run at the symmetry-free J=3 working point, O = Jz.
    pub fn dkt() -> Self {
        let params = DoubleKickedTopParams::chaotic_j3();
        let dim = (2.0 * params.spin) as usize + 1;
        Self {
            experiment: ExperimentKind::Dkt,
            dim,
            unitary: UnitaryKind::Dkt(params),
            observable: ObservableKind::Jz,
            ..Self::qkt()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig("dim must be at least 2".into()));
        }
        if self.n_states == 0 || self.n_unitaries == 0 || self.record_length == 0 {
            return Err(Error::InvalidConfig(
                "state, unitary and record-length counts must be at least 1".into(),
            ));
        }
        if self.sigma < 0.0 || self.ensemble_size <= 0.0 {
            return Err(Error::InvalidConfig(
                "sigma must be nonnegative and ensemble size positive".into(),
            ));
        }
        match self.unitary {
            UnitaryKind::Haar => {}
            UnitaryKind::Qkt(p) => {
                let spin = Spin::new(p.spin)?;
                if spin.dimension() != self.dim {
                    return Err(Error::InvalidConfig(format!(
                        "spin {} gives d = {}, config says {}",
                        p.spin,
                        spin.dimension(),
                        self.dim
                    )));
                }
            }
            UnitaryKind::Dkt(p) => {
                let spin = Spin::new(p.spin)?;
                if spin.dimension() != self.dim {
                    return Err(Error::InvalidConfig(format!(
                        "spin {} gives d = {}, config says {}",
                        p.spin,
                        spin.dimension(),
                        self.dim
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn observable(&self) -> Result<HermitianOp> {
        match self.observable {
            ObservableKind::Jz => jz_for_dimension(self.dim),
            ObservableKind::Jx => jx_for_dimension(self.dim),
        }
    }

    fn build_unitary(&self, unitary_index: usize) -> Result<CMat> {
        match self.unitary {
            UnitaryKind::Haar => Ok(haar_unitary(
                self.dim,
                &mut trial_rng(self.base_seed, unitary_index as u64),
            )),
            UnitaryKind::Qkt(p) => qkt_floquet(&p),
            UnitaryKind::Dkt(p) => dkt_floquet(&p),
        }
    }

    /// The record lengths at which reconstructions are evaluated.
    pub fn measurement_grid(&self) -> Vec<usize> {
        let total = self.record_length;
        let saturation = self.dim * self.dim - self.dim + 1;
        match self.fidelity_grid {
            FidelityGrid::FinalOnly => vec![total],
            FidelityGrid::EveryStep => (1..=total).collect(),
            FidelityGrid::Auto if self.dim <= 5 => (1..=total).collect(),
            FidelityGrid::Auto | FidelityGrid::Logarithmic => {
                let mut grid = Vec::new();
                let mut n = 1.0_f64;
                while (n as usize) < total {
                    grid.push(n as usize);
                    n = (n * 1.35).max(n + 1.0);
                }
                grid.push(total);
                if saturation <= total {
                    grid.push(saturation);
                }
                grid.sort_unstable();
                grid.dedup();
                grid
            }
        }
    }

    /// State families evaluated by this experiment, in row order.
    pub fn families(&self) -> Vec<StateFamily> {
        match self.experiment {
            ExperimentKind::Pure | ExperimentKind::Mixed => {
                vec![StateFamily::Measure(self.measure)]
            }
            ExperimentKind::Qkt | ExperimentKind::Dkt => vec![
                StateFamily::GenericPure,
                StateFamily::GenericMixed,
                StateFamily::ParityPure,
                StateFamily::ParityMixed,
            ],
        }
    }

    /// Runs all trials, in parallel when the `parallel` feature is enabled.
    pub fn run(&self) -> Result<Vec<ExperimentRow>> {
        self.run_impl(true)
    }

    /// Same trials on the current thread, for benchmarking and debugging.
    pub fn run_sequential(&self) -> Result<Vec<ExperimentRow>> {
        self.run_impl(false)
    }

    fn run_impl(&self, parallel: bool) -> Result<Vec<ExperimentRow>> {
        self.validate()?;
        let observable = self.observable()?;
        let basis = OperatorBasis::gell_mann(self.dim)?;
        let families = self.families();
        let grid = self.measurement_grid();
        let states_total = families.len() * self.n_states;

        // Parity-symmetric families need the parity eigenbasis; resolve it
        // once if any are present.
        let parity_sector = if families.iter().any(StateFamily::is_parity) {
            Some(odd_parity_sector(self.dim)?)
        } else {
            None
        };

        let mut rows = Vec::new();
        for unitary_index in 0..self.n_unitaries {
            let u0 = self.build_unitary(unitary_index)?;
            let orbit = OperatorOrbit::build(&u0, &observable, self.record_length - 1)?;
            let design = DesignMatrix::from_orbit(&orbit, &basis)?;
            // The pure experiment reconstructs under the prior that the state
            // is pure: the unmeasured directions are diagonal in the
            // eigenbasis of U₀, where purity pins the diagonal exactly.
            let purity_prior = match self.experiment {
                ExperimentKind::Pure => Some(unitary_eigensystem(&u0)?),
                _ => None,
            };

            let trial = |flat: usize| -> Result<Vec<ExperimentRow>> {
                let family = families[flat / self.n_states];
                let state_index = flat % self.n_states;
                let state_seed_index = (self.n_unitaries + flat) as u64;
                let rho0 = sample_state(
                    family,
                    self.dim,
                    parity_sector.as_ref(),
                    &mut trial_rng(self.base_seed, state_seed_index),
                )?;
                let noise_index =
                    (self.n_unitaries + states_total * (1 + unitary_index) + flat) as u64;
                let record = simulate_record(
                    &rho0,
                    &orbit,
                    self.ensemble_size,
                    self.sigma,
                    &mut trial_rng(self.base_seed, noise_index),
                    self.base_seed.wrapping_add(noise_index),
                )?;

                let mut trial_rows = Vec::with_capacity(grid.len());
                for &n in &grid {
                    let design_n = design.prefix(n)?;
                    let record_n = record.prefix(n);
                    let ml = ml_estimate(&design_n, &record_n)?;
                    let fit = positivity_fit(
                        &ml,
                        &design_n.covariance(),
                        &basis,
                        &FitOptions::default(),
                    )?;
                    let refined = purity_prior
                        .as_ref()
                        .and_then(|eig| refine_with_purity_prior(&fit.rho_bar, eig));
                    let f = fidelity(refined.as_ref().unwrap_or(&fit.rho_bar), &rho0)?;
                    trial_rows.push(ExperimentRow {
                        dim: self.dim,
                        family: family.label(),
                        unitary_index,
                        state_index,
                        n_measurements: n,
                        covariance_rank: ml.covariance_rank(),
                        fidelity: f,
                        cost: fit.cost,
                        iterations: fit.iterations,
                        converged: fit.converged,
                        seed: self.base_seed.wrapping_add(state_seed_index),
                    });
                }
                Ok(trial_rows)
            };

            let nested = map_indexed(parallel, states_total, trial);
            for batch in nested {
                rows.extend(batch?);
            }
        }
        Ok(rows)
    }
}

#[cfg(feature = "parallel")]
fn map_indexed<T, F>(parallel: bool, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F>(_parallel: bool, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..count).map(f).collect()
}

/// A state family evaluated within one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    Measure(StateMeasure),
    GenericPure,
    GenericMixed,
    ParityPure,
    ParityMixed,
}

impl StateFamily {
    pub fn label(self) -> &'static str {
        match self {
            StateFamily::Measure(m) => m.label(),
            StateFamily::GenericPure => "generic_pure",
            StateFamily::GenericMixed => "generic_mixed",
            StateFamily::ParityPure => "parity_pure",
            StateFamily::ParityMixed => "parity_mixed",
        }
    }

    fn is_parity(&self) -> bool {
        matches!(self, StateFamily::ParityPure | StateFamily::ParityMixed)
    }
}

/// Completes a fit under the pure-state prior: if the fitted state is not
/// already pure, rebuild its diagonal in the eigenbasis of U₀ from the fitted
/// off-diagonals (which all lie in the measured subspace) using the 2×2-minor
/// equalities of pure states. Returns None when the fit is already pure, the
/// recovery has no usable off-diagonals, or the completed matrix is not a
/// state, in which case the caller keeps the unrefined fit.
fn refine_with_purity_prior(rho_bar: &DensityMatrix, eig: &UnitaryEigen) -> Option<DensityMatrix> {
    if rho_bar.purity() >= 1.0 - 1e-6 {
        return None;
    }
    let in_basis = eig.vectors.adjoint() * rho_bar.matrix() * &eig.vectors;
    let mut off = in_basis;
    for i in 0..off.nrows() {
        off[(i, i)] = num_complex::Complex64::ZERO;
    }
    let recovered = pure_state_diagonal_recovery(&off).ok()?;
    DensityMatrix::new(hermitize(
        &(&eig.vectors * recovered.matrix() * eig.vectors.adjoint()),
    ))
    .ok()
}

/// Orthonormal basis of the odd-parity sector (eigenvalue -1 of exp(-iπJx)),
/// as columns.
fn odd_parity_sector(dim: usize) -> Result<CMat> {
    let spin = Spin::for_dimension(dim)?;
    let parity = parity_operator(spin);
    let eig = unitary_eigensystem(&parity)?;
    let odd: Vec<usize> = (0..dim)
        .filter(|&j| eig.eigenvalues[j].re < 0.0)
        .collect();
    if odd.is_empty() || odd.len() == dim {
        return Err(Error::InvalidConfig(
            "parity operator has a single eigenvalue cluster".into(),
        ));
    }
    let mut sector = CMat::zeros(dim, odd.len());
    for (c, &j) in odd.iter().enumerate() {
        sector.set_column(c, &eig.vectors.column(j));
    }
    Ok(sector)
}

fn sample_state(
    family: StateFamily,
    dim: usize,
    parity_sector: Option<&CMat>,
    rng: &mut crate::ensembles::SeededRng,
) -> Result<DensityMatrix> {
    match family {
        StateFamily::Measure(StateMeasure::FubiniStudy) | StateFamily::GenericPure => {
            Ok(random_pure_fubini_study(dim, rng))
        }
        StateFamily::Measure(StateMeasure::HilbertSchmidt) | StateFamily::GenericMixed => {
            Ok(random_mixed_hs(dim, rng))
        }
        StateFamily::Measure(StateMeasure::Bures) => Ok(random_mixed_bures(dim, rng)),
        StateFamily::ParityPure => {
            let sector = parity_sector.expect("sector resolved for parity families");
            let q = sector.ncols();
            let g: CVec = CVec::from_fn(q, |_, _| {
                use rand::Rng;
                num_complex::Complex64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            });
            DensityMatrix::from_pure(&(sector * g))
        }
        StateFamily::ParityMixed => {
            let sector = parity_sector.expect("sector resolved for parity families");
            let q = sector.ncols();
            let g = ginibre(q, rng);
            let sigma = hermitize(&(&g * g.adjoint()));
            let embedded = hermitize(&(sector * sigma * sector.adjoint()));
            let trace = embedded.trace().re;
            DensityMatrix::new(embedded.scale(1.0 / trace))
        }
    }
}

/// One reconstruction at one record length.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub dim: usize,
    pub family: &'static str,
    pub unitary_index: usize,
    pub state_index: usize,
    pub n_measurements: usize,
    pub covariance_rank: usize,
    pub fidelity: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

/// Largest record length present.
pub fn final_measurement_count(rows: &[ExperimentRow]) -> usize {
    rows.iter().map(|r| r.n_measurements).max().unwrap_or(0)
}

/// Mean fidelity over rows at one record length, optionally restricted to a
/// family label.
pub fn mean_fidelity_at(rows: &[ExperimentRow], n: usize, family: Option<&str>) -> Option<f64> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for row in rows {
        if row.n_measurements == n && family.is_none_or(|f| row.family == f) {
            acc += row.fidelity;
            count += 1;
        }
    }
    (count > 0).then(|| acc / count as f64)
}

/// Per-unitary mean fidelities at one record length (index = unitary).
pub fn per_unitary_means(rows: &[ExperimentRow], n: usize) -> Vec<f64> {
    let units = rows.iter().map(|r| r.unitary_index).max().map_or(0, |m| m + 1);
    let mut acc = vec![0.0; units];
    let mut count = vec![0usize; units];
    for row in rows {
        if row.n_measurements == n {
            acc[row.unitary_index] += row.fidelity;
            count[row.unitary_index] += 1;
        }
    }
    acc.iter()
        .zip(&count)
        .filter(|(_, &c)| c > 0)
        .map(|(&a, &c)| a / c as f64)
        .collect()
}
