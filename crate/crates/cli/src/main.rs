//! `qsr`: span checks, single reconstructions and batch experiments from the
//! command line, with CSV data and JSON metadata outputs.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numerical
//! failure while running.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsr_core::basis::OperatorBasis;
use qsr_core::ensembles::{haar_unitary, trial_rng};
use qsr_core::experiment::{
    mean_fidelity_at, ExperimentConfig, ExperimentKind, StateMeasure, UnitaryKind,
};
use qsr_core::io as qsr_io;
use qsr_core::kicked_top::{dkt_floquet, qkt_floquet, DoubleKickedTopParams, KickedTopParams};
use qsr_core::orbit::{simulate_record, DesignMatrix, MeasurementRecord, OperatorOrbit};
use qsr_core::reconstruct::{fidelity, ml_estimate, positivity_fit, FitOptions};
use qsr_core::span::{
    check_saturation, commutant_dimension, missing_subspace_dimension, saturation_nodes,
    span_dimension, vandermonde_log_det, SaturationReport, TOL_ELEMENT, TOL_PHASE,
};
use qsr_core::spin::{jx_for_dimension, jz_for_dimension, Spin};
use qsr_core::types::{check_unitary, CMat, DensityMatrix, HermitianOp, UNITARITY_TOL};

#[derive(Parser)]
#[command(
    name = "qsr",
    version,
    about = "Quantum state reconstruction from repeated-unitary measurement records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the saturation conditions and span dimension of a unitary
    SpanCheck(SpanCheckArgs),
    /// Simulate (or load) one record and reconstruct the state
    Reconstruct(ReconstructArgs),
    /// Run a seeded experiment batch, writing CSV data and JSON metadata
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitaryChoice {
    Haar,
    Qkt,
    Dkt,
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObservableChoice {
    Jz,
    Jx,
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateChoice {
    FubiniStudy,
    HilbertSchmidt,
    Bures,
    File,
}

/// Parameters of the kicked-top family, shared by several subcommands.
#[derive(Args, Clone, Copy)]
struct TopParams {
    /// Twist angle φ in radians (default 7 for the kicked top, 6 for the
    /// double top)
    #[arg(long)]
    phi: Option<f64>,
    /// Kick angle θ (radians)
    #[arg(long, default_value_t = 0.228)]
    theta: f64,
    /// Second twist angle φ′ of the double top (defaults to φ)
    #[arg(long)]
    phi_prime: Option<f64>,
    /// Kick angle θx (double top)
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    theta_x: f64,
    /// Kick angle θy (double top)
    #[arg(long, default_value_t = 0.228)]
    theta_y: f64,
}

impl TopParams {
    fn qkt(&self, spin: f64) -> KickedTopParams {
        KickedTopParams {
            spin,
            phi: self.phi.unwrap_or(7.0),
            theta: self.theta,
        }
    }

    fn dkt(&self, spin: f64) -> DoubleKickedTopParams {
        let phi = self.phi.unwrap_or(6.0);
        DoubleKickedTopParams {
            spin,
            phi,
            phi_prime: self.phi_prime.unwrap_or(phi),
            theta_x: self.theta_x,
            theta_y: self.theta_y,
        }
    }
}

#[derive(Args)]
struct SpanCheckArgs {
    /// Hilbert-space dimension
    #[arg(long, conflicts_with = "spin")]
    d: Option<usize>,
    /// Spin J (d = 2J+1)
    #[arg(long)]
    spin: Option<f64>,
    #[arg(long, value_enum, ignore_case = true, default_value_t = UnitaryChoice::Haar)]
    unitary: UnitaryChoice,
    /// Complex-matrix CSV (re,im pairs) when --unitary file
    #[arg(long)]
    unitary_file: Option<PathBuf>,
    #[arg(long, value_enum, ignore_case = true, default_value_t = ObservableChoice::Jz)]
    observable: ObservableChoice,
    #[arg(long)]
    observable_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Orbit length for the span dimension; defaults to d²-d+1
    #[arg(long)]
    record_length: Option<usize>,
    /// Phase-distinctness tolerance (radians)
    #[arg(long, default_value_t = TOL_PHASE)]
    tol_phase: f64,
    /// Matrix-element zero tolerance
    #[arg(long, default_value_t = TOL_ELEMENT)]
    tol_element: f64,
    #[command(flatten)]
    top: TopParams,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, conflicts_with = "spin")]
    d: Option<usize>,
    #[arg(long)]
    spin: Option<f64>,
    #[arg(long, value_enum, ignore_case = true, default_value_t = UnitaryChoice::Haar)]
    unitary: UnitaryChoice,
    #[arg(long)]
    unitary_file: Option<PathBuf>,
    #[arg(long, value_enum, ignore_case = true, default_value_t = ObservableChoice::Jz)]
    observable: ObservableChoice,
    #[arg(long)]
    observable_file: Option<PathBuf>,
    /// State preparation for simulation mode
    #[arg(long, value_enum, ignore_case = true, default_value_t = StateChoice::FubiniStudy)]
    state: StateChoice,
    /// Density-matrix CSV when --state file
    #[arg(long)]
    state_file: Option<PathBuf>,
    /// Measured record CSV; switches to file mode (no simulated truth)
    #[arg(long)]
    record_file: Option<PathBuf>,
    #[arg(long)]
    record_length: Option<usize>,
    /// Ensemble size N scaling the record
    #[arg(long, default_value_t = 1.0)]
    ensemble_size: f64,
    /// Per-step Gaussian noise level σ
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    top: TopParams,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the reconstructed density matrix as complex CSV
    #[arg(long)]
    rho_out: Option<PathBuf>,
    /// Also write the design matrix as real CSV (one row per measurement)
    #[arg(long)]
    design_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; replaces the subcommand and its flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    kind: Option<ExperimentCommand>,
    /// Output directory (default $QSR_OUTPUT_DIR or .)
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Output file stem (default derived from the experiment)
    #[arg(long, global = true)]
    name: Option<String>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Pure-state fidelity vs record length (Fubini-Study states)
    Pure(BatchArgs),
    /// Mixed-state long-record fidelity (Bures or Hilbert-Schmidt)
    Mixed(MixedArgs),
    /// Kicked-top record over four state families
    Qkt(TopBatchArgs),
    /// Double-kicked-top record over four state families
    Dkt(TopBatchArgs),
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, default_value_t = 4, conflicts_with = "spin")]
    d: usize,
    #[arg(long)]
    spin: Option<f64>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    n_unitaries: Option<usize>,
    #[arg(long)]
    record_length: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    ensemble_size: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Paper-scale sample counts (100/200 states, 10/20 unitaries)
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct MixedArgs {
    #[command(flatten)]
    batch: BatchArgs,
    /// State measure to sample from
    #[arg(long, value_enum, ignore_case = true, default_value_t = MeasureChoice::Bures)]
    measure: MeasureChoice,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureChoice {
    Bures,
    HilbertSchmidt,
}

#[derive(Args)]
struct TopBatchArgs {
    /// Spin J of the top (d = 2J+1)
    #[arg(long, default_value_t = 3.0)]
    spin: f64,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    record_length: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    ensemble_size: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    top: TopParams,
}

/// Errors mapped onto process exit codes.
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<qsr_core::Error> for CliError {
    fn from(err: qsr_core::Error) -> Self {
        use qsr_core::Error::*;
        match err {
            InvalidConfig(_) | DimensionMismatch { .. } | InvalidSpin { .. }
            | RecordLengthMismatch { .. } | InvalidBlockDims { .. } => {
                CliError::Config(err.to_string())
            }
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::SpanCheck(args) => run_span_check(args),
        Command::Reconstruct(args) => run_reconstruct(args),
        Command::Experiment(args) => run_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn resolve_dim(d: Option<usize>, spin: Option<f64>, fallback: Option<usize>) -> Result<usize, CliError> {
    match (d, spin) {
        (Some(d), None) => Ok(d),
        (None, Some(j)) => Ok(Spin::new(j).map_err(CliError::from)?.dimension()),
        (None, None) => fallback.ok_or_else(|| config_error("one of --d or --spin is required")),
        (Some(_), Some(_)) => Err(config_error("--d conflicts with --spin")),
    }
}

fn load_complex_matrix(path: &Path) -> Result<CMat, CliError> {
    let file = File::open(path)
        .map_err(|e| config_error(format!("cannot open {}: {e}", path.display())))?;
    qsr_io::read_complex_matrix_csv(BufReader::new(file)).map_err(CliError::from)
}

fn build_unitary(
    choice: UnitaryChoice,
    file: Option<&PathBuf>,
    dim: usize,
    seed: u64,
    top: &TopParams,
) -> Result<CMat, CliError> {
    match choice {
        UnitaryChoice::Haar => Ok(haar_unitary(dim, &mut trial_rng(seed, 0))),
        UnitaryChoice::Qkt => {
            let spin = Spin::for_dimension(dim)?;
            Ok(qkt_floquet(&top.qkt(spin.value()))?)
        }
        UnitaryChoice::Dkt => {
            let spin = Spin::for_dimension(dim)?;
            Ok(dkt_floquet(&top.dkt(spin.value()))?)
        }
        UnitaryChoice::File => {
            let path = file.ok_or_else(|| config_error("--unitary file needs --unitary-file"))?;
            let u = load_complex_matrix(path)?;
            check_unitary(&u, UNITARITY_TOL)?;
            Ok(u)
        }
    }
}

fn build_observable(
    choice: ObservableChoice,
    file: Option<&PathBuf>,
    dim: usize,
) -> Result<HermitianOp, CliError> {
    match choice {
        ObservableChoice::Jz => Ok(jz_for_dimension(dim)?),
        ObservableChoice::Jx => Ok(jx_for_dimension(dim)?),
        ObservableChoice::File => {
            let path =
                file.ok_or_else(|| config_error("--observable file needs --observable-file"))?;
            Ok(HermitianOp::new(load_complex_matrix(path)?)?)
        }
    }
}

fn write_json<T: Serialize>(value: &T, output: Option<&PathBuf>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
    match output {
        Some(path) => {
            let mut file = File::create(path)
                .map_err(|e| config_error(format!("cannot create {}: {e}", path.display())))?;
            writeln!(file, "{json}")
                .map_err(|e| config_error(format!("writing {}: {e}", path.display())))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct SpanCheckOutput {
    dim: usize,
    seed: u64,
    record_length: usize,
    span_dimension: usize,
    commutant_dimension: usize,
    missing_subspace_dimension: usize,
    vandermonde_log_abs_det: f64,
    report: SaturationReport,
}

fn run_span_check(args: SpanCheckArgs) -> Result<(), CliError> {
    let dim = resolve_dim(args.d, args.spin, None)?;
    let u0 = build_unitary(
        args.unitary,
        args.unitary_file.as_ref(),
        dim,
        args.seed,
        &args.top,
    )?;
    if u0.nrows() != dim {
        return Err(config_error(format!(
            "unitary file is {}x{} but --d is {dim}",
            u0.nrows(),
            u0.ncols()
        )));
    }
    let observable = build_observable(args.observable, args.observable_file.as_ref(), dim)?;
    let record_length = args.record_length.unwrap_or(dim * dim - dim + 1);

    let report = check_saturation(&u0, &observable, args.tol_phase, args.tol_element)?;
    let basis = OperatorBasis::gell_mann(dim)?;
    let orbit = OperatorOrbit::build(&u0, &observable, record_length - 1)?;
    let span = span_dimension(&orbit, &basis)?;
    let nodes = saturation_nodes(&report.eigenphases);
    let (log_abs, _) = vandermonde_log_det(&nodes);

    let output = SpanCheckOutput {
        dim,
        seed: args.seed,
        record_length,
        span_dimension: span,
        commutant_dimension: commutant_dimension(&u0)?,
        missing_subspace_dimension: missing_subspace_dimension(&u0, &observable)?,
        vandermonde_log_abs_det: log_abs,
        report,
    };
    write_json(&output, args.output.as_ref())
}

#[derive(Serialize)]
struct ReconstructOutput {
    dim: usize,
    record_length: usize,
    covariance_rank: usize,
    used_pseudo_inverse: bool,
    cost: f64,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
    seed: u64,
}

fn run_reconstruct(args: ReconstructArgs) -> Result<(), CliError> {
    let file_mode = args.record_file.is_some();
    let dim = match (file_mode, args.d, args.spin) {
        (true, None, None) => {
            // In file mode the unitary fixes the dimension.
            let path = args
                .unitary_file
                .as_ref()
                .ok_or_else(|| config_error("file mode needs --unitary-file"))?;
            load_complex_matrix(path)?.nrows()
        }
        _ => resolve_dim(args.d, args.spin, None)?,
    };
    let u0 = build_unitary(
        args.unitary,
        args.unitary_file.as_ref(),
        dim,
        args.seed,
        &args.top,
    )?;
    let observable = build_observable(args.observable, args.observable_file.as_ref(), dim)?;
    let basis = OperatorBasis::gell_mann(dim)?;

    let (record, truth): (MeasurementRecord, Option<DensityMatrix>) = if file_mode {
        let path = args.record_file.as_ref().expect("file mode");
        let file = File::open(path)
            .map_err(|e| config_error(format!("cannot open {}: {e}", path.display())))?;
        let record = qsr_io::read_record_csv(
            BufReader::new(file),
            args.ensemble_size,
            args.sigma,
            args.seed,
        )?;
        (record, None)
    } else {
        let rho0 = match args.state {
            StateChoice::FubiniStudy => {
                qsr_core::ensembles::random_pure_fubini_study(dim, &mut trial_rng(args.seed, 1))
            }
            StateChoice::HilbertSchmidt => {
                qsr_core::ensembles::random_mixed_hs(dim, &mut trial_rng(args.seed, 1))
            }
            StateChoice::Bures => {
                qsr_core::ensembles::random_mixed_bures(dim, &mut trial_rng(args.seed, 1))
            }
            StateChoice::File => {
                let path = args
                    .state_file
                    .as_ref()
                    .ok_or_else(|| config_error("--state file needs --state-file"))?;
                DensityMatrix::new(load_complex_matrix(path)?)?
            }
        };
        let length = args.record_length.unwrap_or(dim * dim - dim + 1);
        let orbit = OperatorOrbit::build(&u0, &observable, length - 1)?;
        let record = simulate_record(
            &rho0,
            &orbit,
            args.ensemble_size,
            args.sigma,
            &mut trial_rng(args.seed, 2),
            args.seed,
        )?;
        (record, Some(rho0))
    };

    let orbit = OperatorOrbit::build(&u0, &observable, record.len() - 1)?;
    let design = DesignMatrix::from_orbit(&orbit, &basis)?;
    let ml = ml_estimate(&design, &record)?;
    let fit = positivity_fit(&ml, &design.covariance(), &basis, &FitOptions::default())?;
    let fidelity_vs_truth = match &truth {
        Some(rho0) => Some(fidelity(&fit.rho_bar, rho0)?),
        None => None,
    };

    if let Some(path) = &args.rho_out {
        let file = File::create(path)
            .map_err(|e| config_error(format!("cannot create {}: {e}", path.display())))?;
        qsr_io::write_complex_matrix_csv(BufWriter::new(file), fit.rho_bar.matrix())?;
    }
    if let Some(path) = &args.design_out {
        let file = File::create(path)
            .map_err(|e| config_error(format!("cannot create {}: {e}", path.display())))?;
        qsr_io::write_design_matrix_csv(BufWriter::new(file), &design)?;
    }

    let output = ReconstructOutput {
        dim,
        record_length: record.len(),
        covariance_rank: ml.covariance_rank(),
        used_pseudo_inverse: ml.used_pseudo_inverse(),
        cost: fit.cost,
        iterations: fit.iterations,
        converged: fit.converged,
        fidelity: fidelity_vs_truth,
        seed: args.seed,
    };
    write_json(&output, args.output.as_ref())
}

fn experiment_config_from_args(kind: ExperimentCommand) -> Result<ExperimentConfig, CliError> {
    Ok(match kind {
        ExperimentCommand::Pure(args) => {
            let dim = resolve_dim(Some(args.d), args.spin, None).unwrap_or(args.d);
            let mut config = ExperimentConfig::pure(dim);
            apply_batch(&mut config, &args, 100, 10);
            config
        }
        ExperimentCommand::Mixed(args) => {
            let dim = resolve_dim(Some(args.batch.d), args.batch.spin, None).unwrap_or(args.batch.d);
            let measure = match args.measure {
                MeasureChoice::Bures => StateMeasure::Bures,
                MeasureChoice::HilbertSchmidt => StateMeasure::HilbertSchmidt,
            };
            let mut config = ExperimentConfig::mixed(dim, measure);
            apply_batch(&mut config, &args.batch, 200, 20);
            config
        }
        ExperimentCommand::Qkt(args) => {
            let spin = Spin::new(args.spin)?;
            let mut config = ExperimentConfig::qkt();
            config.dim = spin.dimension();
            config.unitary = UnitaryKind::Qkt(args.top.qkt(args.spin));
            apply_top_batch(&mut config, &args);
            config
        }
        ExperimentCommand::Dkt(args) => {
            let spin = Spin::new(args.spin)?;
            let mut config = ExperimentConfig::dkt();
            config.dim = spin.dimension();
            config.unitary = UnitaryKind::Dkt(args.top.dkt(args.spin));
            apply_top_batch(&mut config, &args);
            config
        }
    })
}

fn apply_batch(config: &mut ExperimentConfig, args: &BatchArgs, paper_states: usize, paper_units: usize) {
    if args.paper_scale {
        config.n_states = paper_states;
        config.n_unitaries = paper_units;
    }
    if let Some(n) = args.n_states {
        config.n_states = n;
    }
    if let Some(n) = args.n_unitaries {
        config.n_unitaries = n;
    }
    if let Some(n) = args.record_length {
        config.record_length = n;
    } else if config.experiment == ExperimentKind::Pure {
        config.record_length = config.dim * config.dim - config.dim + 1;
    } else {
        config.record_length = 10 * (config.dim * config.dim - config.dim + 1);
    }
    config.ensemble_size = args.ensemble_size;
    config.sigma = args.sigma;
    config.base_seed = args.seed;
}

fn apply_top_batch(config: &mut ExperimentConfig, args: &TopBatchArgs) {
    if let Some(n) = args.n_states {
        config.n_states = n;
    }
    config.record_length = args
        .record_length
        .unwrap_or(10 * (config.dim * config.dim - config.dim + 1));
    config.ensemble_size = args.ensemble_size;
    config.sigma = args.sigma;
    config.base_seed = args.seed;
}

fn run_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let config: ExperimentConfig = match (&args.config, args.kind) {
        (Some(path), _) => {
            let file = File::open(path)
                .map_err(|e| config_error(format!("cannot open {}: {e}", path.display())))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| config_error(format!("parsing {}: {e}", path.display())))?
        }
        (None, Some(kind)) => experiment_config_from_args(kind)?,
        (None, None) => {
            return Err(config_error(
                "experiment needs a subcommand (pure|mixed|qkt|dkt) or --config",
            ))
        }
    };
    config.validate()?;

    let output_dir = args
        .output_dir
        .or_else(|| std::env::var_os("QSR_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&output_dir)
        .map_err(|e| config_error(format!("cannot create {}: {e}", output_dir.display())))?;
    let stem = args.name.unwrap_or_else(|| {
        let kind = match config.experiment {
            ExperimentKind::Pure => "pure",
            ExperimentKind::Mixed => "mixed",
            ExperimentKind::Qkt => "qkt",
            ExperimentKind::Dkt => "dkt",
        };
        format!("{kind}_d{}_seed{}", config.dim, config.base_seed)
    });

    let started = Instant::now();
    let rows = config.run()?;
    let wall = started.elapsed().as_secs_f64();

    let csv_path = output_dir.join(format!("{stem}.csv"));
    let csv_file = File::create(&csv_path)
        .map_err(|e| config_error(format!("cannot create {}: {e}", csv_path.display())))?;
    qsr_io::write_rows_csv(BufWriter::new(csv_file), &rows)?;

    let metadata = qsr_io::RunMetadata::new(&config, wall, rows.len());
    let meta_path = output_dir.join(format!("{stem}.meta.json"));
    write_json(&metadata, Some(&meta_path))?;

    // Summary lines are advisory; a closed stdout (head, broken pipe) must
    // not turn a finished run into a failure.
    let mut stdout = std::io::stdout().lock();
    let final_n = qsr_core::experiment::final_measurement_count(&rows);
    if config.experiment == ExperimentKind::Qkt || config.experiment == ExperimentKind::Dkt {
        for family in ["generic_pure", "generic_mixed", "parity_pure", "parity_mixed"] {
            if let Some(mean) = mean_fidelity_at(&rows, final_n, Some(family)) {
                let _ = writeln!(stdout, "mean fidelity at n={final_n} [{family}]: {mean:.6}");
            }
        }
    } else if let Some(mean) = mean_fidelity_at(&rows, final_n, None) {
        let _ = writeln!(stdout, "mean fidelity at n={final_n}: {mean:.6}");
    }
    let _ = writeln!(stdout, "wrote {} rows to {}", rows.len(), csv_path.display());
    let _ = writeln!(stdout, "metadata: {}", meta_path.display());
    Ok(())
}
