//! CSV and JSON serialization: experiment rows, measurement records, design
//! matrices and complex matrices.
//!
//! All floating-point fields use 17 significant digits, enough to round-trip
//! any f64 exactly, and rows are written in deterministic order, so repeated
//! runs of the same seeded config produce byte-identical files.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ExperimentRow};
use crate::orbit::{DesignMatrix, MeasurementRecord};
use crate::types::CMat;

/// 17-significant-digit decimal form of an f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_error(context: &str, err: std::io::Error) -> Error {
    Error::InvalidConfig(format!("{context}: {err}"))
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token.trim().parse::<f64>().map_err(|_| {
        Error::InvalidConfig(format!("line {line}: cannot parse '{token}' as a number"))
    })
}

pub const ROW_CSV_HEADER: &str =
    "dim,family,unitary,state,n_measurements,covariance_rank,fidelity,cost,iterations,converged,seed";

/// Experiment rows, one CSV line each, preceded by [`ROW_CSV_HEADER`].
pub fn write_rows_csv<W: Write>(mut w: W, rows: &[ExperimentRow]) -> Result<()> {
    writeln!(w, "{ROW_CSV_HEADER}").map_err(|e| io_error("writing rows", e))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.dim,
            r.family,
            r.unitary_index,
            r.state_index,
            r.n_measurements,
            r.covariance_rank,
            format_f64(r.fidelity),
            format_f64(r.cost),
            r.iterations,
            r.converged,
            r.seed
        )
        .map_err(|e| io_error("writing rows", e))?;
    }
    Ok(())
}

/// Record values one per line under a `value` header; N, σ and the seed
/// travel in the run metadata, not the CSV.
pub fn write_record_csv<W: Write>(mut w: W, record: &MeasurementRecord) -> Result<()> {
    writeln!(w, "value").map_err(|e| io_error("writing record", e))?;
    for v in record.values().iter() {
        writeln!(w, "{}", format_f64(*v)).map_err(|e| io_error("writing record", e))?;
    }
    Ok(())
}

/// Reads a record written by [`write_record_csv`] (header optional).
pub fn read_record_csv<R: BufRead>(
    r: R,
    ensemble_size: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    let mut values = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_error("reading record", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (i == 0 && trimmed.eq_ignore_ascii_case("value")) {
            continue;
        }
        values.push(parse_f64(trimmed, i + 1)?);
    }
    if values.is_empty() {
        return Err(Error::InvalidConfig("record file holds no values".into()));
    }
    Ok(MeasurementRecord::new(
        DVector::from_vec(values),
        ensemble_size,
        noise_sigma,
        seed,
    ))
}

/// Design matrix rows in row-major order, no header.
pub fn write_design_matrix_csv<W: Write>(mut w: W, design: &DesignMatrix) -> Result<()> {
    write_real_matrix(&mut w, design.entries())
}

fn write_real_matrix<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| io_error("writing matrix", e))?;
    }
    Ok(())
}

/// Complex matrix as CSV, row-major, each entry two adjacent columns
/// (real, imaginary).
pub fn write_complex_matrix_csv<W: Write>(mut w: W, m: &CMat) -> Result<()> {
    for i in 0..m.nrows() {
        let mut fields = Vec::with_capacity(2 * m.ncols());
        for j in 0..m.ncols() {
            fields.push(format_f64(m[(i, j)].re));
            fields.push(format_f64(m[(i, j)].im));
        }
        writeln!(w, "{}", fields.join(",")).map_err(|e| io_error("writing matrix", e))?;
    }
    Ok(())
}

/// Reads a complex matrix written by [`write_complex_matrix_csv`]. The
/// matrix must be square and every line must carry the same even number of
/// fields.
pub fn read_complex_matrix_csv<R: BufRead>(r: R) -> Result<CMat> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_error("reading matrix", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !fields.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "line {}: odd field count {} in complex matrix",
                i + 1,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(fields.len() / 2);
        for pair in fields.chunks(2) {
            row.push(C64::new(
                parse_f64(pair[0], i + 1)?,
                parse_f64(pair[1], i + 1)?,
            ));
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidConfig(
            "complex matrix file is empty or not square".into(),
        ));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

/// Sidecar metadata for one experiment run; everything needed to regenerate
/// the CSV exactly.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub library_version: &'static str,
    pub wall_time_seconds: f64,
    pub rows: usize,
    pub parallel: bool,
}

impl RunMetadata {
    pub fn new(config: &ExperimentConfig, wall_time_seconds: f64, rows: usize) -> Self {
        Self {
            config: config.clone(),
            config_hash: config_hash(config),
            library_version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds,
            rows,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// FNV-1a over the canonical JSON of the config; stable across platforms and
/// releases, unlike the std hasher.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in json.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
