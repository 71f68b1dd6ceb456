//! Study configuration, convergence studies, aggregated bound audits and row output.

pub mod audits;
pub mod classical;
pub mod config;
pub mod quantum;

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use audits::{run_bound_audits, AuditEntry, AuditSummary};
pub use classical::{classical_f_in_norm, empirical_modes, run_classical_study, ClassicalStudy, ModeSet};
pub use config::{AuditConfig, ClassicalConfig, InitialConfig, PotentialConfig, QuantumConfig, RatesConfig, StudyConfig};
pub use quantum::{gauss_hermite_points, run_quantum_study};

use crate::error::Result;

/// Version written in the `format_version` column of study CSVs.
pub const ROW_FORMAT_VERSION: u32 = 1;

/// One measured error against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub format_version: u32,
    pub seed: u64,
    pub study: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub hbar: f64,
    pub j: usize,
    pub t: f64,
    pub measured_error: f64,
    pub bound: f64,
    pub metric_name: String,
    pub mc_stderr: f64,
    pub runtime_ms: u64,
    /// Classical rows whose every mode is dominated by noise, and quantum rows
    /// whose norm maximizer sits on the band ring (lower bound reported).
    pub flagged: bool,
}

impl StudyRow {
    pub fn violates(&self, stderr_multiple: f64) -> bool {
        self.measured_error - stderr_multiple * self.mc_stderr > self.bound
    }
}

pub fn write_rows_csv(rows: &[StudyRow], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows_csv(r: impl Read) -> Result<Vec<StudyRow>> {
    csv::Reader::from_reader(r).deserialize().map(|x| x.map_err(Into::into)).collect()
}

/// Elapsed milliseconds, or 0 when runtimes are not recorded.
pub(crate) fn elapsed_ms(start: Instant, record: bool) -> u64 {
    if record {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (den > 0.0).then(|| num / den)
}
