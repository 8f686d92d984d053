//! Metrics and summary CSVs, the run manifest, and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use dstar_core::simulator::{ExperimentConfig, IterationRecord};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METRICS_HEADER: [&str; 8] = [
    "iter",
    "wait_time",
    "cum_time",
    "loss",
    "accuracy",
    "n_received",
    "n_accepted",
    "updated",
];
pub const SUMMARY_HEADER: [&str; 6] = ["gar", "attack", "status", "final_accuracy", "mean_wait_time", "error"];

/// `printf("%.9g")`: nine significant digits, trailing zeros dropped,
/// exponent form below 1e-5 or from 1e9 up.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::runtime(format!("cannot write in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn metrics_csv(records: &[IterationRecord]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).map_err(CliError::runtime)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            format_g9(r.wait_time),
            format_g9(r.cumulative_time),
            format_g9(r.loss),
            r.accuracy.map(format_g9).unwrap_or_default(),
            r.n_received.to_string(),
            r.n_accepted.to_string(),
            r.updated.to_string(),
        ])
        .map_err(CliError::runtime)?;
    }
    w.into_inner().map_err(CliError::runtime)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub overrides: Vec<String>,
    pub started_at: String,
    pub artifact_version: String,
    /// Seed taken from the environment, if any.
    pub env_seed: Option<String>,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(
        config_path: &Path,
        output_dir: &Path,
        overrides: &[String],
        env_seed: Option<&str>,
        config: &ExperimentConfig,
    ) -> Self {
        RunManifest {
            config_path: config_path.to_path_buf(),
            output_dir: output_dir.to_path_buf(),
            overrides: overrides.to_vec(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            env_seed: env_seed.map(str::to_string),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self).map_err(CliError::runtime)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub gar: String,
    pub attack: String,
    pub outcome: Result<CellStats, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    /// Accuracy at the last eval iteration.
    pub final_accuracy: f64,
    pub mean_wait_time: f64,
}

impl CellStats {
    pub fn from_records(records: &[IterationRecord]) -> Option<CellStats> {
        let final_accuracy = records.iter().rev().find_map(|r| r.accuracy)?;
        let mean_wait_time = records.iter().map(|r| r.wait_time).sum::<f64>() / records.len() as f64;
        Some(CellStats {
            final_accuracy,
            mean_wait_time,
        })
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).map_err(CliError::runtime)?;
    for row in rows {
        let fields = match &row.outcome {
            Ok(s) => [
                "ok".to_string(),
                format_g9(s.final_accuracy),
                format_g9(s.mean_wait_time),
                String::new(),
            ],
            Err(e) => ["error".to_string(), String::new(), String::new(), e.clone()],
        };
        w.write_record([row.gar.as_str(), row.attack.as_str()].into_iter().chain(fields.iter().map(String::as_str)))
            .map_err(CliError::runtime)?;
    }
    w.into_inner().map_err(CliError::runtime)
}
