use std::path::{Path, PathBuf};

use dstar_core::aggregation::Gar;
use dstar_core::simulator::{probe_assumptions, run_experiment, AttackName, ExperimentConfig, ProbeReport};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::output::{
    metrics_csv, summary_csv, write_atomic, CellStats, RunManifest, SummaryRow, MANIFEST_FILE, METRICS_FILE,
    SUMMARY_FILE,
};

/// Where a configuration came from, recorded in every manifest.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub config_path: PathBuf,
    pub overrides: Vec<String>,
    pub env_seed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub final_loss: f64,
    pub final_accuracy: Option<f64>,
    pub mean_wait_time: f64,
    pub iterations: usize,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Runs one experiment and writes `metrics.csv` and `manifest.json` into `out`.
pub fn cmd_run(config: &ExperimentConfig, provenance: &Provenance, out: &Path) -> CliResult<RunSummary> {
    config.validate()?;
    create_dir(out)?;
    let manifest = RunManifest::new(
        &provenance.config_path,
        out,
        &provenance.overrides,
        provenance.env_seed.as_deref(),
        config,
    );
    let records = run_experiment(config)?;
    write_atomic(&out.join(METRICS_FILE), &metrics_csv(&records)?)?;
    write_atomic(&out.join(MANIFEST_FILE), &manifest.to_json()?)?;
    let last = records.last().ok_or_else(|| CliError::runtime("run produced no iterations"))?;
    Ok(RunSummary {
        final_loss: last.loss,
        final_accuracy: CellStats::from_records(&records).map(|s| s.final_accuracy),
        mean_wait_time: records.iter().map(|r| r.wait_time).sum::<f64>() / records.len() as f64,
        iterations: records.len(),
    })
}

/// Directory of one sweep cell, relative to the sweep output.
pub fn cell_dir(gar: Gar, attack: AttackName) -> String {
    format!("{}_{}", gar.name(), attack.name())
}

/// Runs every `gar × attack` cell (in parallel) with the base seed and data,
/// one subdirectory per cell, then writes `summary.csv` in list order. A
/// failing cell is recorded in the summary and does not stop the others.
pub fn cmd_sweep(
    base: &ExperimentConfig,
    provenance: &Provenance,
    gars: &[Gar],
    attacks: &[AttackName],
    out: &Path,
) -> CliResult<Vec<SummaryRow>> {
    if gars.is_empty() || attacks.is_empty() {
        return Err(CliError::config("gars", "sweep needs at least one gar and one attack"));
    }
    create_dir(out)?;
    let cells: Vec<(Gar, AttackName)> = gars
        .iter()
        .flat_map(|&g| attacks.iter().map(move |&a| (g, a)))
        .collect();
    let rows: Vec<SummaryRow> = cells
        .par_iter()
        .map(|&(gar, attack)| {
            let mut cfg = base.clone();
            cfg.gar = gar;
            cfg.attack = attack;
            let mut overrides = provenance.overrides.clone();
            overrides.extend([format!("gar={}", gar.name()), format!("attack={}", attack.name())]);
            let cell = Provenance {
                overrides,
                ..provenance.clone()
            };
            let outcome = cmd_run(&cfg, &cell, &out.join(cell_dir(gar, attack))).and_then(|s| {
                Ok(CellStats {
                    final_accuracy: s
                        .final_accuracy
                        .ok_or_else(|| CliError::runtime("no eval iteration recorded"))?,
                    mean_wait_time: s.mean_wait_time,
                })
            });
            if let Err(e) = &outcome {
                log::warn!("cell {}/{} failed: {e}", gar.name(), attack.name());
            }
            SummaryRow {
                gar: gar.name().to_string(),
                attack: attack.name().to_string(),
                outcome: outcome.map_err(|e| e.to_string()),
            }
        })
        .collect();
    write_atomic(&out.join(SUMMARY_FILE), &summary_csv(&rows)?)?;
    Ok(rows)
}

pub fn cmd_probe(config: &ExperimentConfig) -> CliResult<ProbeReport> {
    Ok(probe_assumptions(config)?)
}

pub fn format_probe(report: &ProbeReport) -> String {
    let e = &report.estimates;
    let mut out = format!(
        "N = {}, f = {}, k = {}\n\
         d*sigma^2 (mean squared deviation) = {:.6e}\n\
         V  (max squared gradient norm)       = {:.6e}\n\
         V' (min squared validation norm)     = {:.6e}\n\
         L  (empirical Lipschitz constant)    = {:.6e}\n\
         |grad F| at initial parameters       = {:.6e}\n",
        report.n, report.f, report.k, e.d_sigma2, e.v_hat, e.vprime_hat, e.l_hat, report.grad_norm
    );
    match (report.alpha, &report.violation) {
        (Some(alpha), _) => out.push_str(&format!(
            "resilience angle alpha = {alpha:.6} rad ({:.3} deg), sin(alpha) = {:.6}\n",
            alpha.to_degrees(),
            alpha.sin()
        )),
        (None, Some(why)) => out.push_str(&format!("resilience bound does not hold: {why}\n")),
        (None, None) => {}
    }
    out
}

pub fn parse_list<T: std::str::FromStr<Err = dstar_core::Error>>(raw: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(CliError::from))
        .collect()
}
