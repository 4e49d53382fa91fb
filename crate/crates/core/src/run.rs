//! A configured run written to disk: ledger CSV, diagnostics JSON and
//! optional FLD1 snapshots.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::Result;
use crate::solver::{diagnostics, run_observed, DiagnosticsReport, EnergyLedger, History};
use crate::spectral::snapshot::save_fld1;

pub const LEDGER_FILE: &str = "ledger.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

#[derive(Debug)]
pub struct SolveOutcome {
    pub history: History,
    pub ledger: EnergyLedger,
    pub report: DiagnosticsReport,
    pub snapshots: Vec<PathBuf>,
}

pub fn snapshot_name(field: &str, k: usize) -> String {
    format!("{field}_{k:05}.fld")
}

/// Run `config` and write its artifacts into `out`.
pub fn solve_to_dir(config: &RunConfig, out: &Path) -> Result<SolveOutcome> {
    let (cfg, u, p) = config.prepare()?;
    fs::create_dir_all(out)?;
    let every = config.snapshot_every;
    let mut snapshots = Vec::new();
    let (history, ledger) = run_observed(&cfg, u, p, |k, u, p| {
        if every > 0 && k.is_multiple_of(every) {
            let t = cfg.time.time(k);
            for (name, field) in [("u", u), ("p", p)] {
                let path = out.join(snapshot_name(name, k));
                save_fld1(&path, field, t)?;
                snapshots.push(path);
            }
        }
        Ok(())
    })?;
    ledger.write_csv(BufWriter::new(File::create(out.join(LEDGER_FILE))?))?;
    let report = diagnostics(&history, &ledger, &cfg)?;
    fs::write(out.join(DIAGNOSTICS_FILE), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(SolveOutcome { history, ledger, report, snapshots })
}
