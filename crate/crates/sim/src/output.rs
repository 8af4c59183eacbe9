//! Sweep records and their CSV/JSON renderings.
//!
//! CSV is the stable interchange format: fixed column order, '.' decimal
//! separator, LF line endings. Wall time is tracked for reporting but kept
//! out of both files so identical (config, seed) runs are byte-identical
//! regardless of machine load or thread count.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// One aggregated measurement point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub scheme: String,
    pub mu: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits_sent: u64,
    pub beampattern_mse: f64,
    pub mean_iterations: f64,
    #[serde(skip)]
    pub wall_time: f64,
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out =
        String::from("snr_db,scheme,mu,ber,bit_errors,bits_sent,beampattern_mse,mean_iterations\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.snr_db,
            r.scheme,
            r.mu,
            r.ber,
            r.bit_errors,
            r.bits_sent,
            r.beampattern_mse,
            r.mean_iterations
        ));
    }
    out
}

pub fn records_to_json(records: &[SweepRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

/// Two-column table (beampattern scans, analytic curves).
pub fn table_to_csv(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (a, b) in rows {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

/// Write to the path, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
