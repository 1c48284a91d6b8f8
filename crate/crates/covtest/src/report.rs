//! CSV and JSON output for experiment reports.
//!
//! The CSV schema is fixed: `scenario,n,p,param,psi,power,half_width,B,
//! seed,threshold`, RFC 4180 quoting, floats in shortest round-trip form
//! so every numeric column reparses to the exact bits that produced it.
//! A report written to `<name>.csv` gets a sidecar `<name>.json` holding
//! the config, crate versions, and master seed.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::experiments::{ExperimentConfig, ExperimentReport, HarnessError, ReportRow};

/// Column order of the CSV schema, also written when there are no rows.
pub const CSV_HEADER: [&str; 10] =
    ["scenario", "n", "p", "param", "psi", "power", "half_width", "B", "seed", "threshold"];

fn csv_io_error(e: csv::Error) -> HarnessError {
    HarnessError::Io(io::Error::other(e))
}

/// Renders rows as a CSV document with the fixed header.
pub fn csv_string(rows: &[ReportRow]) -> Result<String, HarnessError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(CSV_HEADER).map_err(csv_io_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_io_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| HarnessError::Io(io::Error::other(e)))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Versions {
    covtest: &'static str,
    #[serde(rename = "covtest-core")]
    covtest_core: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    versions: Versions,
    seed: u64,
}

/// Metadata JSON for a report: config, crate versions, master seed.
pub fn sidecar_json(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let sidecar = Sidecar {
        config,
        versions: Versions {
            covtest: env!("CARGO_PKG_VERSION"),
            covtest_core: covtest_core::VERSION,
        },
        seed: config.seed,
    };
    let mut json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| HarnessError::Io(io::Error::other(e)))?;
    json.push('\n');
    Ok(json)
}

/// Writes `<path>` as CSV and `<path with .json extension>` as metadata.
pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, csv_string(&report.rows)?)?;
    fs::write(path.with_extension("json"), sidecar_json(&report.config)?)?;
    Ok(())
}

/// Writes the report where its config points: to the configured file plus
/// sidecar, or as CSV on standard output.
pub fn emit(report: &ExperimentReport) -> Result<(), HarnessError> {
    match &report.config.out {
        Some(path) => write_report(report, path),
        None => {
            print!("{}", csv_string(&report.rows)?);
            Ok(())
        }
    }
}
