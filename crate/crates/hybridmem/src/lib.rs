//! Scenario runner for `hybridmem-core`: INI configuration in, CSV and
//! metadata out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;
pub mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{RawConfig, Settings};
pub use error::{CliError, Result};
pub use scenario::{RunOutput, Scenario};

/// Where a finished run was written.
#[derive(Clone, Debug)]
pub struct Written {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub output: RunOutput,
}

/// Resolves the configuration, runs `scenario` and writes its files into
/// `out_dir`. Files are written even when a hygiene check fails; the failure
/// is then returned as [`CliError::Breach`].
pub fn execute(scenario: Scenario, config: Option<&Path>, out_dir: &Path, threads: Option<usize>) -> Result<Written> {
    let raw = match config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    let settings = Settings::resolve(scenario, &raw)?;
    let pool = sweep::pool(threads)?;
    let start = Instant::now();
    let mut output = scenario::run(scenario, &settings, &pool)?;
    output
        .metadata
        .set("wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    let (csv, meta) = output::write_run(out_dir, &settings.output_name, &output.table, &output.metadata)?;
    log::info!("wrote {} and {}", csv.display(), meta.display());
    if let Some(first) = output.failures.first() {
        for f in &output.failures {
            log::error!("{}: {}", f.cell, f.message);
        }
        return Err(CliError::Breach {
            cell: first.cell.clone(),
            message: first.message.clone(),
        });
    }
    Ok(Written { csv, meta, output })
}
