//! Experiment runner around `tlsim-core`: TOML configs, CSV tables with a
//! manifest, a thread pool for sweeps and a small SVG plotter.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;

use std::fs;
use std::path::PathBuf;

use tlsim_core::Error;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::Estimate;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit code: 1 for bad input or environment, 2 for numerical
    /// checks that did not pass, 3 for dimension-cap violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(Error::Dimension { .. }) => 3,
            LabError::Core(
                Error::Truncation { .. }
                | Error::ToleranceNotMet(_)
                | Error::NotResonant { .. }
                | Error::NotHermitian { .. }
                | Error::GridTooSmall(_)
                | Error::Underresolved(_)
                | Error::NoFringe
                | Error::Undersampled { .. },
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Checks `cfg` without running it.
pub fn validate(cfg: &ExperimentConfig) -> Result<Estimate, LabError> {
    experiments::estimate(cfg)
}

/// Runs the configured experiment and writes its tables, optional plots and
/// `manifest.toml` into `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, LabError> {
    experiments::estimate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let cache = cache::EigenCache::new();
    let outcome = experiments::run(&experiments::Context { cfg, pool: &pool, cache: &cache })?;

    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let mut entries = Vec::new();
    let mut files = Vec::new();
    for table in &outcome.tables {
        entries.push(output::write_table(&dir, table)?);
        files.push(dir.join(table.file));
    }
    if cfg.plots {
        for (name, svg) in plot::plots_for(cfg.experiment, &outcome.tables) {
            let path = dir.join(name);
            fs::write(&path, svg)?;
            files.push(path);
        }
    }
    let manifest = output::Manifest {
        experiment: cfg.experiment.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        notes: outcome.notes.clone(),
        files: entries,
        parameters: cfg,
    };
    files.push(output::write_manifest(&dir, &manifest)?);
    Ok(RunReport { output_dir: dir, files, notes: outcome.notes })
}
