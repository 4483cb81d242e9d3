//! Experiment runner behind the `invbq` binary.

pub mod config;
pub mod error;
pub mod results;
pub mod summary;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use invbq::quadrature::QuadOptions;
use invbq::{reference_integral, TestFunctionDescriptor};

pub use config::RunConfig;
pub use error::{CliError, Result};

/// Runs every (method, seed) cell of a config and writes the result file.
pub fn run(config_path: &Path, seed_offset: u64) -> Result<PathBuf> {
    let config = RunConfig::load(config_path)?.with_seed_offset(seed_offset);
    let grid = config.grid()?;
    log::info!(
        "{}: {} methods x {} seeds, N = {}..{}, reference {:.16e}",
        config.function,
        grid.methods.len(),
        grid.seeds.len(),
        grid.n_initial,
        grid.n_total,
        grid.reference
    );
    let rows = grid.run()?;
    results::write_csv(&config.output, &rows)?;
    log::info!("wrote {} rows to {}", rows.len(), config.output.display());
    Ok(config.output)
}

/// Expands glob patterns into a sorted, de-duplicated file list.
pub fn expand_patterns(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut files = BTreeSet::new();
    for p in patterns {
        let paths =
            glob::glob(p).map_err(|e| CliError::Usage(format!("bad pattern '{p}': {e}")))?;
        for entry in paths {
            let path = entry.map_err(|e| CliError::io(e.path().to_path_buf(), e.into()))?;
            files.insert(path);
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage(format!(
            "no result files match {patterns:?}"
        )));
    }
    Ok(files.into_iter().collect())
}

/// Reads result files and writes the across-seed summary.
pub fn summarize_files(files: &[PathBuf], output: &Path) -> Result<usize> {
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for f in files {
        for r in results::read_csv(f)? {
            let key = (r.function.clone(), r.method, r.measure.clone(), r.seed, r.n);
            if !seen.insert(key) {
                return Err(CliError::format(
                    f,
                    format!(
                        "duplicate row for {} / {} / {} seed {} N {}",
                        r.function, r.method, r.measure, r.seed, r.n
                    ),
                ));
            }
            rows.push(r);
        }
    }
    let summary = summary::summarize(&rows);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(output, summary::to_csv(&summary)).map_err(|e| CliError::io(output, e))?;
    Ok(summary.len())
}

/// Reference integral of a named test function, with optional parameter
/// overrides given as `name=value`.
pub fn oracle(function: &str, measure: &str, params: &[String], rel_tol: f64) -> Result<f64> {
    let usage = |e: invbq::Error| CliError::Usage(e.to_string());
    let mut descriptor = TestFunctionDescriptor::by_name(function).map_err(usage)?;
    for p in params {
        let (k, v) = p
            .split_once('=')
            .and_then(|(k, v)| Some((k.trim(), v.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| CliError::Usage(format!("expected name=value, got '{p}'")))?;
        descriptor = descriptor.with_parameter(k, v).map_err(usage)?;
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--rel-tol must be positive, got {rel_tol}"
        )));
    }
    let measure = config::parse_measure(measure, descriptor.dim, &descriptor.default_domain)?;
    reference_integral(&descriptor, &measure, &QuadOptions::with_rel_tol(rel_tol))
        .map_err(|e| CliError::Oracle(e.to_string()))
}
