//! Command-line sweeps over the Trotterized p-spin model.
//!
//! Each mode evaluates a grid of independent cells on a fixed-size worker
//! pool and writes a CSV or JSON table whose bytes depend only on the
//! configuration.

pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use std::path::PathBuf;

pub use config::{Cli, Grid, Mode, Overrides, SweepConfig};
pub use error::CliError;

use output::{emit, to_json_string, CsvTable};

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn check_budget(failed: usize, total: usize) -> Result<(), CliError> {
    if failed * 100 > total {
        return Err(CliError::FailureBudget { failed, total });
    }
    Ok(())
}

/// Companion JSON path of an OTOC run: `--aux-out`, else the CSV path with
/// a `.json` extension.
pub fn otoc_aux_path(config: &SweepConfig) -> Option<PathBuf> {
    config.aux_out.clone().or_else(|| config.out.as_ref().map(|p| p.with_extension("json")))
}

/// Runs the configured sweep and writes its outputs.
pub fn execute(config: &SweepConfig) -> Result<(), CliError> {
    let out = config.out.as_deref();
    match config.mode {
        Mode::Heatmap => {
            let result = with_workers(config.workers, || sweep::run_heatmap(config))??;
            emit(out, |w| result.write_csv(w))?;
            check_budget(result.failed, result.rows.len())
        }
        Mode::ErrorCurve => {
            let result = with_workers(config.workers, || sweep::run_error_curve(config))??;
            emit(out, |w| result.write_csv(w))?;
            check_budget(result.failed, result.rows.len())
        }
        Mode::PhasePortrait => {
            let result = with_workers(config.workers, || sweep::run_phase_portrait(config))??;
            Ok(emit(out, |w| result.write_csv(w))?)
        }
        Mode::Otoc => {
            let result = with_workers(config.workers, || sweep::run_otoc(config))??;
            emit(out, |w| result.write_csv(w))?;
            if let Some(aux) = otoc_aux_path(config) {
                emit(Some(&aux), |w| w.write_all(to_json_string(&result.report).as_bytes()))?;
            }
            check_budget(result.failed, result.series.len())
        }
        Mode::Instabilities => {
            let records = sweep::list_instabilities(config)?;
            Ok(emit(out, |w| w.write_all(to_json_string(&records).as_bytes()))?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_budget_is_one_percent() {
        assert!(check_budget(0, 10).is_ok());
        assert!(check_budget(1, 100).is_ok());
        let err = check_budget(2, 100).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(check_budget(1, 99).is_err());
    }
}
