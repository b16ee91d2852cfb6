//! Experiment runner for `inls-core`: scenario documents, CSV/JSON output,
//! sweeps and the `inls` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::{LabError, LabResult};
pub use run::{run_scenario, Report};
pub use scenario::{Kind, Scenario, ScenarioDoc};

/// Environment variable capping the worker threads of sweeps.
pub const THREADS_ENV: &str = "INLS_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> LabResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| LabError::Invalid(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::Invalid(format!("thread pool: {e}")))
}
