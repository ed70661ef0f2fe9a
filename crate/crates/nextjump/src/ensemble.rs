//! Parallel photon-record ensembles.
//!
//! Record `i` always draws from stream `i` of the master seed and results
//! are collected in index order, so the output does not depend on how many
//! threads ran it.

use rayon::prelude::*;

use nextjump_core::trajectories::{PhotonRecord, RecordSimulator};

use crate::CliError;

pub fn run_records(
    sim: &RecordSimulator,
    n_traj: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<PhotonRecord>, CliError> {
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| sim.record(horizon, seed, i))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

/// Runs `f` on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
