//! Deterministic worker-thread execution of independent replications.
//!
//! Work items are dispatched by an atomic counter and results land in their
//! index slot, so the aggregate is identical for any worker count; each
//! replication's randomness comes from its own derived stream.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use npeb_core::sim::{
    aggregate_rate, aggregate_replications, rate_replication, run_replication, ExperimentConfig,
    RateExperimentConfig, RateRow, ResultTable,
};

use crate::{AppError, AppResult};

/// Map `f` over `0..count` using the given number of worker threads,
/// collecting results in index order.
pub fn indexed_parallel<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(count.max(1));
    if threads <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = f(i);
                *slots[i].lock().expect("result slot poisoned") = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("every index was dispatched")
        })
        .collect()
}

/// Run one scenario's replications across worker threads and aggregate in
/// replication order.
pub fn run_experiment_parallel(cfg: &ExperimentConfig, threads: usize) -> AppResult<ResultTable> {
    cfg.validate().map_err(AppError::from)?;
    let outcomes = indexed_parallel(cfg.reps, threads, |rep| run_replication(cfg, rep));
    Ok(aggregate_replications(cfg, &outcomes))
}

/// Run the Hellinger rate check across worker threads.
pub fn rate_experiment_parallel(
    cfg: &RateExperimentConfig,
    threads: usize,
) -> AppResult<Vec<RateRow>> {
    cfg.validate().map_err(AppError::from)?;
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let draws = indexed_parallel(cfg.reps, threads, |rep| rate_replication(cfg, n, rep));
        rows.push(aggregate_rate(n, &draws));
    }
    Ok(rows)
}
