//! Multi-threaded sweep driver.
//!
//! Work units run on a dedicated rayon pool; results are collected in work
//! unit order and reduced by the same code as the sequential sweep, so the
//! output does not depend on the thread count.

use std::sync::atomic::{AtomicUsize, Ordering};

use lightswim_core::sweep::{SweepCell, SweepSpec};
use lightswim_core::ParameterSpace;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum ParallelError {
    #[error(transparent)]
    Core(#[from] lightswim_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Run `spec` on `threads` workers (at least one). `progress` is called with
/// `(done, total)` after each finished trial, from worker threads.
pub fn run_sweep_parallel<F>(
    space: &ParameterSpace,
    spec: &SweepSpec,
    threads: usize,
    progress: F,
) -> Result<Vec<SweepCell>, ParallelError>
where
    F: Fn(usize, usize) + Sync,
{
    spec.validate()?;
    let cells = spec.cells()?;
    let units = spec.work_units(cells.len());
    let total = units.len();
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let results = pool.install(|| {
        units
            .par_iter()
            .map(|&u| {
                let r = spec.run_unit(space, &cells, u);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
                r
            })
            .collect::<Result<Vec<f64>, _>>()
    })?;
    Ok(spec.assemble(&cells, &results)?)
}
