//! Task execution over a worker pool, or sequentially without the
//! `parallel` feature. Results come back in task order either way.

use crate::error::Result;

/// Runs `f` over `tasks` on `threads` workers (`0` picks the core count,
/// `1` runs inline).
pub fn map_tasks<T, R, F>(tasks: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads == 1 || tasks.len() <= 1 {
        return Ok(tasks.iter().map(f).collect());
    }
    parallel_map(tasks, threads, f)
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(tasks: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Input(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(tasks: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads > 1 {
        log::debug!("built without the parallel feature; running {} tasks sequentially", tasks.len());
    }
    Ok(tasks.iter().map(f).collect())
}

/// Whether this build can run tasks concurrently.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
