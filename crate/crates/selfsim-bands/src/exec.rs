//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) the inner Monte Carlo and scan
//! loops run on rayon; without it they fall back to plain sequential loops.
//! Results are always collected in index order, so output is identical
//! regardless of feature flags or worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n` and collect results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n` and collect results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Run `body` inside a pool with the requested worker count.
///
/// `workers == 0` keeps the default pool size. Without the `parallel`
/// feature the body simply runs on the current thread.
#[cfg(feature = "parallel")]
pub fn with_workers<R, F>(workers: usize, body: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if workers == 0 {
        return body();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(body)
}

/// Run `body` inside a pool with the requested worker count.
#[cfg(not(feature = "parallel"))]
pub fn with_workers<R, F>(_workers: usize, body: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    body()
}
