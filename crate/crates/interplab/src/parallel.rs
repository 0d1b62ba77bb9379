//! Thin shims over rayon so the crate compiles with or without the
//! `parallel` feature. Results are collected in input order, so callers
//! see identical output regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Always-sequential twin of [`map_indexed`], kept for benchmark baselines.
pub fn map_indexed_seq<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Configure the global worker pool. A no-op in sequential builds; calling
/// it twice is also a no-op (the first pool wins).
#[cfg(feature = "parallel")]
pub fn init_thread_pool(num_threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(num_threads)
        .build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn init_thread_pool(_num_threads: usize) {}
