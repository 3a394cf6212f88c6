//! Data-parallel helpers.
//!
//! Independent work items (ensemble realizations, ladder rungs) map through
//! rayon when the `parallel` feature is on. Results are always collected in
//! index order and reduced sequentially by the callers, so outputs are
//! bit-identical for any worker count, including the sequential fallback.

/// Map `f` over `0..n`, in parallel when available. The output vector is
/// ordered by index.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_indexed_serial(n, f)
}

/// Sequential reference path; kept unconditionally for benchmarks and
/// determinism checks.
pub fn map_indexed_serial<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Run `f` inside a worker pool of the requested size; `None` uses the
/// global default. Without the `parallel` feature the closure just runs on
/// the calling thread.
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}
