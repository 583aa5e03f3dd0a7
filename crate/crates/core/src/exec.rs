//! Deterministic execution of independent work items.
//!
//! Monte Carlo batches (replicas, cover samples, walkers) are mapped over an
//! index range and collected **in index order**; any reduction then runs
//! sequentially over that ordered vector. Results are therefore bit-identical
//! whether the items ran on one thread or many, and independent of scheduling.

/// Maps `f` over `0..n` and returns results in index order. Runs on the rayon
/// pool when the `parallel` feature is enabled, sequentially otherwise.
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Always-sequential variant, kept available so benchmarks can compare the
/// two schedules within a single build.
pub fn map_indexed_sequential<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Whether this build dispatches work to rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Runs `f` on a dedicated pool of `threads` workers when parallelism is
/// compiled in; `None` or a sequential build uses the default schedule.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool construction")
                .install(f),
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
