//! Experiment orchestration for the measured relative entropy lab: a
//! config format, report writers, and the command implementations
//! behind the CLI.

pub mod config;
pub mod experiments;
pub mod report;

/// Resolve the worker-pool size: explicit flag, then the
/// `MRE_LAB_THREADS` environment variable, then the rayon default.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("MRE_LAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or_else(rayon::current_num_threads)
}

/// Install the global worker pool; later calls are ignored by rayon.
pub fn init_threads(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}
