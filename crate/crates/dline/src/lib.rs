//! File formats, the dichotomy scan and the command-line front end for
//! [`dline_core`].

pub mod cli;
pub mod formats;
pub mod scan;

/// Sizes the global worker pool from `DL_THREADS` when it is set. The worker
/// count never changes results.
pub fn init_threads() {
    if let Some(n) = std::env::var("DL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
