//! Deterministic chunked parallelism.
//!
//! Work is cut into fixed-size chunks whose boundaries do not depend on the
//! worker count; per-chunk results come back in chunk order, so any fold
//! over them is bit-identical for 1 or 100 workers.

use std::ops::Range;

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Maps `f` over `0..n` in chunks of `chunk`, on `workers` threads
/// (`0` = rayon default). Results are in chunk order.
pub fn map_chunks<T, F>(n: usize, chunk: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = n.div_ceil(chunk);
    let run = || {
        (0..count)
            .into_par_iter()
            .map(|c| f(c * chunk..((c + 1) * chunk).min(n)))
            .collect::<Vec<T>>()
    };
    if workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(run)
    }
}
