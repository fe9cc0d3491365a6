//! Data-parallel helpers with a sequential fallback.
//!
//! Stochastic work is split into fixed-size batches; batch `k` always draws from
//! ChaCha stream `k` of the run seed, so results do not depend on the number of
//! workers or on whether the `parallel` feature is enabled.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Routes all helpers through the sequential path at runtime (for benchmarks).
pub fn set_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::Relaxed);
}

#[cfg(feature = "parallel")]
fn sequential() -> bool {
    SEQUENTIAL.load(Ordering::Relaxed)
}

/// Samples per RNG stream.
pub const BATCH: usize = 1024;

/// RNG for batch `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !sequential() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !sequential() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Sum of `f(i)` over `lo..hi` for exact integer counts.
pub fn sum_range_i64<F>(lo: i64, hi: i64, f: F) -> u64
where
    F: Fn(i64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !sequential() {
        use rayon::prelude::*;
        return (lo..hi).into_par_iter().map(f).sum();
    }
    (lo..hi).map(f).sum()
}

/// Runs `n` samples in batches of [`BATCH`]; `f(rng, index)` produces one sample.
pub fn sample_batched<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    let batches = n.div_ceil(BATCH);
    let chunks = map_range(batches, |b| {
        let mut rng = stream_rng(seed, b as u64);
        let lo = b * BATCH;
        let hi = (lo + BATCH).min(n);
        (lo..hi).map(|i| f(&mut rng, i)).collect::<Vec<T>>()
    });
    chunks.into_iter().flatten().collect()
}

/// Sizes the global worker pool; a no-op without the `parallel` feature.
pub fn set_workers(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::Relaxed)
}
