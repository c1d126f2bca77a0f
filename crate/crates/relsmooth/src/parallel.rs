//! Replicate execution: every replicate owns a deterministic rng stream
//! derived from `(base_seed, replicate index)`, so results are identical
//! whether the batch runs on the rayon pool (`parallel` feature, default) or
//! sequentially.

use rand_chacha::ChaCha8Rng;

use crate::sampling::stream_rng;

/// Runs `job(replicate, rng)` for each replicate index, in parallel when the
/// `parallel` feature is enabled. Results come back ordered by replicate.
pub fn run_replicates<T, F>(base_seed: u64, replicates: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(base_seed, r as u64);
                job(r, &mut rng)
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_replicates_seq(base_seed, replicates, job)
    }
}

/// Always-sequential variant, the baseline the benchmark suite compares
/// against.
pub fn run_replicates_seq<T, F>(base_seed: u64, replicates: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..replicates)
        .map(|r| {
            let mut rng = stream_rng(base_seed, r as u64);
            job(r, &mut rng)
        })
        .collect()
}

/// Runs `f` under a worker-count limit (`0` keeps the default pool size).
/// Without the `parallel` feature the limit is moot and `f` runs directly.
pub fn with_worker_limit<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("worker pool")
                .install(f)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
