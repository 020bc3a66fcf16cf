//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over rayon; without
//! it every call runs on the current thread. Results are always returned in
//! input order, so outputs never depend on the worker count.

use rand::Rng;

use crate::rng::{RngState, StreamRng};

/// Draws per Monte Carlo batch. Each batch owns one RNG stream, which keeps
/// the result independent of how rayon splits the work.
pub const MC_BATCH: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Global rayon pool.
    #[default]
    Parallel,
    /// Dedicated pool with this many workers.
    Threads(usize),
}

impl Parallelism {
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Order-preserving map over `0..len`.
pub fn map_indexed<R, F>(len: usize, par: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match par {
            Parallelism::Sequential => (0..len).map(f).collect(),
            Parallelism::Parallel => (0..len).into_par_iter().map(f).collect(),
            Parallelism::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .expect("failed to build rayon pool");
                pool.install(|| (0..len).into_par_iter().map(&f).collect())
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = par;
        (0..len).map(f).collect()
    }
}

/// Runs `draws` independent evaluations of `f`, batch `b` drawing from
/// stream `(seed, b)`. Identical output for every [`Parallelism`].
pub fn monte_carlo<T, F>(draws: usize, seed: u64, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync + Send,
{
    let batches = draws.div_ceil(MC_BATCH);
    let chunks = map_indexed(batches, par, |b| {
        let mut rng = RngState::new(seed, b as u64).rng();
        let len = MC_BATCH.min(draws - b * MC_BATCH);
        (0..len).map(|_| f(&mut rng)).collect::<Vec<T>>()
    });
    chunks.into_iter().flatten().collect()
}

/// Standard normal via `rand_distr`, kept in one place so every sampler
/// consumes the stream identically.
#[inline]
pub(crate) fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_is_thread_count_invariant() {
        let f = |r: &mut StreamRng| std_normal(r);
        let a = monte_carlo(5000, 11, Parallelism::Sequential, f);
        let b = monte_carlo(5000, 11, Parallelism::Parallel, f);
        let c = monte_carlo(5000, 11, Parallelism::Threads(3), f);
        assert_eq!(a.len(), 5000);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.iter().zip(&c).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn map_indexed_keeps_order() {
        let v = map_indexed(100, Parallelism::Parallel, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
