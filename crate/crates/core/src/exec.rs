//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on rayon;
//! without it every policy runs sequentially. All helpers return results in
//! input order and reduce floating-point sums in a fixed order, so outputs do
//! not depend on the policy or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this policy actually runs in parallel in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fill `out[i] = f(i)` chunk by chunk.
    pub fn fill<F>(self, out: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_chunks_mut(chunk).enumerate().for_each(|(c, slice)| {
                for (j, o) in slice.iter_mut().enumerate() {
                    *o = f(c * chunk + j);
                }
            });
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// `sum_i f(i)` for `i < n` with a fixed reduction tree.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = |c: usize| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        };
        self.map_range(chunks, partial).iter().sum()
    }
}
