//! Execution policy for the data-parallel loops of the crate.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] dispatches to
//! rayon; without it every policy runs sequentially. Results never depend on
//! the policy: each parallel task writes a disjoint, index-addressed output
//! and no reduction reorders floating point sums.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether this policy will actually run on the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluates `f(0..n)` and returns results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Calls `f(chunk_index, chunk)` on consecutive `chunk_len`-sized pieces of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        assert!(chunk_len > 0);
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            data.par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = Exec::Sequential.map_indexed(1000, f);
        let b = Exec::Parallel.map_indexed(1000, f);
        assert_eq!(a, b);

        let mut x = vec![1.0; 100];
        let mut y = x.clone();
        Exec::Sequential.for_each_chunk_mut(&mut x, 7, |i, c| c.iter_mut().for_each(|v| *v += i as f64));
        Exec::Parallel.for_each_chunk_mut(&mut y, 7, |i, c| c.iter_mut().for_each(|v| *v += i as f64));
        assert_eq!(x, y);
    }
}
