//! Data-parallel execution of independent index ranges.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs on the global
//! rayon pool; without it every mode runs sequentially. Results are always
//! returned in index order, so output never depends on the mode.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually spreads work across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `f` applied to every index, in index order.
    pub fn map_range<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Sum of `f` over every index.
    pub fn sum_range<F>(self, range: Range<usize>, f: F) -> u64
    where
        F: Fn(usize) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().map(f).sum();
        }
        range.map(f).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i * i) as u64 % 97;
        let seq = Execution::Sequential.map_range(0..10_000, f);
        let par = Execution::Parallel.map_range(0..10_000, f);
        assert_eq!(seq, par);
        assert_eq!(
            Execution::Sequential.sum_range(0..10_000, f),
            Execution::Parallel.sum_range(0..10_000, f)
        );
    }
}
