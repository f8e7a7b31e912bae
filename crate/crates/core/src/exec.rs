//! Data-parallel helpers with a sequential fallback.
//!
//! `Exec::Parallel` uses rayon when the `parallel` feature is on and runs
//! sequentially otherwise, so results never depend on the choice.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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
    /// `f` over `items`, in order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// `f` over `range`, in order.
    pub fn map_range<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Folds `range` in contiguous chunks of `chunk` indices and merges the
    /// partial results left to right. With an associative `merge` the
    /// result equals the sequential fold.
    pub fn chunked<A, F, M>(self, range: Range<usize>, chunk: usize, fold: F, merge: M) -> Option<A>
    where
        A: Send,
        F: Fn(Range<usize>) -> A + Sync + Send,
        M: Fn(A, A) -> A,
    {
        let chunk = chunk.max(1);
        let starts: Vec<usize> = range.clone().step_by(chunk).collect();
        let parts = self.map(&starts, |&s| fold(s..(s + chunk).min(range.end)));
        parts.into_iter().reduce(merge)
    }

    /// The first index in `range` for which `f` returns `Some`.
    pub fn find_first<R, F>(self, range: Range<usize>, f: F) -> Option<(usize, R)>
    where
        R: Send,
        F: Fn(usize) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().filter_map(|i| f(i).map(|r| (i, r))).find_first(|_| true)
            }
            _ => range.into_iter().find_map(|i| f(i).map(|r| (i, r))),
        }
    }
}
