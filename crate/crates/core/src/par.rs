//! Data-parallel helpers over index ranges.
//!
//! With the `parallel` feature these dispatch to rayon; without it they run
//! the same closures sequentially. Every reducer passed in must be
//! associative and break ties deterministically so both paths agree.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_reduce<T, M, R, I>(range: Range<u64>, identity: I, map: M, reduce: R) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    M: Fn(u64) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(map).reduce(identity, reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(map).fold(identity(), reduce)
    }
}

/// Ordered map over a range.
pub fn map_collect<T, M>(range: Range<u64>, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(map).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(map).collect()
    }
}

/// Ordered map over a slice.
pub fn map_slice<S, T, M>(items: &[S], map: M) -> Vec<T>
where
    S: Sync,
    T: Send,
    M: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(map).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(map).collect()
    }
}

/// First index (in range order) whose result is `Some`.
pub fn find_first<T, F>(range: Range<u64>, f: F) -> Option<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).find_first(|x| x.is_some()).flatten()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).find(|x| x.is_some()).flatten()
    }
}
