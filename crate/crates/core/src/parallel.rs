//! Order-preserving data-parallel helpers.
//!
//! With the `parallel` feature these dispatch to rayon; without it they run
//! sequentially. Results are identical either way: outputs keep input order
//! and reductions used by callers are associative and commutative.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_range<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Index of the first item failing `pred`, if any.
#[cfg(feature = "parallel")]
pub fn position_failing<T: Sync>(items: &[T], pred: impl Fn(&T) -> bool + Sync + Send) -> Option<usize> {
    items.par_iter().position_first(|x| !pred(x))
}

#[cfg(not(feature = "parallel"))]
pub fn position_failing<T: Sync>(items: &[T], pred: impl Fn(&T) -> bool + Sync + Send) -> Option<usize> {
    items.iter().position(|x| !pred(x))
}

/// Runs `f`, collecting `Result`s in order and returning the first error.
pub fn try_map<T: Sync, U: Send, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<U, E> + Sync + Send,
) -> Result<Vec<U>, E> {
    map(items, f).into_iter().collect()
}

pub fn try_map_range<U: Send, E: Send>(n: usize, f: impl Fn(usize) -> Result<U, E> + Sync + Send) -> Result<Vec<U>, E> {
    map_range(n, f).into_iter().collect()
}
