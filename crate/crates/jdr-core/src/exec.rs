//! Data-parallel map helper.
//!
//! With the `parallel` feature the closure runs on the rayon pool; without it
//! the same code path runs sequentially. Results are always returned in input
//! order, so the two builds produce identical output.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(usize, T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items
        .into_par_iter()
        .enumerate()
        .map(|(i, item)| f(i, item))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(usize, T) -> U + Sync + Send,
{
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| f(i, item))
        .collect()
}

/// Sequential variant, kept available in both builds for benchmarking.
pub fn map_indexed_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(usize, T) -> U,
{
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| f(i, item))
        .collect()
}
