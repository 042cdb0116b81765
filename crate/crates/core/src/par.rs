//! Per-source fan-out. Results come back indexed by source so callers can
//! accumulate in ascending source order regardless of scheduling.

#[cfg(feature = "parallel")]
pub(crate) fn map_sources<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_sources<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
