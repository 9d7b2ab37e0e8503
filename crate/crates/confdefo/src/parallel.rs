//! Order-preserving data-parallel loops.
//!
//! With the `parallel` feature (default) [`map_range`] fans out over rayon;
//! without it the sequential fallback compiles and rayon is not linked at
//! all. Collection preserves index order in both cases, so every caller is
//! bit-deterministic regardless of thread count. [`map_range_seq`] is always
//! sequential and exists so benchmarks can compare the two paths in one
//! binary.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Sequential reference implementation of [`map_range`].
pub fn map_range_seq<U, F>(n: usize, mut f: F) -> Vec<U>
where
    F: FnMut(usize) -> U,
{
    (0..n).map(&mut f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential_order() {
        let a = map_range(1000, |i| (i as f64).sqrt());
        let b = map_range_seq(1000, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }
}
