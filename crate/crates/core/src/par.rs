//! Index-parallel map used for Monte Carlo replicates.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it everything runs on the calling thread. Output order is the
//! index order in both cases, so results are identical either way.

/// Evaluates `f(0), .., f(n - 1)` on the current thread.
pub fn map_indices_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Evaluates `f(0), .., f(n - 1)` on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_indices_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Dispatches to the parallel or sequential map depending on the build.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indices_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indices_seq(n, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_index_order() {
        let v = map_indices(100, |i| i * i);
        assert_eq!(v, map_indices_seq(100, |i| i * i));
        assert_eq!(v[9], 81);
    }
}
