//! Replication driver.
//!
//! With the `parallel` feature (on by default) independent replications run
//! on the rayon pool; otherwise they run in order on the calling thread.
//! Results always come back in replication order.

/// Run `f(0) .. f(count - 1)` and collect the results in index order.
pub fn replicate<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        replicate_parallel(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replicate_sequential(count, f)
    }
}

pub fn replicate_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count as u64).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn replicate_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count as u64).into_par_iter().map(f).collect()
}
