//! Data-parallel helpers. With the `parallel` feature these fan out over a
//! rayon pool; without it they run the same closures in order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of workers used when a caller asks for `0` (all available).
pub fn available_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs `f` on a pool of `workers` threads (`0` picks the default pool).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Calls `f(chunk_index, chunk)` for each `chunk`-sized piece of `data` and
/// returns the sum of the results.
pub(crate) fn sum_chunks_mut<T, F>(data: &mut [T], chunk: usize, f: F) -> u64
where
    T: Send,
    F: Fn(usize, &mut [T]) -> u64 + Sync + Send,
{
    if chunk == 0 {
        return 0;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk).enumerate().map(|(i, c)| f(i, c)).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().map(|(i, c)| f(i, c)).sum()
    }
}

pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_sum_visits_everything() {
        let mut v = vec![1u64; 103];
        let total = sum_chunks_mut(&mut v, 10, |i, c| {
            for x in c.iter_mut() {
                *x += i as u64;
            }
            c.len() as u64
        });
        assert_eq!(total, 103);
        assert_eq!(v[102], 11);
    }

    #[test]
    fn pool_sizes() {
        let n = with_workers(2, || map_range(5, |i| i * i));
        assert_eq!(n, vec![0, 1, 4, 9, 16]);
        assert!(available_workers() >= 1);
    }
}
