//! Ordered data-parallel map.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same closure runs sequentially. Results always come back
//! in input order, so reductions done afterwards are bit-for-bit identical
//! whatever the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<O, F>(n: usize, f: F) -> Vec<O>
where
    O: Send,
    F: Fn(usize) -> O + Sync + Send,
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

/// Applies `f` to each element of `out` together with its index.
pub fn fill<O, F>(out: &mut [O], f: F)
where
    O: Send,
    F: Fn(usize, &mut O) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, o)| f(i, o));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(i, o)| f(i, o));
    }
}

/// Runs two closures, concurrently when the pool is available.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
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

/// Sequential sum in index order; paired with [`map`] it gives
/// thread-count independent reductions.
pub fn ordered_sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let w = map(&v, |x| x * 2);
        assert!(w.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn fill_writes_every_slot() {
        let mut v = vec![0.0; 257];
        fill(&mut v, |i, o| *o = i as f64);
        assert_eq!(ordered_sum(&v), 256.0 * 257.0 / 2.0);
    }
}
