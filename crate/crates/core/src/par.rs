//! Deterministic data-parallel reductions.
//!
//! Work is split into fixed-size chunks whose boundaries depend only on the
//! problem size, never on the thread count. Each chunk is reduced
//! sequentially and the partials are summed in chunk order, so the parallel
//! and sequential builds produce bitwise identical results.

use std::cell::Cell;

/// Items per reduction chunk.
pub const CHUNK: usize = 1024;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with every reduction issued from this thread on the sequential path.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let previous = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(previous));
    out
}

/// Whether reductions issued from this thread run on the thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(Cell::get)
}

/// Sum `f(i)` over `0..n` with a chunked, order-stable reduction.
pub fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        let partials: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
        return partials.into_iter().sum();
    }
    (0..chunks).map(partial).collect::<Vec<f64>>().into_iter().sum()
}

/// Fill `out[i] = f(i)` for every index.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        out.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, o)| *o = f(i));
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}
