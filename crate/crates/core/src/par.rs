//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon when the
//! caller asks for parallel execution; without it they always run
//! sequentially. Results are identical either way: reductions use a total
//! order, never arrival order.

/// Runs both closures, concurrently if `parallel`.
pub fn join<A, B, RA, RB>(parallel: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::join(a, b);
    }
    let _ = parallel;
    (a(), b())
}

/// Maps every item and keeps the minimum under `less`. `less` must be a
/// strict total order on the mapped values for the result to be independent
/// of scheduling.
pub fn min_by_key<T, R, F, L>(parallel: bool, items: &[T], map: F, less: L) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
    L: Fn(&R, &R) -> bool + Sync + Send,
{
    let pick = |a: Option<R>, b: Option<R>| match (a, b) {
        (Some(x), Some(y)) => Some(if less(&y, &x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items
            .par_iter()
            .with_min_len(64)
            .map(&map)
            .reduce(|| None, pick);
    }
    let _ = parallel;
    items.iter().map(map).fold(None, pick)
}

/// Maps every item, preserving input order in the output.
pub fn map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// True when this build can run anything in parallel.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}
