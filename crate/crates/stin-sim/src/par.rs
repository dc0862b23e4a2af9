//! Thin parallel-map layer: rayon when the `parallel` feature is on,
//! plain iteration otherwise. Everything the simulator parallelizes over
//! (replications, sweep points) is seed-derived and order-preserving, so
//! both paths produce byte-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order. Runs on the rayon pool when the
/// `parallel` feature is enabled, sequentially otherwise.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential map, independent of feature flags. Exists so the
/// benchmark suite can compare the two execution strategies in one build.
pub fn map_collect_sequential<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
