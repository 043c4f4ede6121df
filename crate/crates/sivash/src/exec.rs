//! Data-parallel map helpers.
//!
//! Parallelism in this crate lives at the granularity the algorithms allow:
//! ensembles of trajectories, probe pairs, graph sample batches, lattice
//! count partitions. A single trajectory is always sequential. With the
//! `parallel` feature (default) [`map_collect`] fans out over rayon; without
//! it the crate falls back to the sequential path. [`map_collect_seq`] is
//! always sequential so benchmarks can compare both in one build.
//!
//! Output order equals input order in both paths, so results are
//! deterministic regardless of the feature or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
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

/// Always-sequential map, the comparison baseline for the bench suite.
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Map `f` over indices `0..n`.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    map_collect((0..n).collect(), f)
}
