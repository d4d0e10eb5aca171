//! Sequential and data-parallel execution of index-range scans.
//!
//! All helpers return results in index order, so output never depends on
//! the worker count. Without the `parallel` feature, [`Execution::Parallel`]
//! runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `f(i)` for the smallest `i` in `0..n` that yields `Some`.
pub fn find_map_first<T, F>(exec: Execution, n: usize, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().find_map_first(f);
    }
    let _ = exec;
    (0..n).find_map(f)
}

/// `[f(0), ..., f(n-1)]`.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_range`] but stops early: results are produced in blocks and
/// collection ends once `enough` items have been gathered (the final block is
/// kept whole, callers truncate).
pub fn collect_until<T, F>(exec: Execution, n: usize, enough: usize, block: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    let block = block.max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < n && out.len() < enough {
        let end = (start + block).min(n);
        let chunk = map_range(exec, end - start, |i| f(start + i));
        for items in chunk {
            out.extend(items);
        }
        start = end;
    }
    out
}
