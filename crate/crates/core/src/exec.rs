//! Sequential / parallel execution switch for the data-parallel loops.

/// How an embarrassingly parallel loop should be run.
///
/// Results never depend on the choice: every parallel reduction is merged
/// by index. Without the `parallel` feature, [`Execution::Parallel`]
/// silently runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..len`, returning results in index order.
pub(crate) fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Sorts in place, unstable, using the rayon pool when allowed.
pub(crate) fn sort_unstable<T: Ord + Send>(exec: Execution, data: &mut [T]) {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        data.par_sort_unstable();
        return;
    }
    let _ = exec;
    data.sort_unstable();
}
