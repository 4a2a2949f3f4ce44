//! Ordered data-parallel maps.
//!
//! Every sweep in the crate goes through [`map_ordered`] / [`try_map_ordered`].
//! Results are always returned in input order and any reduction happens
//! afterwards on the caller's side, so output does not depend on the number
//! of worker threads. Without the `parallel` feature both modes run on the
//! calling thread.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Like [`map_ordered`], returning the first error in input order.
pub fn try_map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map_ordered(exec, items, f).into_iter().collect()
}

/// Runs `f` on a pool of `workers` threads (`None`: the global pool).
///
/// `Some(1)` hands `f` [`Execution::Sequential`]. Without the `parallel`
/// feature `f` always runs sequentially on the calling thread.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    if workers == Some(0) {
        return Err(crate::Error::InvalidParameter(
            "worker count must be >= 1".into(),
        ));
    }
    if workers == Some(1) || !cfg!(feature = "parallel") {
        return Ok(f(Execution::Sequential));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| crate::Error::InvalidParameter(format!("thread pool: {e}")))?;
        return Ok(pool.install(|| f(Execution::Parallel)));
    }
    Ok(f(Execution::Parallel))
}
