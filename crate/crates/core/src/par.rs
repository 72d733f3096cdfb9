//! Data-parallel helpers. With the `parallel` feature these run on rayon's
//! pool; without it they are plain sequential loops with the same results.

use std::ops::Range;

/// Whether this build runs the helpers on a thread pool.
pub const ENABLED: bool = cfg!(feature = "parallel");

/// Chooses between the pool and a sequential loop at run time. `Parallel`
/// degrades to `Sequential` when the feature is off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    fn pooled(self) -> bool {
        ENABLED && self == Exec::Parallel
    }
}

/// `f` applied to every index, results in index order.
pub fn map_range<R, F>(range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_range_with(Exec::Parallel, range, f)
}

pub fn map_range_with<R, F>(exec: Exec, range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.pooled() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec.pooled();
    range.map(f).collect()
}

/// First `Some` in index order.
pub fn find_map_first<R, F>(range: Range<usize>, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if range.len() > 1 {
            return range.into_par_iter().find_map_first(f);
        }
    }
    range.into_iter().find_map(f)
}

/// Caps the global pool at `threads` workers. Only the first call has effect.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
