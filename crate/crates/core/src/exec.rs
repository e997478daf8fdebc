//! Pluggable work distribution.
//!
//! Every parallelisable loop in the crate (z points of a series, ensemble
//! realizations, pump positions) goes through [`Executor::map_indexed`].
//! Implementations may run the closure on any number of threads but must
//! return results in index order, so all reductions downstream happen in a
//! fixed order and results never depend on the worker count.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
