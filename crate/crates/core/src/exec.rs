//! Serial or rayon-backed execution of independent work items.
//!
//! Every parallel map in the crate collects results in input order and any
//! reduction happens afterwards, serially, so results are bit-identical
//! whichever policy is used.

use std::sync::OnceLock;

/// Environment variable capping the worker count; `0` selects serial mode.
pub const THREADS_ENV: &str = "CONTACT1D_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecPolicy {
    Serial,
    /// Data-parallel over the global rayon pool. Falls back to serial when
    /// the crate is built without the `parallel` feature.
    Parallel,
}

impl ExecPolicy {
    /// Policy selected by `CONTACT1D_THREADS` (unset means parallel).
    pub fn from_env() -> Self {
        static POLICY: OnceLock<ExecPolicy> = OnceLock::new();
        *POLICY.get_or_init(|| match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(0) => ExecPolicy::Serial,
                Ok(n) => {
                    init_pool(n);
                    ExecPolicy::Parallel
                }
                Err(_) => {
                    log::warn!("ignoring unparsable {THREADS_ENV}={v}");
                    ExecPolicy::Parallel
                }
            },
            Err(_) => ExecPolicy::Parallel,
        })
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            ExecPolicy::Serial => items.iter().map(f).collect(),
            ExecPolicy::Parallel => par_map(items, f),
        }
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        let idx: Vec<usize> = (0..n).collect();
        self.map(&idx, |&i| f(i))
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn init_pool(n: usize) {
    // A pool may already exist if the host application configured one.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
fn init_pool(_n: usize) {}
