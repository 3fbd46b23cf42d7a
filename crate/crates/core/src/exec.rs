//! Execution strategy for the data-parallel loops of the engine.
//!
//! With the `parallel` feature (default) the work is spread over the rayon
//! global pool; without it every strategy runs sequentially. Output order is
//! the input index order in both cases.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `(start..end).map(f).collect()`, possibly in parallel.
    pub(crate) fn map_range<T, F>(self, start: usize, end: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (start..end).into_par_iter().map(f).collect()
            }
            _ => (start..end).map(f).collect(),
        }
    }
}
