//! Runtime choice between rayon and plain iteration.
//!
//! Every parallel loop in the crate is row-wise with a sequential inner
//! reduction, so both modes produce bit-identical results.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses rayon when compiled with the `parallel` feature, otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Fill `out` in chunks of `chunk` elements; `f(index, chunk)` receives
    /// the chunk index and the mutable slice.
    pub(crate) fn for_each_chunk_mut<T, F>(self, out: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if chunk == 0 || out.is_empty() {
            return;
        }
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }

    /// Row-wise pass over a row-major `n`-column matrix with one output
    /// slot per row.
    pub(crate) fn for_each_row_with<F>(self, rows: &mut [f64], n: usize, out: &mut [f64], f: F)
    where
        F: Fn(usize, &mut [f64], &mut f64) + Sync + Send,
    {
        if n == 0 {
            return;
        }
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            rows.par_chunks_mut(n)
                .zip(out.par_iter_mut())
                .enumerate()
                .for_each(|(i, (r, o))| f(i, r, o));
            return;
        }
        rows.chunks_mut(n)
            .zip(out.iter_mut())
            .enumerate()
            .for_each(|(i, (r, o))| f(i, r, o));
    }

    /// Ordered map over `0..len`.
    pub(crate) fn map_indices<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }
}
