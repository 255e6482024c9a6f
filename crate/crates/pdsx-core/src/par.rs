//! Internal switch between rayon and sequential execution. Results keep
//! the input index order in both modes, so the two paths are
//! interchangeable bit for bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Filter-maps over `0..n`, in parallel when asked for and compiled in.
pub(crate) fn filter_map_indices<T: Send>(
    n: u64,
    parallel: bool,
    f: impl Fn(u64) -> Option<T> + Sync + Send,
) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().filter_map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).filter_map(f).collect()
}

/// Maps over a slice, in parallel when asked for and compiled in.
pub(crate) fn map_slice<I: Sync, T: Send>(
    items: &[I],
    parallel: bool,
    f: impl Fn(&I) -> T + Sync + Send,
) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
