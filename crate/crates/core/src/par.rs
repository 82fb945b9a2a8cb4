//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) `Parallelism::Rayon` fans work out
//! over the rayon pool. Without it every mode runs sequentially. Results never
//! depend on the schedule: maps preserve input order and searches return the
//! first hit in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Rayon,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }
}

/// `(0..len).map(f).collect()`, in index order.
pub fn map_range<R, F>(par: Parallelism, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..len).map(f).collect()
}

/// Maps a slice, preserving order.
pub fn map_slice<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// The first `Some` produced by `f` in index order.
pub fn find_first_range<R, F>(par: Parallelism, len: usize, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return (0..len).into_par_iter().filter_map(f).find_first(|_| true);
    }
    let _ = par;
    (0..len).find_map(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        for par in [Parallelism::Sequential, Parallelism::Rayon] {
            let v = map_range(par, 1000, |i| i * i);
            assert_eq!(v[999], 999 * 999);
            assert_eq!(v.len(), 1000);
            let hit = find_first_range(par, 1000, |i| (i % 97 == 96).then_some(i));
            assert_eq!(hit, Some(96));
            let s = map_slice(par, &[1, 2, 3], |x| x + 1);
            assert_eq!(s, vec![2, 3, 4]);
        }
    }
}
