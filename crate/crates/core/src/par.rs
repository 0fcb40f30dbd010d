//! Data-parallel helpers. With the `parallel` feature (default) the
//! [`Exec::Parallel`] strategy runs on the rayon pool; without it every
//! strategy degrades to the sequential loop.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Execution strategy for the exhaustive enumeration loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Default limit on the number of candidates an exhaustive enumeration may
/// visit.
pub const DEFAULT_GUARD: u128 = 1_000_000;

/// Size limit and strategy for an exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub guard: u128,
    pub exec: Exec,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { guard: DEFAULT_GUARD, exec: Exec::default() }
    }
}

impl Budget {
    pub fn with_guard(self, guard: u128) -> Budget {
        Budget { guard, ..self }
    }

    pub fn with_exec(self, exec: Exec) -> Budget {
        Budget { exec, ..self }
    }

    pub fn check(&self, size: u128) -> Result<()> {
        if size > self.guard {
            Err(Error::Guard { size, limit: self.guard })
        } else {
            Ok(())
        }
    }
}

/// `base^exp`, saturating.
pub fn power(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Order-preserving map.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving filter-map.
pub fn filter_map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().filter_map(f).collect();
    }
    let _ = exec;
    items.iter().filter_map(f).collect()
}

/// Order-preserving flat-map over a range of indices.
pub fn flat_map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> Vec<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    (0..n).flat_map(f).collect()
}

pub fn all<T, F>(exec: Exec, items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().all(f);
    }
    let _ = exec;
    items.iter().all(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<u32> = (0..100).collect();
        let a = map(Exec::Sequential, &xs, |x| x * x);
        let b = map(Exec::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        let c = flat_map_range(Exec::Parallel, 10, |i| vec![i; i]);
        let d = flat_map_range(Exec::Sequential, 10, |i| vec![i; i]);
        assert_eq!(c, d);
    }
}
