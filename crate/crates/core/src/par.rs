//! Data-parallel helpers. With the `parallel` feature these fan out over
//! rayon's pool; without it, or with [`Strategy::Sequential`], they run as
//! plain loops. Both paths produce identical results: reductions must be
//! associative and commutative.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

/// `map` over `0..n`, folded with `reduce`. Stops at the first error seen.
pub(crate) fn map_reduce<T, E, M, R>(
    strategy: Strategy,
    n: usize,
    identity: T,
    map: M,
    reduce: R,
) -> Result<T, E>
where
    T: Send + Sync + Clone,
    E: Send,
    M: Fn(usize) -> Result<T, E> + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy == Strategy::Parallel {
        use rayon::prelude::*;
        return (0..n)
            .into_par_iter()
            .map(&map)
            .try_reduce(|| identity.clone(), |a, b| Ok(reduce(a, b)));
    }
    let _ = strategy;
    let mut acc = identity;
    for i in 0..n {
        acc = reduce(acc, map(i)?);
    }
    Ok(acc)
}

/// `map` over `0..n`, collected in index order.
pub(crate) fn map_collect<T, E, M>(strategy: Strategy, n: usize, map: M) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    M: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy == Strategy::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(map).collect();
    }
    let _ = strategy;
    (0..n).map(map).collect()
}
