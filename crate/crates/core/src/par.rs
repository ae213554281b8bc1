//! Data-parallel maps with a sequential fallback.
//!
//! Results are always collected in input order, so both modes produce identical output.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise runs sequentially.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Index of the first item (in input order) for which `f` returns `Some`, with its value.
pub fn find_first<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Option<(usize, R)>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items
                .par_iter()
                .enumerate()
                .filter_map(|(i, t)| f(t).map(|r| (i, r)))
                .min_by_key(|(i, _)| *i)
        }
        _ => items.iter().enumerate().find_map(|(i, t)| f(t).map(|r| (i, r))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..500).collect();
        let a = map(ExecMode::Sequential, &xs, |x| x * x);
        let b = map(ExecMode::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        let f = |x: &u64| if x % 37 == 36 { Some(*x) } else { None };
        assert_eq!(find_first(ExecMode::Sequential, &xs, f), find_first(ExecMode::Parallel, &xs, f));
    }
}
