//! Serial or rayon-parallel evaluation of indexed work items.
//!
//! Results always come back in index order, so any reduction over them is
//! independent of how the work was scheduled. Without the `parallel`
//! feature, [`Execution::Parallel`] runs serially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

pub fn map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Serial => (0..count).map(f).collect(),
        Execution::Parallel => parallel_map(count, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let serial = map_indexed(1000, Execution::Serial, |i| i * i);
        let parallel = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(serial, parallel);
        assert_eq!(serial[31], 961);
    }
}
