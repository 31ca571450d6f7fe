//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate maps independent items and collects the results
//! in input order; reductions happen sequentially afterwards. Results are therefore
//! identical for both policies. Without the `parallel` feature, `Parallel` silently
//! runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, in parallel when enabled.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
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

/// Fills `out[i] = f(i)` for every index, in parallel chunks when enabled.
pub fn fill_indexed<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() >= PAR_MIN_LEN {
        out.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * PAR_CHUNK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = f(base + k);
                }
            });
        return;
    }
    let _ = exec;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 4096;
#[cfg(feature = "parallel")]
const PAR_CHUNK: usize = 1024;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_range(Execution::Sequential, 10_000, f);
        let b = map_range(Execution::Parallel, 10_000, f);
        assert_eq!(a, b);

        let mut x = vec![0.0; 10_000];
        let mut y = vec![0.0; 10_000];
        fill_indexed(Execution::Sequential, &mut x, f);
        fill_indexed(Execution::Parallel, &mut y, f);
        assert_eq!(x, y);
    }
}
