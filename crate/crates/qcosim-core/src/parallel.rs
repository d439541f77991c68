//! Data-parallel execution of independent work items (sweep points, map
//! cells).
//!
//! With the `parallel` feature (default) items run on the rayon pool; without
//! it, or with [`ExecMode::Sequential`], they run in order on the calling
//! thread. Results land in their slot by index, so output is bit-identical
//! across modes and thread counts.

/// How to execute a batch of independent items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Use the rayon pool when the `parallel` feature is compiled in.
    #[default]
    Parallel,
    /// Run on the calling thread.
    Sequential,
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<R, F>(n: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        let seq = map_indexed(257, ExecMode::Sequential, f);
        let par = map_indexed(257, ExecMode::Parallel, f);
        assert_eq!(seq, par);
    }
}
