//! Row-parallel execution helpers.
//!
//! Kernels over the grid are written once against these helpers. With the
//! `parallel` feature they fan rows out over rayon; without it, or when
//! [`Exec::Sequential`] is requested, they run in a plain loop. Reductions
//! always combine per-row partial sums in row order, so results do not depend
//! on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many grid nodes the parallel path is not worth the fork/join.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Parallel when the `parallel` feature is on and the problem is large
    /// enough; sequential otherwise.
    #[default]
    Auto,
}

#[cfg(feature = "parallel")]
impl Exec {
    fn parallel_for(self, nodes: usize) -> bool {
        self == Exec::Auto && nodes >= PAR_THRESHOLD
    }
}

/// Calls `f(row_index, row)` for every row of length `width` in `out`.
pub fn for_each_row<T, F>(exec: Exec, out: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel_for(out.len()) {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(j, row)| f(j, row));
        return;
    }
    let _ = exec;
    for (j, row) in out.chunks_mut(width).enumerate() {
        f(j, row);
    }
}

/// Sums `f(row_index)` over `rows` rows in a fixed order.
pub fn sum_rows<F>(exec: Exec, rows: usize, nodes: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel_for(nodes) {
        let partial: Vec<f64> = (0..rows).into_par_iter().map(&f).collect();
        return partial.iter().sum();
    }
    let _ = (exec, nodes);
    (0..rows).map(f).sum()
}

/// Number of worker threads available to the parallel path.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// `items.iter().map(f)`, fanned out over threads when allowed. Output order
/// matches input order.
pub fn map_each<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if cfg!(feature = "parallel") && exec == Exec::Auto && items.len() > 1 {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Caps the worker pool at `n` threads. Only the first call has an effect.
pub fn init_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
