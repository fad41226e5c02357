//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` strategy runs on rayon;
//! without it every strategy runs sequentially. Results are always returned
//! in input order, so reductions over them are schedule-independent.

/// Environment variable read by [`configure_from_env`].
pub const THREADS_ENV: &str = "HDX_THREADS";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Sizes the global pool from `HDX_THREADS` if set. Returns the thread count in use.
pub fn configure_from_env() -> usize {
    let requested = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    configure_threads(requested)
}

#[cfg(feature = "parallel")]
pub fn configure_threads(n: Option<usize>) -> usize {
    if let Some(n) = n {
        // a second initialization keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: Option<usize>) -> usize {
    1
}

/// Order-preserving map.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_init(exec, items, || (), |_, t| f(t))
}

/// Order-preserving map with per-worker scratch state.
pub fn map_init<T, S, R, I, F>(exec: Execution, items: &[T], init: I, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map_init(&init, |s, t| f(s, t)).collect()
        }
        _ => {
            let mut s = init();
            items.iter().map(|t| f(&mut s, t)).collect()
        }
    }
}

/// Order-preserving map over an index range.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(exec, &idx, |&i| f(i))
}
