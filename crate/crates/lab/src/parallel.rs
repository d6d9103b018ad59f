//! Sweep parallelism capped by `JMGT_LAB_THREADS` (unset or 0 = all cores).

use rayon::prelude::*;

pub const THREADS_ENV: &str = "JMGT_LAB_THREADS";

/// Thread cap from the environment; `0` lets rayon decide.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Maps `f` over `items` on a pool of at most [`thread_cap`] threads.
/// Results keep the order of `items`.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(thread_cap()).build();
    match pool {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        // no pool (e.g. thread spawning refused): run inline
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..200).collect();
        let ys = par_map(&xs, |x| x * x);
        assert_eq!(ys, xs.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
