//! Parallel maps for sweeps, capped by ENTROFLOW_THREADS.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const THREADS_VAR: &str = "ENTROFLOW_THREADS";

fn pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var(THREADS_VAR) {
        let n: usize = s
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::input(format!("{THREADS_VAR} must be a positive integer, got {s:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

/// Maps `f` over `items` in parallel; results keep the input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    Ok(pool()?.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let xs: Vec<u64> = (0..1000).collect();
        let ys = par_map(&xs, |x| x * x).unwrap();
        assert!(ys.iter().enumerate().all(|(i, y)| *y == (i * i) as u64));
    }
}
