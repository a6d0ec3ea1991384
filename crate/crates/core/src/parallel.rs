//! Ordered map over independent sweep points.
//!
//! With the `parallel` feature (default) points are evaluated on the rayon
//! pool; without it they run sequentially. Either way results come back in
//! input order, so output bytes never depend on scheduling.

/// Evaluates `f` on every point, sequentially.
pub fn map_sequential<T, F>(points: &[f64], f: F) -> Vec<T>
where
    F: Fn(f64) -> T,
{
    points.iter().map(|&p| f(p)).collect()
}

/// Evaluates `f` on every point on the current rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(points: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    points.par_iter().map(|&p| f(p)).collect()
}

/// Evaluates `f` on every point with the build's default strategy.
pub fn map_points<T, F>(points: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(points, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(points, f)
    }
}

/// Runs `op` with at most `threads` workers (ignored in sequential builds).
pub fn with_threads<R, F>(threads: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
        {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let pts: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        let seq = map_sequential(&pts, |x| x.sqrt());
        let dflt = with_threads(4, || map_points(&pts, |x| x.sqrt()));
        assert_eq!(seq, dflt);
    }
}
