//! Island-level worker pool with a deterministic reduction.
//!
//! Workers claim fixed-size batches from a shared atomic cursor and keep their
//! results locally; after the join the results are placed in canonical order,
//! so any reduction over them is independent of worker count and timing.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Instant;

use crate::config::SystemConfig;
use crate::error::EngineError;
use crate::fwm::MuMethod;
use crate::scalar::Scalar;

/// Outcome of [`run_islands`].
#[derive(Debug, Clone)]
pub struct IslandRun<R> {
    /// One result per input item, in input order.
    pub results: Vec<R>,
    /// Batches claimed by each worker.
    pub batches_per_worker: Vec<usize>,
}

/// Evaluates `eval` on every item using up to `workers` threads.
///
/// On failure the error of the lowest-index failing item seen is returned
/// together with that index; no results are returned.
pub fn run_islands<I, R, E, F>(
    items: &[I],
    workers: usize,
    chunk_size: usize,
    eval: F,
) -> Result<IslandRun<R>, (usize, E)>
where
    I: Sync,
    R: Send,
    E: Send,
    F: Fn(&I) -> Result<R, E> + Sync,
{
    let workers = workers.max(1);
    let chunk = chunk_size.max(1);
    if workers == 1 || items.len() <= chunk {
        let mut results = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            results.push(eval(item).map_err(|e| (i, e))?);
        }
        let batches = items.len().div_ceil(chunk);
        return Ok(IslandRun {
            results,
            batches_per_worker: vec![batches],
        });
    }

    let cursor = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    type Local<R, E> = (Vec<(usize, Vec<R>)>, Option<(usize, E)>, usize);
    let outputs: Vec<Local<R, E>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    let mut error: Option<(usize, E)> = None;
                    let mut claimed = 0usize;
                    while !failed.load(Ordering::Relaxed) {
                        let start = cursor.fetch_add(chunk, Ordering::Relaxed);
                        if start >= items.len() {
                            break;
                        }
                        claimed += 1;
                        let end = (start + chunk).min(items.len());
                        let mut batch = Vec::with_capacity(end - start);
                        for (offset, item) in items[start..end].iter().enumerate() {
                            match eval(item) {
                                Ok(r) => batch.push(r),
                                Err(e) => {
                                    error = Some((start + offset, e));
                                    failed.store(true, Ordering::Relaxed);
                                    break;
                                }
                            }
                        }
                        if error.is_some() {
                            break;
                        }
                        done.push((start, batch));
                    }
                    (done, error, claimed)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("island worker panicked"))
            .collect()
    });

    let mut first_error: Option<(usize, E)> = None;
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let mut batches_per_worker = Vec::with_capacity(workers);
    for (done, error, claimed) in outputs {
        batches_per_worker.push(claimed);
        if let Some((i, e)) = error {
            if first_error.as_ref().map_or(true, |(j, _)| i < *j) {
                first_error = Some((i, e));
            }
        }
        for (start, batch) in done {
            for (offset, r) in batch.into_iter().enumerate() {
                slots[start + offset] = Some(r);
            }
        }
    }
    if let Some(err) = first_error {
        return Err(err);
    }
    let results = slots
        .into_iter()
        .map(|r| r.expect("every island is evaluated exactly once"))
        .collect();
    Ok(IslandRun {
        results,
        batches_per_worker,
    })
}

/// One row of a speedup table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: MuMethod,
    pub workers: usize,
    pub median_s: f64,
    pub speedup: f64,
}

/// Median wall time of evaluating `cois` (every channel when empty) for each
/// worker count, with speedup relative to the first entry of `workers_list`
/// (one worker is prepended if missing).
pub fn benchmark<T: Scalar>(
    config: &SystemConfig<T>,
    workers_list: &[usize],
    cois: &[i32],
    repeats: usize,
) -> Result<Vec<BenchRow>, EngineError> {
    let mut list: Vec<usize> = workers_list.iter().copied().filter(|&w| w >= 1).collect();
    if !list.contains(&1) {
        list.insert(0, 1);
    }
    let cois: Vec<i32> = if cois.is_empty() {
        config.grid.indices().collect()
    } else {
        cois.to_vec()
    };
    let repeats = repeats.max(3);
    let mut rows = Vec::with_capacity(list.len());
    let mut base = None;
    for &w in &list {
        let mut cfg = config.clone();
        cfg.numerics.workers = w;
        let engine = crate::engine::NliEngine::new(cfg)?;
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            engine.evaluate(&cois)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let median = median(&mut times);
        if w == 1 {
            base = Some(median);
        }
        rows.push(BenchRow {
            method: config.numerics.mu_method,
            workers: w,
            median_s: median,
            speedup: 0.0,
        });
    }
    let base = base.expect("one-worker baseline present");
    for row in &mut rows {
        row.speedup = if row.workers == 1 { 1.0 } else { base / row.median_s };
    }
    Ok(rows)
}

/// Median of `xs` (sorted in place); NaN for an empty slice.
pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Worker count from `ISRS_EGN_WORKERS`, if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var("ISRS_EGN_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w >= 1)
}
