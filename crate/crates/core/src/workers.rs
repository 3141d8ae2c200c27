//! Deterministic index-partitioned parallelism.
//!
//! Every parallel loop in the library funnels through [`run_indexed`]: the work
//! for each index is independent, each result lands in its own slot, and only
//! the partitioning of `0..n` across threads varies with the worker count. No
//! reductions happen across threads, so results are bitwise-identical for any
//! `workers` value.

use std::thread;

/// Evaluate `f(i)` for `i in 0..n` and collect the results in index order,
/// using up to `workers` OS threads (contiguous chunks, one per thread).
pub fn run_indexed<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let k = workers.max(1).min(n);
    if k <= 1 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    let chunk = n.div_ceil(k);
    thread::scope(|s| {
        let f = &f;
        let mut rest: &mut [Option<T>] = &mut out;
        let mut base = 0usize;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            rest = tail;
            let start = base;
            base += take;
            s.spawn(move || {
                for (i, slot) in head.iter_mut().enumerate() {
                    *slot = Some(f(start + i));
                }
            });
        }
    });
    out.into_iter()
        .map(|x| x.expect("every slot is filled by exactly one worker"))
        .collect()
}
