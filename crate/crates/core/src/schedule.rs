//! Work-assignment policies for running independent queries on a fixed
//! number of worker threads.
//!
//! The policies only decide which worker runs which contiguous range of
//! items. Results are returned sorted by range start, so callers see the
//! same output whatever the policy or worker count.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_DYNAMIC_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Schedule {
    /// One equal contiguous share per worker, fixed up front.
    #[default]
    Static,
    /// Workers repeatedly claim the next `chunk` items.
    Dynamic { chunk: usize },
    /// Workers claim `remaining / workers` items (at least `min_chunk`), so
    /// chunks shrink geometrically towards the end.
    Guided { min_chunk: usize },
}

impl Schedule {
    pub fn dynamic() -> Self {
        Schedule::Dynamic {
            chunk: DEFAULT_DYNAMIC_CHUNK,
        }
    }

    pub fn guided() -> Self {
        Schedule::Guided { min_chunk: 1 }
    }

    pub fn all() -> [Schedule; 3] {
        [Schedule::Static, Schedule::dynamic(), Schedule::guided()]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Static => "static",
            Schedule::Dynamic { .. } => "dynamic",
            Schedule::Guided { .. } => "guided",
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Schedule::Static),
            "dynamic" => Ok(Schedule::dynamic()),
            "guided" => Ok(Schedule::guided()),
            other => Err(Error::InvalidParams(format!("unknown schedule {other:?}"))),
        }
    }
}

struct ChunkSource {
    n: usize,
    workers: usize,
    schedule: Schedule,
    next: AtomicUsize,
}

impl ChunkSource {
    fn claim(&self, worker: usize, static_done: &mut bool) -> Option<Range<usize>> {
        match self.schedule {
            Schedule::Static => {
                if *static_done {
                    return None;
                }
                *static_done = true;
                let lo = worker * self.n / self.workers;
                let hi = (worker + 1) * self.n / self.workers;
                (lo < hi).then_some(lo..hi)
            }
            Schedule::Dynamic { chunk } => {
                let chunk = chunk.max(1);
                let lo = self.next.fetch_add(chunk, Ordering::Relaxed);
                (lo < self.n).then(|| lo..(lo + chunk).min(self.n))
            }
            Schedule::Guided { min_chunk } => {
                let mut lo = self.next.load(Ordering::Relaxed);
                loop {
                    if lo >= self.n {
                        return None;
                    }
                    let size = (self.n - lo).div_ceil(self.workers).max(min_chunk.max(1));
                    let hi = (lo + size).min(self.n);
                    match self.next.compare_exchange_weak(
                        lo,
                        hi,
                        Ordering::Relaxed,
                        Ordering::Relaxed,
                    ) {
                        Ok(_) => return Some(lo..hi),
                        Err(cur) => lo = cur,
                    }
                }
            }
        }
    }
}

/// Runs `f` over `0..n` split according to `schedule` on `workers` threads
/// and returns each chunk's output with its range, ordered by range start.
pub fn run_chunked<T, F>(n: usize, workers: usize, schedule: Schedule, f: F) -> Vec<(Range<usize>, T)>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let workers = workers.max(1);
    let source = ChunkSource {
        n,
        workers,
        schedule,
        next: AtomicUsize::new(0),
    };
    let work = |worker: usize| {
        let mut out = Vec::new();
        let mut static_done = false;
        while let Some(range) = source.claim(worker, &mut static_done) {
            let value = f(range.clone());
            out.push((range, value));
        }
        out
    };

    let mut results: Vec<(Range<usize>, T)> = if workers == 1 {
        work(0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let work = &work;
                    scope.spawn(move || work(w))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    results.sort_by_key(|(r, _)| r.start);
    results
}
