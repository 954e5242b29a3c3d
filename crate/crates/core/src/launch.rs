//! Data-parallel "kernel launch" on a pool of worker threads.
//!
//! [`launch`] calls a body once for every logical thread index in
//! `0..total_threads` and returns only after all calls finished. Each launch
//! runs on its own scoped workers, so a body may launch again without
//! deadlocking.
//!
//! With a seed, the index-to-worker assignment and each worker's dispatch
//! order come from a seeded shuffle, and workers yield at random points
//! between invocations to widen the set of interleavings under test.

use std::any::Any;
use std::cell::Cell;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use parking_lot::Mutex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contract::ContractViolation;
use crate::index::{to_usize, Index};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaunchConfig {
    /// Logical grid size.
    pub total_threads: Index,
    /// Physical worker threads.
    pub workers: usize,
    /// Enables deterministic stress scheduling.
    pub seed: Option<u64>,
}

impl LaunchConfig {
    pub fn new(total_threads: Index) -> Self {
        LaunchConfig {
            total_threads,
            workers: default_workers(),
            seed: None,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed_opt(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    fn effective_workers(&self) -> usize {
        let n = to_usize(self.total_threads.max(0));
        if cfg!(target_arch = "wasm32") {
            return 1;
        }
        self.workers.max(1).min(n.max(1))
    }
}

/// Hardware concurrency, or 1 when it cannot be queried.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaunchError {
    #[error("thread {index}: {violation}")]
    Contract {
        index: Index,
        violation: ContractViolation,
    },
    #[error("thread {index} panicked: {message}")]
    Panic { index: Index, message: String },
}

impl LaunchError {
    fn from_panic(index: Index, payload: Box<dyn Any + Send>) -> LaunchError {
        if let Some(v) = payload.downcast_ref::<ContractViolation>() {
            return LaunchError::Contract {
                index,
                violation: v.clone(),
            };
        }
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "non-string panic payload".to_string());
        LaunchError::Panic { index, message }
    }
}

thread_local! {
    static WORKER: Cell<Option<usize>> = const { Cell::new(None) };
}

/// Worker number of the calling thread while it executes a launch body.
pub fn worker_id() -> Option<usize> {
    WORKER.with(|w| w.get())
}

struct WorkerScope(Option<usize>);

impl WorkerScope {
    fn enter(id: usize) -> WorkerScope {
        WorkerScope(WORKER.with(|w| w.replace(Some(id))))
    }
}

impl Drop for WorkerScope {
    fn drop(&mut self) {
        WORKER.with(|w| w.set(self.0));
    }
}

/// The per-worker dispatch lists a seeded launch will execute, or `None`
/// for unseeded launches (which hand out indices dynamically).
pub fn plan(config: &LaunchConfig) -> Option<Vec<Vec<Index>>> {
    let seed = config.seed?;
    let workers = config.effective_workers();
    let n = config.total_threads.max(0);
    let mut order: Vec<Index> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, n as u64, workers as u64));
    order.shuffle(&mut rng);
    let mut lists = vec![Vec::new(); workers];
    for (k, i) in order.into_iter().enumerate() {
        lists[k % workers].push(i);
    }
    Some(lists)
}

fn mix(seed: u64, n: u64, workers: u64) -> u64 {
    seed ^ n.rotate_left(21) ^ workers.rotate_left(42) ^ 0x9E37_79B9_7F4A_7C15
}

struct Shared<'a, F> {
    body: &'a F,
    abort: AtomicBool,
    error: Mutex<Option<LaunchError>>,
}

impl<F: Fn(Index) + Sync> Shared<'_, F> {
    fn run(&self, i: Index) {
        if let Err(payload) = panic::catch_unwind(AssertUnwindSafe(|| (self.body)(i))) {
            let mut slot = self.error.lock();
            if slot.is_none() {
                *slot = Some(LaunchError::from_panic(i, payload));
            }
            self.abort.store(true, Ordering::Release);
        }
    }

    fn aborted(&self) -> bool {
        self.abort.load(Ordering::Acquire)
    }
}

/// Invokes `body` once for every index in `0..config.total_threads`.
///
/// The first panic or contract violation aborts the remaining work; it is
/// returned once every worker has stopped.
pub fn launch<F>(config: LaunchConfig, body: F) -> Result<(), LaunchError>
where
    F: Fn(Index) + Sync,
{
    if config.total_threads <= 0 {
        return Ok(());
    }
    let shared = Shared {
        body: &body,
        abort: AtomicBool::new(false),
        error: Mutex::new(None),
    };
    let workers = config.effective_workers();

    match (plan(&config), config.seed) {
        (Some(lists), Some(seed)) => {
            let run_list = |w: usize, list: &[Index]| {
                let _scope = WorkerScope::enter(w);
                let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, w as u64, 0x5EED));
                for &i in list {
                    if shared.aborted() {
                        break;
                    }
                    if rng.random_ratio(1, 4) {
                        std::thread::yield_now();
                    }
                    shared.run(i);
                }
            };
            if workers == 1 {
                for (w, list) in lists.iter().enumerate() {
                    run_list(w, list);
                }
            } else {
                std::thread::scope(|s| {
                    for (w, list) in lists.iter().enumerate() {
                        let run_list = &run_list;
                        s.spawn(move || run_list(w, list));
                    }
                });
            }
        }
        _ => {
            let n = to_usize(config.total_threads);
            let chunk = (n / (workers * 8)).max(1);
            let next = AtomicUsize::new(0);
            let pull = |w: usize| {
                let _scope = WorkerScope::enter(w);
                loop {
                    if shared.aborted() {
                        break;
                    }
                    let start = next.fetch_add(chunk, Ordering::Relaxed);
                    if start >= n {
                        break;
                    }
                    for i in start..(start + chunk).min(n) {
                        if shared.aborted() {
                            break;
                        }
                        shared.run(i as Index);
                    }
                }
            };
            if workers == 1 {
                pull(0);
            } else {
                std::thread::scope(|s| {
                    for w in 0..workers {
                        let pull = &pull;
                        s.spawn(move || pull(w));
                    }
                });
            }
        }
    }

    match shared.error.into_inner() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// [`launch`] with the default worker count and no seed.
pub fn for_each_index<F>(n: Index, body: F) -> Result<(), LaunchError>
where
    F: Fn(Index) + Sync,
{
    launch(LaunchConfig::new(n), body)
}
