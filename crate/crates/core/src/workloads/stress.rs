//! Randomized concurrent operation mixes with invariant checks after every
//! round.
//!
//! Each round draws one operation per logical thread from a generator seeded
//! by `(seed, round, thread)`, so the operation transcript depends only on
//! the [`StressSpec`], never on scheduling. The round runs as one launch across a hash
//! map, a vector and a deque; at the following quiescent point every
//! container is checked.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::index::{from_usize, to_usize, Index};
use crate::launch::{launch, LaunchConfig, LaunchError};
use crate::memory::MemoryError;
use crate::sequential::{ParDeque, ParVector};
use crate::unordered::{EntryHandle, InsertStatus, UnorderedMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StressSpec {
    /// Capacity of every container under test.
    pub capacity: Index,
    /// Operations (logical threads) per round.
    pub ops_per_round: Index,
    pub rounds: usize,
    pub workers: usize,
    pub seed: u64,
}

impl Default for StressSpec {
    fn default() -> Self {
        StressSpec {
            capacity: 256,
            ops_per_round: 2048,
            rounds: 16,
            workers: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    MapInsert(u32),
    MapErase(u32),
    MapFind(u32),
    MapContains(u32),
    VecPush(u64),
    VecPop,
    DequePushBack(u64),
    DequePushFront(u64),
    DequePopBack,
    DequePopFront,
}

fn payload(key: u32) -> u32 {
    key.wrapping_mul(31).wrapping_add(7)
}

/// The operations of one round.
pub fn round_ops(spec: &StressSpec, round: usize) -> Vec<Op> {
    let keys = (spec.capacity as u64 * 3 / 2).max(2) as u32;
    (0..spec.ops_per_round.max(0) as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                spec.seed ^ (round as u64).rotate_left(40) ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let id = ((round as u64) << 32) | i;
            let k = rng.random_range(0..keys);
            match rng.random_range(0..20) {
                0..=4 => Op::MapInsert(k),
                5..=8 => Op::MapErase(k),
                9..=10 => Op::MapFind(k),
                11 => Op::MapContains(k),
                12..=13 => Op::VecPush(id),
                14 => Op::VecPop,
                15 => Op::DequePushBack(id),
                16 => Op::DequePushFront(id),
                17 => Op::DequePopBack,
                _ => Op::DequePopFront,
            }
        })
        .collect()
}

/// Failures of one named invariant, over all rounds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Check {
    pub failures: u64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct StressReport {
    pub ops: u64,
    pub inserted: u64,
    pub erased: u64,
    pub exhausted: u64,
    pub pushed: u64,
    pub popped: u64,
    pub checks: BTreeMap<&'static str, Check>,
    /// Hash of the generated operations.
    pub transcript_hash: u64,
}

impl StressReport {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.failures == 0)
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        let c = self.checks.entry(name).or_default();
        if !ok {
            c.failures += 1;
            c.first_failure.get_or_insert_with(detail);
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StressError {
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Launch(#[from] LaunchError),
}

#[derive(Default)]
struct RoundLog {
    inserted: u64,
    erased: u64,
    exhausted: u64,
    handles: Vec<(u32, EntryHandle)>,
    bad_payloads: Vec<u32>,
    vec_pushed: Vec<u64>,
    vec_popped: Vec<u64>,
    deque_pushed: Vec<u64>,
    deque_popped: Vec<u64>,
}

struct Containers {
    map: UnorderedMap<u32, u32>,
    vector: ParVector<u64>,
    deque: ParDeque<u64>,
}

impl Containers {
    fn apply(&self, op: Op, log: &Mutex<RoundLog>) {
        match op {
            Op::MapInsert(k) => {
                let r = self.map.insert(k, payload(k));
                let mut log = log.lock();
                match r.status {
                    InsertStatus::Inserted => log.inserted += 1,
                    InsertStatus::AlreadyPresent => {}
                    InsertStatus::CapacityExhausted => log.exhausted += 1,
                }
                if !r.handle.is_end() {
                    log.handles.push((k, r.handle));
                }
            }
            Op::MapErase(k) => {
                if self.map.erase(&k) {
                    log.lock().erased += 1;
                }
            }
            Op::MapFind(k) => {
                let h = self.map.find(&k);
                if !h.is_end() {
                    let v = self.map.value(h);
                    let mut log = log.lock();
                    if v.is_some_and(|v| v != payload(k)) {
                        log.bad_payloads.push(k);
                    }
                    log.handles.push((k, h));
                }
            }
            Op::MapContains(k) => {
                self.map.contains(&k);
            }
            Op::VecPush(id) => {
                if self.vector.push_back(id) {
                    log.lock().vec_pushed.push(id);
                }
            }
            Op::VecPop => {
                if let Some(v) = self.vector.pop_back() {
                    log.lock().vec_popped.push(v);
                }
            }
            Op::DequePushBack(id) => {
                if self.deque.push_back(id) {
                    log.lock().deque_pushed.push(id);
                }
            }
            Op::DequePushFront(id) => {
                if self.deque.push_front(id) {
                    log.lock().deque_pushed.push(id);
                }
            }
            Op::DequePopBack => {
                if let Some(v) = self.deque.pop_back() {
                    log.lock().deque_popped.push(v);
                }
            }
            Op::DequePopFront => {
                if let Some(v) = self.deque.pop_front() {
                    log.lock().deque_popped.push(v);
                }
            }
        }
    }
}

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v
}

/// `before + pushed == popped + after` as multisets.
fn conserved(before: Vec<u64>, pushed: &[u64], popped: &[u64], after: Vec<u64>) -> bool {
    let mut lhs = before;
    lhs.extend_from_slice(pushed);
    let mut rhs = after;
    rhs.extend_from_slice(popped);
    sorted(lhs) == sorted(rhs)
}

pub fn run(spec: &StressSpec) -> Result<StressReport, StressError> {
    let c = Containers {
        map: UnorderedMap::create(spec.capacity)?,
        vector: ParVector::create(spec.capacity)?,
        deque: ParDeque::create(spec.capacity)?,
    };
    let result = run_rounds(spec, &c);
    c.map.destroy()?;
    c.vector.destroy()?;
    c.deque.destroy()?;
    result
}

fn run_rounds(spec: &StressSpec, c: &Containers) -> Result<StressReport, StressError> {
    let mut report = StressReport::default();
    let mut transcript = std::hash::DefaultHasher::new();
    for round in 0..spec.rounds {
        let ops = round_ops(spec, round);
        ops.hash(&mut transcript);
        report.ops += ops.len() as u64;

        let size_before = c.map.size();
        let vec_before: Vec<u64> = c.vector.device_range().iter().collect();
        let deque_before: Vec<u64> = c.deque.device_range().iter().collect();

        let log = Mutex::new(RoundLog::default());
        let config = LaunchConfig::new(from_usize(ops.len()))
            .workers(spec.workers)
            .seed(spec.seed.wrapping_add(round as u64));
        launch(config, |i| c.apply(ops[to_usize(i)], &log))?;
        let log = log.into_inner();

        report.inserted += log.inserted;
        report.erased += log.erased;
        report.exhausted += log.exhausted;
        report.pushed += (log.vec_pushed.len() + log.deque_pushed.len()) as u64;
        report.popped += (log.vec_popped.len() + log.deque_popped.len()) as u64;

        let map = &c.map;
        let structure = map.check();
        report.check("map.valid", structure.is_ok(), || {
            format!("round {round}: {}", structure.clone().unwrap_err())
        });
        let expected = size_before + log.inserted as Index - log.erased as Index;
        report.check("map.conservation", map.size() == expected, || {
            format!("round {round}: size {} but expected {expected}", map.size())
        });
        let mut entries: Vec<(u32, u32)> = map.device_range().iter().collect();
        entries.sort_unstable();
        let unique = entries.windows(2).all(|w| w[0].0 != w[1].0);
        report.check("map.uniqueness", unique, || format!("round {round}: duplicate keys"));
        report.check(
            "map.range_length",
            from_usize(entries.len()) == map.size(),
            || format!("round {round}: range of {} for size {}", entries.len(), map.size()),
        );
        let payload_ok =
            log.bad_payloads.is_empty() && entries.iter().all(|&(k, v)| v == payload(k));
        report.check("map.payloads", payload_ok, || format!("round {round}: wrong payload"));
        let stale = log
            .handles
            .iter()
            .find(|(k, h)| map.entry(*h).is_some_and(|(found, _)| found != *k));
        report.check("map.stale_handles", stale.is_none(), || {
            let (k, h) = stale.unwrap();
            format!("round {round}: handle {h:?} taken for key {k} resolves to another key")
        });

        report.check("vector.valid", c.vector.valid(), || format!("round {round}"));
        let vec_after: Vec<u64> = c.vector.device_range().iter().collect();
        let ok = conserved(vec_before, &log.vec_pushed, &log.vec_popped, vec_after);
        report.check("vector.conservation", ok, || format!("round {round}"));

        report.check("deque.valid", c.deque.valid(), || format!("round {round}"));
        let deque_after: Vec<u64> = c.deque.device_range().iter().collect();
        let ok = conserved(deque_before, &log.deque_pushed, &log.deque_popped, deque_after);
        report.check("deque.conservation", ok, || format!("round {round}"));
    }
    report.transcript_hash = transcript.finish();
    Ok(report)
}
