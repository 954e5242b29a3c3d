//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails, including by exceeding its time budget.

mod support;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parastore::functional::{DefaultHash, HashFn};
use parastore::memory::{CopySide, Direction, Registry};
use parastore::workloads::{
    compute_update_set, dense_block_map, extract_count, random_blocks, BlockCoord, BlockSet,
    SphereField,
};
use parastore::{
    launch, spatial_hash, Bitset, EqualTo, Index, InsertStatus, LaunchConfig, MemoryError,
    MemorySpace, MutexArray, ParDeque, ParVector, UnorderedMap, UnorderedSet,
};
use support::linearizability::{linearize, Event, KeyOp};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 64 threads insert one key into a capacity-32 set, 100 times.
fn uniqueness_under_contention() -> Outcome {
    for rep in 0..100u64 {
        let set = UnorderedSet::<u64>::create(32).map_err(|e| e.to_string())?;
        let inserted = AtomicUsize::new(0);
        launch(LaunchConfig::new(64).workers(8).seed(rep), |_| {
            if set.insert(42).status == InsertStatus::Inserted {
                inserted.fetch_add(1, Ordering::Relaxed);
            }
        })
        .map_err(|e| e.to_string())?;
        let n = inserted.into_inner();
        ensure(n == 1 && set.size() == 1 && set.valid(), || {
            format!("repetition {rep}: {n} inserted statuses, size {}", set.size())
        })?;
        set.destroy().map_err(|e| e.to_string())?;
    }
    Ok("100 repetitions, one insertion each".into())
}

/// C + 25% distinct keys into capacity C: exactly C succeed.
fn capacity_only_failure() -> Outcome {
    for c in [16i64, 64, 1024] {
        for seed in 0..5u64 {
            let set = UnorderedSet::<i64>::create(c as Index).map_err(|e| e.to_string())?;
            let n = c + c / 4;
            let inserted = AtomicUsize::new(0);
            let exhausted = AtomicUsize::new(0);
            let exhausted_below_capacity = AtomicUsize::new(0);
            let other = AtomicUsize::new(0);
            launch(LaunchConfig::new(n as Index).workers(8).seed(seed), |i| {
                let r = set.insert(i as i64 * 7919);
                match r.status {
                    InsertStatus::Inserted => inserted.fetch_add(1, Ordering::Relaxed),
                    InsertStatus::CapacityExhausted => {
                        // No erasures run, so the size cannot have shrunk.
                        if set.size() < c as Index || !r.handle.is_end() {
                            exhausted_below_capacity.fetch_add(1, Ordering::Relaxed);
                        }
                        exhausted.fetch_add(1, Ordering::Relaxed)
                    }
                    InsertStatus::AlreadyPresent => other.fetch_add(1, Ordering::Relaxed),
                };
            })
            .map_err(|e| e.to_string())?;
            let (ins, exh) = (inserted.into_inner(), exhausted.into_inner());
            ensure(
                ins == c as usize
                    && exh == (n - c) as usize
                    && other.into_inner() == 0
                    && exhausted_below_capacity.into_inner() == 0,
                || format!("C={c} seed {seed}: {ins} inserted, {exh} exhausted"),
            )?;
            ensure(set.valid(), || format!("C={c} seed {seed}: invalid after fill"))?;
            set.destroy().map_err(|e| e.to_string())?;
        }
    }
    Ok("C in {16, 64, 1024}, 5 schedules each".into())
}

/// 10,000 single-threaded operations against a reference map.
fn sequential_oracle() -> Outcome {
    const CAP: usize = 48;
    let map = UnorderedMap::<u32, u64>::create(CAP as Index).map_err(|e| e.to_string())?;
    let mut reference: HashMap<u32, u64> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for step in 0..10_000u64 {
        let k = rng.random_range(0..64u32);
        match rng.random_range(0..4) {
            0 => {
                let r = map.insert(k, step);
                let expected = if reference.contains_key(&k) {
                    InsertStatus::AlreadyPresent
                } else if reference.len() < CAP {
                    reference.insert(k, step);
                    InsertStatus::Inserted
                } else {
                    InsertStatus::CapacityExhausted
                };
                ensure(r.status == expected, || {
                    format!("step {step}: insert({k}) gave {:?}, expected {expected:?}", r.status)
                })?;
            }
            1 => {
                let got = map.erase(&k);
                let expected = reference.remove(&k).is_some();
                ensure(got == expected, || format!("step {step}: erase({k}) gave {got}"))?;
            }
            2 => {
                let got = map.contains(&k);
                let expected = reference.contains_key(&k);
                ensure(got == expected, || format!("step {step}: contains({k}) gave {got}"))?;
            }
            _ => {
                let h = map.find(&k);
                let got = if h.is_end() { None } else { map.value(h) };
                let expected = reference.get(&k).copied();
                ensure(got == expected, || {
                    format!("step {step}: find({k}) gave {got:?}, expected {expected:?}")
                })?;
            }
        }
        ensure(map.size() as usize == reference.len(), || {
            format!("step {step}: size {} vs {}", map.size(), reference.len())
        })?;
    }
    ensure(map.valid(), || "invalid structure after the run".into())?;
    map.destroy().map_err(|e| e.to_string())?;
    Ok("10000 operations, full agreement".into())
}

/// Histories of at most 3 threads x 4 operations on one key.
fn per_key_linearizability() -> Outcome {
    const KEY: u32 = 5;
    // Every key shares one bucket so the chain is never trivial.
    let set = UnorderedSet::create_with(8, HashFn::new(|_: &u32| 0), EqualTo)
        .map_err(|e| e.to_string())?;
    for k in [1u32, 2, 3] {
        set.insert(k);
    }
    let mut overlapping = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let threads = rng.random_range(2..=3usize);
        let scripts: Vec<Vec<KeyOp>> = (0..threads)
            .map(|_| {
                (0..rng.random_range(1..=4))
                    .map(|_| match rng.random_range(0..3) {
                        0 => KeyOp::Insert,
                        1 => KeyOp::Erase,
                        _ => KeyOp::Contains,
                    })
                    .collect()
            })
            .collect();
        let initially_present = rng.random_bool(0.5);
        if initially_present {
            set.insert(KEY);
        } else {
            set.erase(&KEY);
        }

        let clock = AtomicU64::new(0);
        let history = Mutex::new(Vec::new());
        let config = LaunchConfig::new(threads as Index).workers(threads).seed(seed);
        launch(config, |t| {
            let mut local = Vec::new();
            for (j, &op) in scripts[t as usize].iter().enumerate() {
                if (seed + j as u64 + t as u64).is_multiple_of(3) {
                    std::thread::yield_now();
                }
                let invoked = clock.fetch_add(1, Ordering::SeqCst);
                // Widening the recorded interval with a yield lets other
                // threads run inside it, so histories overlap even on one core.
                std::thread::yield_now();
                let result = match op {
                    KeyOp::Insert => set.insert(KEY).status == InsertStatus::Inserted,
                    KeyOp::Erase => set.erase(&KEY),
                    KeyOp::Contains => set.contains(&KEY),
                };
                std::thread::yield_now();
                let returned = clock.fetch_add(1, Ordering::SeqCst);
                local.push(Event {
                    op,
                    result,
                    invoked,
                    returned,
                });
            }
            history.lock().extend(local);
        })
        .map_err(|e| e.to_string())?;
        let history = history.into_inner();
        if history
            .iter()
            .any(|a| history.iter().any(|b| a != b && a.invoked < b.invoked && b.invoked < a.returned))
        {
            overlapping += 1;
        }
        ensure(linearize(&history, initially_present).is_some(), || {
            format!("seed {seed}: no sequential witness for {history:?}")
        })?;
        ensure(set.valid(), || format!("seed {seed}: invalid structure"))?;
    }
    set.destroy().map_err(|e| e.to_string())?;
    Ok(format!("1000 histories, {overlapping} with overlapping operations"))
}

/// Push/pop mixes of 8 threads x 256 operations on a vector and a deque.
fn sequential_conservation() -> Outcome {
    for seed in 0..1000u64 {
        for on_deque in [false, true] {
            let vector = ParVector::<u64>::create(64).map_err(|e| e.to_string())?;
            let deque = ParDeque::<u64>::create(64).map_err(|e| e.to_string())?;
            let pushed = Mutex::new(Vec::new());
            let popped = Mutex::new(Vec::new());
            launch(LaunchConfig::new(8).workers(8).seed(seed), |t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 8 + t as u64);
                let (mut my_pushed, mut my_popped) = (Vec::new(), Vec::new());
                for j in 0..256u64 {
                    let id = ((t as u64) << 32) | j;
                    let choice = rng.random_range(0..4);
                    let pushed_ok = match (on_deque, choice) {
                        (false, 0 | 1) => Some(vector.push_back(id)),
                        (false, _) => {
                            my_popped.extend(vector.pop_back());
                            None
                        }
                        (true, 0) => Some(deque.push_back(id)),
                        (true, 1) => Some(deque.push_front(id)),
                        (true, 2) => {
                            my_popped.extend(deque.pop_back());
                            None
                        }
                        (true, _) => {
                            my_popped.extend(deque.pop_front());
                            None
                        }
                    };
                    if pushed_ok == Some(true) {
                        my_pushed.push(id);
                    }
                }
                pushed.lock().extend(my_pushed);
                popped.lock().extend(my_popped);
            })
            .map_err(|e| e.to_string())?;
            let (mut pushed, mut popped) = (pushed.into_inner(), popped.into_inner());
            let (size, valid, remaining) = if on_deque {
                (deque.size(), deque.valid(), deque.drain())
            } else {
                (vector.size(), vector.valid(), vector.drain())
            };
            let name = if on_deque { "deque" } else { "vector" };
            ensure(valid, || format!("seed {seed}: {name} invalid"))?;
            ensure(pushed.len() as Index - popped.len() as Index == size, || {
                format!(
                    "seed {seed}: {name} pushed {} popped {} size {size}",
                    pushed.len(),
                    popped.len()
                )
            })?;
            popped.extend(remaining);
            pushed.sort_unstable();
            popped.sort_unstable();
            ensure(pushed == popped, || format!("seed {seed}: {name} multisets differ"))?;
            vector.destroy().map_err(|e| e.to_string())?;
            deque.destroy().map_err(|e| e.to_string())?;
        }
    }
    Ok("1000 seeds for each container".into())
}

/// FIFO and LIFO sequences of length 1000 against `VecDeque`.
fn deque_ordering() -> Outcome {
    let d = ParDeque::<u32>::create(1000).map_err(|e| e.to_string())?;
    let patterns: [(&str, fn(&ParDeque<u32>, &mut VecDeque<u32>, u32) -> bool); 3] = [
        ("fifo", |d, r, x| {
            r.push_back(x);
            d.push_back(x)
        }),
        ("lifo", |d, r, x| {
            r.push_back(x);
            d.push_back(x)
        }),
        ("lifo-front", |d, r, x| {
            r.push_front(x);
            d.push_front(x)
        }),
    ];
    for (name, push) in patterns {
        let mut reference = VecDeque::new();
        for x in 0..1000u32 {
            ensure(push(&d, &mut reference, x * 3 + 1), || format!("{name}: push {x} failed"))?;
        }
        ensure(!d.push_back(0), || format!("{name}: push beyond capacity succeeded"))?;
        for i in 0..1000 {
            let (got, want) = match name {
                "fifo" => (d.pop_front(), reference.pop_front()),
                "lifo" => (d.pop_back(), reference.pop_back()),
                _ => (d.pop_front(), reference.pop_front()),
            };
            ensure(got == want, || format!("{name}: pop {i} gave {got:?}, expected {want:?}"))?;
        }
        ensure(d.pop_front().is_none() && d.pop_back().is_none(), || {
            format!("{name}: not empty at the end")
        })?;
    }
    d.destroy().map_err(|e| e.to_string())?;
    Ok("fifo, lifo at the back, lifo at the front".into())
}

/// k racing threads on one bit and on one lock: exactly one winner.
fn single_winner_primitives() -> Outcome {
    for k in [2i64, 8, 64] {
        for trial in 0..1000u64 {
            let bits = Bitset::new(4, false);
            let locks = MutexArray::new(4);
            let (bit_wins, lock_wins) = (AtomicUsize::new(0), AtomicUsize::new(0));
            let config = LaunchConfig::new((2 * k) as Index).workers(8).seed(trial);
            launch(config, |i| {
                if i % 2 == 0 {
                    if !bits.set(1) {
                        bit_wins.fetch_add(1, Ordering::Relaxed);
                    }
                } else if locks.try_lock(2) {
                    lock_wins.fetch_add(1, Ordering::Relaxed);
                }
            })
            .map_err(|e| e.to_string())?;
            let (b, l) = (bit_wins.into_inner(), lock_wins.into_inner());
            ensure(b == 1 && l == 1, || {
                format!("k={k} trial {trial}: {b} bit winners, {l} lock winners")
            })?;
        }
    }
    Ok("k in {2, 8, 64}, 1000 trials each".into())
}

/// Double destroy and out-of-bounds copies are diagnosed; a create/destroy
/// fuzz keeps the live count equal to a shadow count.
fn leak_detector() -> Outcome {
    let reg = Registry::new();
    let a = reg
        .create_array(MemorySpace::Device, 10, 1.5f32)
        .map_err(|e| e.to_string())?;
    reg.destroy_array(a).map_err(|e| e.to_string())?;
    let double = reg.destroy_array(a);
    ensure(double == Err(MemoryError::DoubleFree(a.id())), || {
        format!("double destroy gave {double:?}")
    })?;

    let src = reg
        .create_array(MemorySpace::Host, 4, 7u8)
        .map_err(|e| e.to_string())?;
    let dst = reg
        .create_array(MemorySpace::Device, 8, 0u8)
        .map_err(|e| e.to_string())?;
    let oob = reg.copy_array(src, 5, dst, Direction::HOST_TO_DEVICE, true);
    ensure(
        matches!(
            oob,
            Err(MemoryError::BoundsViolation {
                side: CopySide::Source,
                count: 5,
                length: 4
            })
        ),
        || format!("out-of-bounds copy gave {oob:?}"),
    )?;
    let msgs = (
        double.unwrap_err().to_string(),
        oob.unwrap_err().to_string(),
    );
    ensure(msgs.0 != msgs.1, || "diagnostics are not distinct".into())?;
    reg.destroy_array(src).map_err(|e| e.to_string())?;
    reg.destroy_array(dst).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut shadow: HashMap<u64, Index> = HashMap::new();
    let mut live = Vec::new();
    for step in 0..10_000 {
        if live.is_empty() || rng.random_bool(0.55) {
            let len = rng.random_range(1..50);
            let space = if rng.random_bool(0.5) {
                MemorySpace::Host
            } else {
                MemorySpace::Device
            };
            let arr = reg.create_array(space, len, 0u16).map_err(|e| e.to_string())?;
            shadow.insert(arr.id().get(), len);
            live.push(arr);
        } else {
            let arr = live.swap_remove(rng.random_range(0..live.len()));
            reg.destroy_array(arr).map_err(|e| e.to_string())?;
            shadow.remove(&arr.id().get());
        }
        if step % 1000 == 999 {
            let report = reg.report();
            ensure(report.live_count as usize == shadow.len(), || {
                format!("step {step}: live {} vs shadow {}", report.live_count, shadow.len())
            })?;
        }
    }
    let report = reg.report();
    let shadow_bytes: Index = shadow.values().map(|len| len * 2).sum();
    ensure(
        report.live_count as usize == shadow.len() && report.live_bytes == shadow_bytes,
        || format!("final live {} vs shadow {}", report.live_count, shadow.len()),
    )?;
    Ok(format!("distinct diagnostics; {} live after fuzz", shadow.len()))
}

fn spatial_hash_values() -> Outcome {
    let independent = |x: i64, y: i64, z: i64| {
        ((x * 73_856_093) ^ (y * 19_349_669) ^ (z * 83_492_791)) as u64
    };
    ensure(spatial_hash(0, 0, 0) == 0, || "hash(0,0,0) != 0".into())?;
    ensure(spatial_hash(1, 0, 0) == 73_856_093, || "hash(1,0,0)".into())?;
    let h = spatial_hash(1, 2, 3);
    ensure(h == independent(1, 2, 3), || format!("hash(1,2,3) = {h}"))?;
    ensure(
        BlockCoord::new(1, 2, 3).default_hash() == independent(1, 2, 3),
        || "block hash disagrees".into(),
    )?;
    Ok(format!("hash(1,2,3) = {h}"))
}

/// Neighbours `b - d`, d in {0,1}^3, that lie inside the `extent`^3 grid.
fn update_set_oracle(blocks: &[BlockCoord], extent: i16) -> BTreeSet<(i16, i16, i16)> {
    let mut out = BTreeSet::new();
    for b in blocks {
        for dx in 0..2 {
            for dy in 0..2 {
                for dz in 0..2 {
                    let c = (b.x - dx, b.y - dy, b.z - dz);
                    let inside = |v: i16| (0..extent).contains(&v);
                    if inside(c.0) && inside(c.1) && inside(c.2) {
                        out.insert(c);
                    }
                }
            }
        }
    }
    out
}

fn update_set_demo() -> Outcome {
    let map = dense_block_map(4).map_err(|e| e.to_string())?;
    let set = BlockSet::create(128).map_err(|e| e.to_string())?;
    for seed in 0..100u64 {
        set.clear();
        let blocks = random_blocks(4, 16, seed);
        let config = LaunchConfig::new(0).workers(8).seed(seed);
        let report = compute_update_set(&blocks, &map, &set, config).map_err(|e| e.to_string())?;
        let got: BTreeSet<_> = set.device_range().iter().map(|b| (b.x, b.y, b.z)).collect();
        let want = update_set_oracle(&blocks, 4);
        ensure(report.rejected == 0 && got == want && set.valid(), || {
            format!("seed {seed}: {} blocks vs {} expected", got.len(), want.len())
        })?;
    }
    set.destroy().map_err(|e| e.to_string())?;
    map.destroy().map_err(|e| e.to_string())?;
    Ok("100 seeds match the neighbour oracle".into())
}

/// Sign changes along cell edges, evaluated straight from the sphere
/// formula.
fn extract_oracle(extent: usize) -> i64 {
    let c = extent as f64 / 2.0;
    let r = 0.35 * extent as f64;
    let inside = |x: usize, y: usize, z: usize| {
        let d = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2)).sqrt();
        d - r < 0.0
    };
    let mut total = 0;
    // Every grid edge is shared by several cells; count it once per cell.
    for z in 0..extent {
        for y in 0..extent {
            for x in 0..extent {
                let corners: Vec<(usize, usize, usize)> = (0..8)
                    .map(|k| (x + (k & 1), y + ((k >> 1) & 1), z + ((k >> 2) & 1)))
                    .collect();
                for a in 0..8 {
                    for b in a + 1..8 {
                        let (p, q) = (corners[a], corners[b]);
                        let manhattan = p.0.abs_diff(q.0) + p.1.abs_diff(q.1) + p.2.abs_diff(q.2);
                        if manhattan == 1 && inside(p.0, p.1, p.2) != inside(q.0, q.1, q.2) {
                            total += 1;
                        }
                    }
                }
            }
        }
    }
    total
}

fn extract_count_demo() -> Outcome {
    let mut totals = Vec::new();
    for extent in [8usize, 16, 32] {
        let want = extract_oracle(extent);
        let field = SphereField::with_default_radius(extent);
        let out = ParVector::create(12 * field.cell_count()).map_err(|e| e.to_string())?;
        for workers in [1usize, 4, 8] {
            let config = LaunchConfig::new(0).workers(workers).seed(extent as u64 + workers as u64);
            let r = extract_count(&field, &out, config).map_err(|e| e.to_string())?;
            ensure(r.shortfall == 0 && r.appended as i64 == want, || {
                format!("extent {extent}, {workers} workers: {} vs {want}", r.appended)
            })?;
        }
        out.destroy().map_err(|e| e.to_string())?;
        totals.push(format!("{extent}:{want}"));
    }
    Ok(format!("totals {}", totals.join(" ")))
}

/// Lookups into a bucket whose lock is held must still finish.
fn non_blocking_lookup() -> Outcome {
    let set = UnorderedSet::create_with(64, HashFn::new(|_: &u32| 0), EqualTo)
        .map_err(|e| e.to_string())?;
    for k in 0..32u32 {
        set.insert(k);
    }
    let guard = set
        .try_lock_bucket_of(&0)
        .ok_or_else(|| "bucket lock unexpectedly taken".to_string())?;
    let readers = set.clone();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let wrong = AtomicUsize::new(0);
        let r = launch(LaunchConfig::new(20_000).workers(8).seed(12), |i| {
            let k = (i % 64) as u32;
            let present = k < 32;
            let ok = if i % 2 == 0 {
                readers.contains(&k) == present
            } else {
                readers.find(&k).is_end() != present
            };
            if !ok {
                wrong.fetch_add(1, Ordering::Relaxed);
            }
        });
        let _ = tx.send((r, wrong.into_inner()));
    });
    let outcome = rx.recv_timeout(Duration::from_secs(3));
    let still_locked = set.base().try_lock_bucket_of(&0).is_none();
    drop(guard);
    match outcome {
        Ok((Ok(()), 0)) if still_locked => {
            set.destroy().map_err(|e| e.to_string())?;
            Ok("20000 lookups finished while the lock was held".into())
        }
        Ok((Ok(()), wrong)) => Err(format!("{wrong} wrong answers (lock held: {still_locked})")),
        Ok((Err(e), _)) => Err(e.to_string()),
        Err(_) => Err("lookups did not finish within the 3 s watchdog".into()),
    }
}

type Criterion = (&'static str, f64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("uniqueness under contention", 5.0, uniqueness_under_contention),
        ("capacity-only failure", 5.0, capacity_only_failure),
        ("sequential oracle equivalence", 2.0, sequential_oracle),
        ("per-key linearizability", 30.0, per_key_linearizability),
        ("vector/deque conservation", 30.0, sequential_conservation),
        ("deque ordering", 1.0, deque_ordering),
        ("bitset/mutex single winner", 10.0, single_winner_primitives),
        ("leak detector", 5.0, leak_detector),
        ("spatial hash", 1.0, spatial_hash_values),
        ("update-set demo", 10.0, update_set_demo),
        ("extract-count demo", 10.0, extract_count_demo),
        ("non-blocking lookup", 5.0, non_blocking_lookup),
    ];
    let mut failed = 0;
    for (n, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs >= budget => Err(format!("took {secs:.2} s, budget {budget} s")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {why}", n + 1);
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
