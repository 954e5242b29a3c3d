//! Property tests of the container invariants.

mod support;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use parking_lot::Mutex;
use proptest::prelude::*;

use parastore::memory::{Direction, Registry};
use parastore::ranges::{select_into, EntryRange};
use parastore::{
    launch, Index, InsertStatus, LaunchConfig, MemorySpace, ParDeque, ParVector, UnorderedMap,
    UnorderedSet,
};

#[derive(Debug, Clone)]
enum MapOp {
    Insert(u16, u32),
    Erase(u16),
    Contains(u16),
    Find(u16),
}

fn map_op(keys: u16) -> impl Strategy<Value = MapOp> {
    prop_oneof![
        (0..keys, any::<u32>()).prop_map(|(k, v)| MapOp::Insert(k, v)),
        (0..keys).prop_map(MapOp::Erase),
        (0..keys).prop_map(MapOp::Contains),
        (0..keys).prop_map(MapOp::Find),
    ]
}

#[derive(Debug, Clone, Copy)]
enum DequeOp {
    PushBack(u32),
    PushFront(u32),
    PopBack,
    PopFront,
    Get(i64),
}

fn deque_op() -> impl Strategy<Value = DequeOp> {
    prop_oneof![
        any::<u32>().prop_map(DequeOp::PushBack),
        any::<u32>().prop_map(DequeOp::PushFront),
        Just(DequeOp::PopBack),
        Just(DequeOp::PopFront),
        (-2i64..20).prop_map(DequeOp::Get),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn map_matches_reference(cap in 1i64..40, ops in prop::collection::vec(map_op(50), 0..300)) {
        let map = UnorderedMap::<u16, u32>::create(cap as Index).unwrap();
        let mut reference = HashMap::new();
        for op in ops {
            match op {
                MapOp::Insert(k, v) => {
                    let status = map.insert(k, v).status;
                    let expected = if reference.contains_key(&k) {
                        InsertStatus::AlreadyPresent
                    } else if (reference.len() as i64) < cap {
                        reference.insert(k, v);
                        InsertStatus::Inserted
                    } else {
                        InsertStatus::CapacityExhausted
                    };
                    prop_assert_eq!(status, expected);
                }
                MapOp::Erase(k) => prop_assert_eq!(map.erase(&k), reference.remove(&k).is_some()),
                MapOp::Contains(k) => prop_assert_eq!(map.contains(&k), reference.contains_key(&k)),
                MapOp::Find(k) => prop_assert_eq!(map.get(&k), reference.get(&k).copied()),
            }
            prop_assert_eq!(map.size() as usize, reference.len());
        }
        prop_assert!(map.valid());
        prop_assert_eq!(map.device_range().len() as usize, reference.len());
        map.destroy().unwrap();
    }

    #[test]
    fn deque_matches_reference(cap in 1i64..12, ops in prop::collection::vec(deque_op(), 0..200)) {
        let d = ParDeque::create(cap as Index).unwrap();
        let mut r = VecDeque::new();
        let full = |r: &VecDeque<u32>| r.len() as i64 >= cap;
        for op in ops {
            match op {
                DequeOp::PushBack(x) => {
                    let ok = !full(&r);
                    if ok { r.push_back(x) }
                    prop_assert_eq!(d.push_back(x), ok);
                }
                DequeOp::PushFront(x) => {
                    let ok = !full(&r);
                    if ok { r.push_front(x) }
                    prop_assert_eq!(d.push_front(x), ok);
                }
                DequeOp::PopBack => prop_assert_eq!(d.pop_back(), r.pop_back()),
                DequeOp::PopFront => prop_assert_eq!(d.pop_front(), r.pop_front()),
                DequeOp::Get(i) => {
                    let want = usize::try_from(i).ok().and_then(|i| r.get(i).copied());
                    prop_assert_eq!(d.get(i as Index), want);
                }
            }
            prop_assert!(d.valid());
        }
        prop_assert_eq!(d.device_range().iter().collect::<Vec<_>>(), r.iter().copied().collect::<Vec<_>>());
        d.destroy().unwrap();
    }

    #[test]
    fn vector_matches_reference(cap in 1i64..12, ops in prop::collection::vec(prop::option::of(any::<u8>()), 0..100)) {
        let v = ParVector::create(cap as Index).unwrap();
        let mut r = Vec::new();
        for op in ops {
            match op {
                Some(x) => {
                    let ok = (r.len() as i64) < cap;
                    if ok { r.push(x) }
                    prop_assert_eq!(v.push_back(x), ok);
                }
                None => prop_assert_eq!(v.pop_back(), r.pop()),
            }
        }
        prop_assert!(v.valid());
        prop_assert_eq!(v.drain(), r);
        v.destroy().unwrap();
    }

    #[test]
    fn registry_live_count_matches_shadow(ops in prop::collection::vec((any::<bool>(), 1i64..20, any::<prop::sample::Index>()), 0..200)) {
        let reg = Registry::new();
        let mut live = Vec::new();
        for (create, len, pick) in ops {
            if create || live.is_empty() {
                live.push(reg.create_array(MemorySpace::Host, len as Index, 3u32).unwrap());
            } else {
                let a = live.swap_remove(pick.index(live.len()));
                reg.destroy_array(a).unwrap();
            }
            prop_assert_eq!(reg.report().live_count as usize, live.len());
        }
        for a in &live {
            let data = reg.read(*a).unwrap();
            prop_assert!(data.iter().all(|&x| x == 3));
        }
    }

    #[test]
    fn copies_stay_within_count(len in 1i64..40, count_frac in 0.0f64..1.0) {
        let reg = Registry::new();
        let count = ((len as f64 * count_frac) as i64).max(1);
        let src = reg.create_array_from(MemorySpace::Host, (0..len as u32).collect()).unwrap();
        let dst = reg.create_array(MemorySpace::Device, len as Index, u32::MAX).unwrap();
        reg.copy_array(src, count as Index, dst, Direction::HOST_TO_DEVICE, true).unwrap();
        let out = reg.read(dst).unwrap();
        for (i, &x) in out.iter().enumerate() {
            if (i as i64) < count {
                prop_assert_eq!(x, i as u32);
            } else {
                prop_assert_eq!(x, u32::MAX);
            }
        }
    }

    #[test]
    fn select_equals_sequential_filter(items in prop::collection::vec(any::<i16>(), 0..200), threshold in any::<i16>(), seed in any::<u64>()) {
        let range = EntryRange::new((0..items.len() as Index).collect(), |p| items[p as usize]);
        let out = ParVector::create(256).unwrap();
        let report = select_into(&range, |x| *x >= threshold, &out, LaunchConfig::new(0).workers(4).seed(seed)).unwrap();
        let mut got = out.drain();
        got.sort_unstable();
        let mut want: Vec<i16> = items.iter().copied().filter(|x| *x >= threshold).collect();
        want.sort_unstable();
        prop_assert_eq!(report.copied as usize, want.len());
        prop_assert_eq!(got, want);
        out.destroy().unwrap();
    }

    #[test]
    fn range_round_trip(keys in prop::collection::btree_set(any::<u32>(), 1..60)) {
        let a = UnorderedSet::<u32>::create(60).unwrap();
        a.insert_range(keys.iter().copied()).unwrap();
        let b = UnorderedSet::<u32>::create(60).unwrap();
        b.insert_range(a.device_range().iter()).unwrap();
        let mut back: Vec<u32> = b.device_range().iter().collect();
        back.sort_unstable();
        prop_assert_eq!(back, keys.into_iter().collect::<Vec<_>>());
        a.destroy().unwrap();
        b.destroy().unwrap();
    }

    #[test]
    fn launch_hits_every_index_once(n in 0i64..500, workers in 1usize..10, seed in prop::option::of(any::<u64>())) {
        let tally: Vec<AtomicU32> = (0..n).map(|_| AtomicU32::new(0)).collect();
        launch(LaunchConfig::new(n as Index).workers(workers).seed_opt(seed), |i| {
            tally[i as usize].fetch_add(1, Ordering::Relaxed);
        }).unwrap();
        prop_assert!(tally.iter().all(|t| t.load(Ordering::Relaxed) == 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// d distinct keys into capacity C: min(d, C) insertions, and the
    /// structure stays consistent.
    #[test]
    fn concurrent_inserts_fail_only_on_capacity(cap in 1i64..80, d in 1i64..120, seed in any::<u64>()) {
        let set = UnorderedSet::<i64>::create(cap as Index).unwrap();
        let inserted = AtomicUsize::new(0);
        launch(LaunchConfig::new((2 * d) as Index).workers(6).seed(seed), |i| {
            if set.insert(i as i64 % d).is_inserted() {
                inserted.fetch_add(1, Ordering::Relaxed);
            }
        }).unwrap();
        prop_assert_eq!(inserted.into_inner() as i64, d.min(cap));
        prop_assert!(set.valid());
        let mut keys: Vec<i64> = set.device_range().iter().collect();
        keys.sort_unstable();
        keys.dedup();
        prop_assert_eq!(keys.len() as i64, d.min(cap));
        set.destroy().unwrap();
    }

    /// Concurrent insert/erase/find mixes leave a consistent structure whose
    /// size is inserted minus erased.
    #[test]
    fn concurrent_mix_conserves_size(cap in 4i64..64, seed in any::<u64>()) {
        let map = UnorderedMap::<u32, u32>::create(cap as Index).unwrap();
        let counts = Mutex::new((0i64, 0i64));
        let keys = (cap * 3 / 2) as u32;
        launch(LaunchConfig::new(600).workers(6).seed(seed), |i| {
            let k = (i as u32).wrapping_mul(2_654_435_761) % keys;
            match i % 3 {
                0 => if map.insert(k, k + 1).is_inserted() { counts.lock().0 += 1 },
                1 => if map.erase(&k) { counts.lock().1 += 1 },
                _ => assert!(map.get(&k).is_none_or(|v| v == k + 1)),
            }
        }).unwrap();
        let (ins, era) = counts.into_inner();
        prop_assert!(map.valid(), "{:?}", map.check());
        prop_assert_eq!(map.size() as i64, ins - era);
        prop_assert_eq!(map.device_range().len(), map.size());
        map.destroy().unwrap();
    }
}
