use std::fmt::Write as _;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use parastore::launch::default_workers;
use parastore::{launch, Index, LaunchConfig, LaunchError, ParDeque, ParVector, UnorderedMap, UnorderedSet};

use crate::args::Cli;
use crate::commands::{to_index, Failure, Report};

const CONTENTION_LIMIT: Duration = Duration::from_secs(60);

struct Row {
    container: &'static str,
    op: &'static str,
    workers: usize,
    ops_per_sec: f64,
}

fn timed(
    n: Index,
    workers: usize,
    body: impl Fn(Index) + Sync,
) -> Result<f64, LaunchError> {
    let start = Instant::now();
    launch(LaunchConfig::new(n).workers(workers), body)?;
    Ok(n as f64 / start.elapsed().as_secs_f64().max(1e-9))
}

fn measure(n: Index, workers: usize, rows: &mut Vec<Row>) -> Result<(), Failure> {
    let mut push = |container, op, ops_per_sec| {
        rows.push(Row { container, op, workers, ops_per_sec })
    };

    let map = UnorderedMap::<u64, u64>::create(n)?;
    push("map", "insert", timed(n, workers, |i| {
        map.insert(i as u64, i as u64);
    })?);
    push("map", "find", timed(n, workers, |i| {
        map.contains(&(i as u64));
    })?);
    push("map", "erase", timed(n, workers, |i| {
        map.erase(&(i as u64));
    })?);
    map.destroy()?;

    let vector = ParVector::<u64>::create(n)?;
    push("vector", "push_back", timed(n, workers, |i| {
        vector.push_back(i as u64);
    })?);
    push("vector", "pop_back", timed(n, workers, |_| {
        vector.pop_back();
    })?);
    vector.destroy()?;

    let deque = ParDeque::<u64>::create(n)?;
    push("deque", "push_back", timed(n, workers, |i| {
        deque.push_back(i as u64);
    })?);
    push("deque", "pop_front", timed(n, workers, |_| {
        deque.pop_front();
    })?);
    deque.destroy()?;
    Ok(())
}

/// Every logical thread inserts and erases the same key. Runs on its own
/// thread so a livelock shows up as a timeout rather than a hang.
fn contention(n: Index, workers: usize) -> Result<Option<f64>, Failure> {
    let set = UnorderedSet::<u64>::create(4)?;
    let worker_set = set.clone();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let r = timed(n, workers, |_| {
            worker_set.insert(7);
            worker_set.erase(&7);
        });
        let _ = tx.send(r);
    });
    match rx.recv_timeout(CONTENTION_LIMIT) {
        Ok(r) => {
            let rate = r?;
            set.destroy()?;
            Ok(Some(rate))
        }
        // The stuck thread still holds the set; leave it registered.
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let n = cli.threads.map(to_index).transpose()?.unwrap_or(1 << 16);
    let max_workers = cli.workers.map_or_else(default_workers, |w| w as usize);
    let counts: Vec<usize> = std::iter::successors(Some(1usize), |w| w.checked_mul(2))
        .take_while(|&w| w < max_workers)
        .chain(std::iter::once(max_workers))
        .collect();

    let mut rows = Vec::new();
    let mut report = Report::default();
    for &w in &counts {
        measure(n, w, &mut rows)?;
        match contention(n, w)? {
            Some(rate) => rows.push(Row {
                container: "set",
                op: "same_key_insert_erase",
                workers: w,
                ops_per_sec: rate,
            }),
            None => {
                report.violation = Some(format!(
                    "same-key insert/erase on {w} workers did not finish within {}s",
                    CONTENTION_LIMIT.as_secs()
                ));
                break;
            }
        }
    }

    let mut csv = String::from("container,op,workers,ops_per_sec\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{:.0}", r.container, r.op, r.workers, r.ops_per_sec);
    }
    report.csv = csv;
    report.summary.push(format!(
        "bench: {n} operations per measurement, workers {counts:?}"
    ));
    Ok(report)
}
