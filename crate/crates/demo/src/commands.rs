use std::collections::BTreeSet;
use std::fmt::Write as _;

use parastore::launch::default_workers;
use parastore::memory::registry_report;
use parastore::workloads::stress::{self, StressSpec};
use parastore::workloads::{
    candidates, compute_update_set, dense_block_map, extract_count, random_blocks, select_blocks,
    BlockBox, BlockCoord, BlockSet, EdgeCrossing, SphereField,
};
use parastore::{Index, LaunchConfig, ParVector};

use crate::args::Cli;

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub csv: String,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    /// Set when an invariant check failed.
    pub violation: Option<String>,
}

/// A command that could not run to completion.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

pub fn launch_config(cli: &Cli) -> LaunchConfig {
    LaunchConfig::new(0)
        .workers(cli.workers.map_or_else(default_workers, |w| w as usize))
        .seed_opt(cli.seed)
}

pub fn to_index(v: i64) -> Result<Index, Failure> {
    Index::try_from(v).map_err(|_| Failure(format!("{v} does not fit the index type")))
}

fn data_seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(1)
}

fn cube(extent: i16) -> Index {
    let e = Index::from(extent);
    e * e * e
}

fn blocks_csv(mut blocks: Vec<BlockCoord>, sorted: bool) -> String {
    if sorted {
        blocks.sort_unstable();
    }
    let mut csv = String::from("x,y,z\n");
    for b in blocks {
        let _ = writeln!(csv, "{},{},{}", b.x, b.y, b.z);
    }
    csv
}

pub fn update_set(cli: &Cli) -> Result<Report, Failure> {
    let n = cli.threads.unwrap_or(16) as usize;
    let requested = cli.capacity.map(to_index).transpose()?;
    let map = dense_block_map(cli.extent)?;
    let blocks = random_blocks(cli.extent, n, data_seed(cli));
    let capacity = requested.unwrap_or_else(|| (8 * n as Index).min(cube(cli.extent)));
    let set = BlockSet::create(capacity)?;
    let stats = compute_update_set(&blocks, &map, &set, launch_config(cli))?;

    // The kernel body, run in a plain loop.
    let mut oracle = BTreeSet::new();
    for b in &blocks {
        oracle.extend(candidates(*b).into_iter().filter(|c| map.contains(c)));
    }
    let got: Vec<BlockCoord> = set.device_range().iter().collect();
    let got_set: BTreeSet<BlockCoord> = got.iter().copied().collect();

    let mut report = Report::default();
    if let Err(e) = set.check() {
        report.violation = Some(format!("update set is inconsistent: {e}"));
    } else if got_set.len() != got.len() {
        report.violation = Some("update set holds duplicate blocks".into());
    } else if stats.rejected == 0 && got_set != oracle {
        report.violation = Some(format!(
            "update set has {} blocks, the sequential run {}",
            got_set.len(),
            oracle.len()
        ));
    } else if stats.rejected > 0 && !got_set.is_subset(&oracle) {
        report.violation = Some("update set holds blocks the sequential run does not".into());
    }
    report.summary.push(format!(
        "update-set: {n} input blocks, {} blocks in the update set ({} candidates found)",
        got.len(),
        stats.candidates_found
    ));
    if stats.rejected > 0 {
        report.summary.push(format!(
            "warning: capacity {capacity} exhausted, {} insertions rejected, {} distinct blocks missing",
            stats.rejected,
            oracle.len() - got_set.len()
        ));
    }
    report.csv = blocks_csv(got, cli.sorted);
    set.destroy()?;
    map.destroy()?;
    Ok(report)
}

pub fn select(cli: &Cli, bounds: Option<BlockBox>) -> Result<Report, Failure> {
    let e = cli.extent;
    let bounds = bounds.unwrap_or(BlockBox {
        lo: BlockCoord::new(0, 0, 0),
        hi: BlockCoord::new(e / 2 - 1, e - 1, e - 1),
    });
    let set = BlockSet::create(cube(e))?;
    let grid = (0..e).flat_map(|x| (0..e).flat_map(move |y| (0..e).map(move |z| BlockCoord::new(x, y, z))));
    set.insert_range(grid)?;
    let out = ParVector::create(cli.capacity.map(to_index).transpose()?.unwrap_or(cube(e)))?;
    let stats = select_blocks(&set, bounds, &out, launch_config(cli))?;

    let mut oracle: Vec<BlockCoord> = set.device_range().iter().filter(|b| bounds.contains(b)).collect();
    oracle.sort_unstable();
    let mut got = out.drain();
    got.sort_unstable();

    let mut report = Report::default();
    if stats.overflowed == 0 && got != oracle {
        report.violation = Some(format!(
            "selected {} blocks, the sequential filter {}",
            got.len(),
            oracle.len()
        ));
    }
    report.summary.push(format!(
        "select: {} of {} blocks inside {:?}..={:?}",
        stats.matched(),
        set.size(),
        (bounds.lo.x, bounds.lo.y, bounds.lo.z),
        (bounds.hi.x, bounds.hi.y, bounds.hi.z)
    ));
    if stats.overflowed > 0 {
        report.summary.push(format!(
            "warning: output capacity {} exhausted, {} blocks dropped",
            out.capacity(),
            stats.overflowed
        ));
    }
    report.csv = blocks_csv(got, true);
    out.destroy()?;
    set.destroy()?;
    Ok(report)
}

pub fn extract(cli: &Cli, radius: Option<f64>) -> Result<Report, Failure> {
    let e = cli.extent as usize;
    let field = match radius {
        Some(r) => SphereField::new(e, r),
        None => SphereField::with_default_radius(e),
    };
    let capacity = match cli.capacity {
        Some(c) => to_index(c)?,
        None => (12 * field.cell_count()).min(1 << 24),
    };
    let out = ParVector::<EdgeCrossing>::create(capacity)?;
    let stats = extract_count(&field, &out, launch_config(cli))?;
    let sequential: Index = (0..field.cell_count())
        .map(|c| field.crossings(c).count() as Index)
        .sum();

    let mut report = Report::default();
    if stats.total() != sequential {
        report.violation = Some(format!(
            "parallel run produced {} records, the sequential run {sequential}",
            stats.total()
        ));
    }
    report.summary.push(format!(
        "extract-count: {} cells, {} records appended",
        field.cell_count(),
        stats.appended
    ));
    if stats.shortfall > 0 {
        report.summary.push(format!(
            "warning: output capacity {capacity} exhausted, shortfall of {} records",
            stats.shortfall
        ));
    }
    let mut records = out.drain();
    if cli.sorted {
        records.sort_unstable();
    }
    let mut csv = String::from("cell,edge\n");
    for r in records {
        let _ = writeln!(csv, "{},{}", r.cell, r.edge);
    }
    report.csv = csv;
    out.destroy()?;
    Ok(report)
}

pub fn stress(cli: &Cli, rounds: u64) -> Result<Report, Failure> {
    let spec = StressSpec {
        capacity: cli.capacity.map(to_index).transpose()?.unwrap_or(256),
        ops_per_round: cli.threads.map(to_index).transpose()?.unwrap_or(2048),
        rounds: rounds as usize,
        // Contention needs several workers even on small machines.
        workers: cli.workers.map_or(8, |w| w as usize),
        seed: data_seed(cli),
    };
    let result = stress::run(&spec)?;
    let mut report = Report::default();
    let mut csv = String::from("check,failures,first_failure\n");
    for (name, c) in &result.checks {
        let detail = c.first_failure.as_deref().unwrap_or("");
        let _ = writeln!(csv, "{name},{},{}", c.failures, detail.replace(',', ";"));
    }
    report.csv = csv;
    report.summary.push(format!(
        "stress: {} ops in {} rounds on {} workers; {} inserted, {} erased, {} exhausted, {} pushed, {} popped",
        result.ops, spec.rounds, spec.workers, result.inserted, result.erased, result.exhausted, result.pushed, result.popped
    ));
    report
        .summary
        .push(format!("transcript {:016x}", result.transcript_hash));
    if !result.passed() {
        let failed: Vec<&str> = result
            .checks
            .iter()
            .filter(|(_, c)| c.failures > 0)
            .map(|(n, _)| *n)
            .collect();
        report.violation = Some(format!("failed checks: {}", failed.join(", ")));
    }
    Ok(report)
}

pub fn leaks(cli: &Cli, inject_leak: bool) -> Result<Report, Failure> {
    let small = Cli {
        command: crate::args::Command::Leaks { inject_leak },
        capacity: None,
        extent: cli.extent.min(8),
        threads: Some(cli.threads.unwrap_or(16).min(4096)),
        workers: cli.workers,
        seed: cli.seed,
        sorted: false,
        out: None,
    };
    update_set(&small)?;
    select(&small, None)?;
    extract(&small, None)?;
    stress(&small, 2)?;
    if inject_leak {
        let forgotten = ParVector::<u64>::create(16)?;
        forgotten.push_back(1);
    }

    let live = registry_report();
    let mut report = Report {
        csv: live.to_csv(),
        ..Report::default()
    };
    report.summary.push(format!(
        "leaks: {} live allocations, {} bytes",
        live.live_count, live.live_bytes
    ));
    if live.live_count > 0 {
        report.violation = Some(format!("{} allocations were never released", live.live_count));
    }
    Ok(report)
}
