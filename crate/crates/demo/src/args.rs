use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use parastore::workloads::{BlockBox, BlockCoord};

/// Spatial-hashing workloads, stress tests and benchmarks for the parastore
/// containers.
#[derive(Debug, Parser)]
#[command(name = "parastore-demo", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Capacity of the container under test (command-specific default).
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(1..))]
    pub capacity: Option<i64>,

    /// Edge length of the block grid.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(i16).range(1..))]
    pub extent: i16,

    /// Logical threads: input blocks, operations per round or per
    /// measurement, depending on the command.
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(1..))]
    pub threads: Option<i64>,

    /// Physical worker threads [default: hardware concurrency].
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    /// Seed for generated inputs and for stress scheduling of launches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Sort CSV rows so output is reproducible.
    #[arg(long, global = true)]
    pub sorted: bool,

    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blocks needing re-extraction after the given input blocks changed.
    UpdateSet,
    /// Blocks of a dense grid inside an axis-aligned box.
    Select {
        /// Inclusive box `x0,y0,z0,x1,y1,z1` [default: lower half along x].
        #[arg(long = "box")]
        bounds: Option<BoxArg>,
    },
    /// Edge crossings of a sphere surface, appended per cell.
    ExtractCount {
        /// Sphere radius in cells [default: 0.35 * extent].
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Randomized concurrent operation mixes with invariant checks.
    Stress {
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
    },
    /// Throughput per container operation at 1, 2, 4, ... workers.
    Bench,
    /// Runs every workload, then lists allocations that were never released.
    Leaks {
        /// Skip destroying one container, to see a leak reported.
        #[arg(long, hide = true)]
        inject_leak: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxArg(pub BlockBox);

impl FromStr for BoxArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<i16> = s
            .split(',')
            .map(|p| p.trim().parse::<i16>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [x0, y0, z0, x1, y1, z1] => Ok(BoxArg(BlockBox {
                lo: BlockCoord::new(x0, y0, z0),
                hi: BlockCoord::new(x1, y1, z1),
            })),
            _ => Err(format!("expected 6 comma-separated integers, got {}", v.len())),
        }
    }
}
