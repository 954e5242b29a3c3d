//! The voxel-block workloads of the demo application, as library code so
//! that tests, the CLI and the browser demo share one implementation.

mod blocks;
mod extract;
mod select;
pub mod stress;
mod update_set;

pub use blocks::{candidates, dense_block_map, random_blocks, BlockCoord, BlockMap, BlockSet};
pub use extract::{extract_count, EdgeCrossing, ExtractReport, SphereField, CELL_EDGES};
pub use select::{select_blocks, BlockBox};
pub use update_set::{compute_update_set, StreamSet, UpdateSetReport};
