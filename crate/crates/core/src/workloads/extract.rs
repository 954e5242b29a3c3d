use std::sync::atomic::{AtomicI64, Ordering};

use crate::index::Index;
use crate::launch::{launch, LaunchConfig, LaunchError};
use crate::sequential::ParVector;

/// Corner pairs of the 12 edges of a cube. Corner `c` sits at offset
/// `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
pub const CELL_EDGES: [(u8, u8); 12] = [
    (0, 1), (2, 3), (4, 5), (6, 7), // along x
    (0, 2), (1, 3), (4, 6), (5, 7), // along y
    (0, 4), (1, 5), (2, 6), (3, 7), // along z
];

/// Signed distance to a sphere, sampled on the `(extent + 1)^3` corners of
/// an `extent^3` cell grid. The sphere is centred in the grid.
#[derive(Debug, Clone)]
pub struct SphereField {
    extent: usize,
    values: Vec<f64>,
}

impl SphereField {
    pub fn new(extent: usize, radius: f64) -> SphereField {
        let n = extent + 1;
        let c = extent as f64 / 2.0;
        let mut values = Vec::with_capacity(n * n * n);
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let (dx, dy, dz) = (x as f64 - c, y as f64 - c, z as f64 - c);
                    values.push((dx * dx + dy * dy + dz * dz).sqrt() - radius);
                }
            }
        }
        SphereField { extent, values }
    }

    /// The field used when no radius is given: 0.35 of the extent.
    pub fn with_default_radius(extent: usize) -> SphereField {
        SphereField::new(extent, 0.35 * extent as f64)
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn cell_count(&self) -> Index {
        (self.extent * self.extent * self.extent) as Index
    }

    pub fn corner(&self, x: usize, y: usize, z: usize) -> f64 {
        let n = self.extent + 1;
        self.values[(z * n + y) * n + x]
    }

    /// Indices into [`CELL_EDGES`] of the edges of `cell` whose endpoints
    /// lie on different sides of the surface.
    pub fn crossings(&self, cell: Index) -> impl Iterator<Item = u8> + '_ {
        let e = self.extent;
        let c = cell as usize;
        let (x, y, z) = (c % e, (c / e) % e, c / (e * e));
        let inside: [bool; 8] = std::array::from_fn(|k| {
            self.corner(x + (k & 1), y + ((k >> 1) & 1), z + ((k >> 2) & 1)) < 0.0
        });
        CELL_EDGES
            .iter()
            .enumerate()
            .filter(move |(_, &(a, b))| inside[a as usize] != inside[b as usize])
            .map(|(i, _)| i as u8)
    }
}

/// One output record: a surface crossing on edge `edge` of cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeCrossing {
    pub cell: Index,
    pub edge: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractReport {
    pub appended: Index,
    /// Records that did not fit into the output.
    pub shortfall: Index,
}

impl ExtractReport {
    pub fn total(&self) -> Index {
        self.appended + self.shortfall
    }
}

/// One logical thread per cell appends a record for each of the cell's
/// crossings. `out` is cleared first.
pub fn extract_count(
    field: &SphereField,
    out: &ParVector<EdgeCrossing>,
    config: LaunchConfig,
) -> Result<ExtractReport, LaunchError> {
    out.clear();
    let shortfall = AtomicI64::new(0);
    launch(
        LaunchConfig {
            total_threads: field.cell_count(),
            ..config
        },
        |cell| {
            for edge in field.crossings(cell) {
                if !out.push_back(EdgeCrossing { cell, edge }) {
                    shortfall.fetch_add(1, Ordering::Relaxed);
                }
            }
        },
    )?;
    Ok(ExtractReport {
        appended: out.size(),
        shortfall: shortfall.into_inner() as Index,
    })
}
