use serde::{Deserialize, Serialize};

use super::RotorBlob;
use crate::lattice::DenseGrid;

/// Roundness summary of an aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobStats {
    pub n: u64,
    pub site_count: u64,
    /// `None` for an empty aggregate.
    pub max_occupied_dist2: Option<i64>,
    pub min_vacant_dist2: i64,
    /// `sqrt(site_count / pi)`.
    pub effective_radius: f64,
    /// `effective_radius - sqrt(min_vacant_dist2)`.
    pub delta_in: f64,
    /// `sqrt(max_occupied_dist2) - effective_radius`.
    pub delta_out: f64,
}

impl BlobStats {
    pub fn of(blob: &RotorBlob) -> Self {
        shape_stats(blob.n(), blob.grid(), |c| c.occupied)
    }

    /// `sqrt(max) - sqrt(min)`, the width of the annulus holding the boundary.
    pub fn gap(&self) -> f64 {
        self.delta_out + self.delta_in
    }
}

/// Scans `grid` for the extreme occupied and vacant distances. Every vacant
/// site closer than the farthest occupied one must lie inside the grid; the
/// aggregates here keep all neighbours of occupied sites stored.
pub fn shape_stats<T: Clone>(
    n: u64,
    grid: &DenseGrid<T>,
    occupied: impl Fn(&T) -> bool,
) -> BlobStats {
    let mut count = 0u64;
    let mut max_occ: Option<i64> = None;
    let mut min_vac = i64::MAX;
    for (p, cell) in grid.iter() {
        let d2 = p.dist2();
        if occupied(cell) {
            count += 1;
            max_occ = Some(max_occ.map_or(d2, |m| m.max(d2)));
        } else {
            min_vac = min_vac.min(d2);
        }
    }
    if min_vac == i64::MAX {
        let r = grid.radius() as i64 + 1;
        min_vac = r * r;
    }
    let eff = (count as f64 / std::f64::consts::PI).sqrt();
    BlobStats {
        n,
        site_count: count,
        max_occupied_dist2: max_occ,
        min_vacant_dist2: min_vac,
        effective_radius: eff,
        delta_in: eff - (min_vac as f64).sqrt(),
        delta_out: max_occ.map_or(0.0, |m| (m as f64).sqrt() - eff),
    }
}
