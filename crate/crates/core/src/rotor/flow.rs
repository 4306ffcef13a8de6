use serde::{Deserialize, Serialize};

use super::{departures_toward, RotorBlob};
use crate::lattice::{Coord2, Direction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowViolation {
    /// Arrivals differ from departures plus the settled bug.
    Conservation {
        site: Coord2,
        arrivals: u64,
        departures: u64,
        occupied: bool,
    },
    /// `4 (d + b) - sum of neighbouring d` is outside `[-12, 12]`.
    Tent { site: Coord2, residual_times_4: i64 },
}

/// Checks bug conservation at every site, and that away from the source
/// `d + b` is within 3 of the neighbour average of `d`.
pub fn flow_check(blob: &RotorBlob) -> Vec<FlowViolation> {
    let g = blob.grid();
    let cells = g.cells();
    let dep = |p: Coord2| g.index_of(p).map_or(0, |j| cells[j].departures);
    let mut out = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let p = g.coord_of(i);
        let mut arrivals = if p == RotorBlob::SOURCE { blob.n() } else { 0 };
        let mut around = 0i64;
        for d in Direction::ALL {
            let q = p.neighbor(d);
            arrivals += departures_toward(dep(q), d.opposite());
            around += dep(q) as i64;
        }
        if arrivals != cell.departures + cell.occupied as u64 {
            out.push(FlowViolation::Conservation {
                site: p,
                arrivals,
                departures: cell.departures,
                occupied: cell.occupied,
            });
        }
        if p != RotorBlob::SOURCE {
            let r = 4 * (cell.departures as i64 + cell.occupied as i64) - around;
            if r.abs() > 12 {
                out.push(FlowViolation::Tent {
                    site: p,
                    residual_times_4: r,
                });
            }
        }
    }
    // Departures from sites on the edge would leave the stored square.
    let r = g.radius() as i32;
    for (p, cell) in g.iter() {
        if cell.departures > 0 && (p.x.abs() == r || p.y.abs() == r) {
            out.push(FlowViolation::Conservation {
                site: p,
                arrivals: 0,
                departures: cell.departures,
                occupied: cell.occupied,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{run, run_sequential};

    #[test]
    fn clean_runs() {
        assert!(flow_check(&run_sequential(1).unwrap()).is_empty());
        assert!(flow_check(&run_sequential(1000).unwrap()).is_empty());
        assert!(flow_check(&run(20_000).unwrap().0).is_empty());
    }

    #[test]
    fn tampering_is_caught() {
        let mut b = run_sequential(300).unwrap();
        b.grid_mut().get_mut(Coord2::new(1, 1)).unwrap().departures += 1;
        let v = flow_check(&b);
        assert!(v
            .iter()
            .any(|x| matches!(x, FlowViolation::Conservation { .. })));
    }
}
