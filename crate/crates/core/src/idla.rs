//! Internal diffusion limited aggregation: bugs random-walk from the origin
//! and settle on the first vacant site they reach.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{safe_radius, Coord2, DenseGrid, Direction, SeededRandom};
use crate::rotor::{shape_stats, BlobStats, CardStacks};

/// Hop budget for a single bug.
pub const BUG_STEP_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdlaCell {
    pub occupied: bool,
    /// Indexed by [`Direction::index`].
    pub departures: [u64; 4],
}

impl IdlaCell {
    pub fn total_departures(&self) -> u64 {
        self.departures.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdlaBlob {
    grid: DenseGrid<IdlaCell>,
    n: u64,
    seed: u64,
}

impl IdlaBlob {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &DenseGrid<IdlaCell> {
        &self.grid
    }

    pub fn is_occupied(&self, c: Coord2) -> bool {
        self.grid.get(c).occupied
    }

    pub fn occupied_sites(&self) -> Vec<Coord2> {
        self.grid
            .iter()
            .filter(|(_, c)| c.occupied)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn stats(&self) -> BlobStats {
        shape_stats(self.n, &self.grid, |c| c.occupied)
    }

    fn add_bug(&mut self, rng: &mut SeededRandom) -> Result<Coord2> {
        let strides = Direction::ALL.map(|d| self.grid.stride(d));
        let mut i = self.grid.index_unchecked(Coord2::ORIGIN);
        let cells = self.grid.cells_mut();
        let mut hops = 0u64;
        while cells[i].occupied {
            if hops >= BUG_STEP_CAP {
                return Err(Error::StepCapExceeded {
                    what: "idla bug",
                    cap: BUG_STEP_CAP,
                });
            }
            hops += 1;
            let d = rng.two_bits() as usize;
            cells[i].departures[d] += 1;
            i = (i as isize + strides[d]) as usize;
        }
        let c = self.grid.coord_of(i);
        self.grid.ensure(c, 1)?;
        self.grid.get_mut(c)?.occupied = true;
        self.n += 1;
        Ok(c)
    }
}

/// `n` IDLA bugs from the origin.
pub fn run_idla(n: u64, seed: u64) -> Result<IdlaBlob> {
    let mut blob = IdlaBlob {
        grid: DenseGrid::try_with_radius(safe_radius(n), IdlaCell::default())?,
        n: 0,
        seed,
    };
    let mut rng = SeededRandom::new(seed);
    for _ in 0..n {
        blob.add_bug(&mut rng)?;
    }
    Ok(blob)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundnessReport {
    pub n: u64,
    pub seed: u64,
    /// `sqrt(n / pi)`.
    pub r_eff: f64,
    pub delta_in: f64,
    pub delta_out: f64,
    /// Whether a negative delta was raised to 0.
    pub clamped: bool,
}

/// Inradius deficit and outradius excess against the disk of area `n`.
/// Negative values, which only happen below one lattice unit, are clamped to 0.
pub fn roundness(blob: &IdlaBlob) -> RoundnessReport {
    let s = blob.stats();
    let clamped = s.delta_in < 0.0 || s.delta_out < 0.0;
    RoundnessReport {
        n: blob.n,
        seed: blob.seed,
        r_eff: s.effective_radius,
        delta_in: s.delta_in.max(0.0),
        delta_out: s.delta_out.max(0.0),
        clamped,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub n: u64,
    pub seed: u64,
    pub settled: u64,
    /// Site and direction of the first card that was not there.
    pub failed_at: Option<(Coord2, Direction)>,
    /// Row-major.
    #[serde(skip)]
    pub settled_set: Vec<Coord2>,
}

/// IDLA where every step must spend a card of the chosen direction at the
/// current site. Stops at the first missing card.
pub fn run_coupled(cards: &CardStacks, n: u64, seed: u64) -> CouplingResult {
    let mut rng = SeededRandom::new(seed);
    let mut left = cards.clone();
    let mut occupied = std::collections::BTreeSet::new();
    let mut failed_at = None;
    'bugs: for _ in 0..n {
        let mut p = Coord2::ORIGIN;
        while occupied.contains(&p) {
            let d = rng.direction();
            let mut stack = left.stack(p);
            if stack[d.index()] == 0 {
                failed_at = Some((p, d));
                break 'bugs;
            }
            stack[d.index()] -= 1;
            left.set(p, stack);
            p = p.neighbor(d);
        }
        occupied.insert(p);
    }
    CouplingResult {
        n,
        seed,
        settled: occupied.len() as u64,
        failed_at,
        settled_set: occupied.into_iter().collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedFlowSummary {
    pub n: u64,
    pub runs: u64,
    pub sites_checked: u64,
    /// Sites whose mean residual exceeds three standard errors.
    pub beyond_three_se: u64,
    pub max_abs_z: f64,
    /// Sites where some single run broke exact conservation.
    pub exact_violations: u64,
}

impl ExpectedFlowSummary {
    pub fn fraction_beyond(&self) -> f64 {
        if self.sites_checked == 0 {
            0.0
        } else {
            self.beyond_three_se as f64 / self.sites_checked as f64
        }
    }
}

/// Averages departures over `runs` seeds and checks the expected tent
/// identity `sum of neighbour d / 4 + n [s = 0] = d(s) + P(s occupied)`.
/// Seeds are `stream(k)` of `seed`.
pub fn expected_flow_check(n: u64, runs: u64, seed: u64) -> Result<ExpectedFlowSummary> {
    let r = safe_radius(n) as i32;
    let side = (2 * r + 1) as usize;
    let at = |p: Coord2| ((p.y + r) as usize) * side + (p.x + r) as usize;
    let mut sum = vec![0f64; side * side];
    let mut sum2 = vec![0f64; side * side];
    let mut exact = vec![false; side * side];
    let master = SeededRandom::new(seed);
    for k in 0..runs {
        let blob = run_idla(n, master.stream(k).next_u64())?;
        for y in -r + 1..r {
            for x in -r + 1..r {
                let p = Coord2::new(x, y);
                let cell = blob.grid.get(p);
                let src = if p == Coord2::ORIGIN { n } else { 0 };
                let mut nbr_total = 0u64;
                let mut arrivals = src;
                for d in Direction::ALL {
                    let q = blob.grid.get(p.neighbor(d));
                    nbr_total += q.total_departures();
                    arrivals += q.departures[d.opposite().index()];
                }
                if arrivals != cell.total_departures() + cell.occupied as u64 {
                    exact[at(p)] = true;
                }
                let res = nbr_total as f64 / 4.0 + src as f64
                    - cell.total_departures() as f64
                    - cell.occupied as u8 as f64;
                sum[at(p)] += res;
                sum2[at(p)] += res * res;
            }
        }
    }
    let m = runs as f64;
    let mut checked = 0u64;
    let mut beyond = 0u64;
    let mut max_z = 0f64;
    for i in 0..side * side {
        if sum2[i] == 0.0 {
            continue;
        }
        checked += 1;
        let mean = sum[i] / m;
        let var = (sum2[i] / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
        let se = (var / m).sqrt();
        let z = if se > 0.0 {
            mean.abs() / se
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
        if z > 3.0 {
            beyond += 1;
        }
    }
    Ok(ExpectedFlowSummary {
        n,
        runs,
        sites_checked: checked,
        beyond_three_se: beyond,
        max_abs_z: max_z,
        exact_violations: exact.iter().filter(|&&e| e).count() as u64,
    })
}
