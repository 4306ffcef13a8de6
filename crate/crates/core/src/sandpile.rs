//! Sandpiles grown from a pile of grains at the origin.
//!
//! A site topples by sending one grain to each neighbour. In the standard pile
//! a site topples at 4 grains. In the greedy pile a site keeps its first grain
//! for good and topples at 5 grains, counting the kept one.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Coord2, DenseGrid, Direction, SeededRandom};
use crate::rotor::RotorBlob;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SandVariant {
    Greedy,
    Standard,
}

impl SandVariant {
    pub fn threshold(self) -> u64 {
        match self {
            SandVariant::Greedy => 5,
            SandVariant::Standard => 4,
        }
    }

    /// Grains a toppling site never gives away.
    pub fn keep(self) -> u64 {
        match self {
            SandVariant::Greedy => 1,
            SandVariant::Standard => 0,
        }
    }
}

impl std::str::FromStr for SandVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SandVariant::Greedy),
            "standard" => Ok(SandVariant::Standard),
            _ => Err(Error::OutOfRange(format!("unknown sandpile variant {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// Work queue seeded with the origin; neighbours join as they become unstable.
    Systematic,
    /// Uniform choice among the currently unstable sites.
    Random(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Batching {
    /// One toppling per visit.
    Single,
    /// All the topplings a site can do at once.
    Multi,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SandCell {
    pub grains: u64,
    pub ever_occupied: bool,
}

#[derive(Clone, Debug)]
pub struct SandGrid {
    grid: DenseGrid<SandCell>,
    variant: SandVariant,
    n: u64,
    topplings: u64,
}

impl SandGrid {
    /// `n` grains on the origin, not yet toppled.
    pub fn new(n: u64, variant: SandVariant) -> Self {
        let mut grid = DenseGrid::with_radius(4, SandCell::default());
        if n > 0 {
            grid.set(
                Coord2::ORIGIN,
                SandCell {
                    grains: n,
                    ever_occupied: true,
                },
            )
            .expect("small grid");
        }
        SandGrid {
            grid,
            variant,
            n,
            topplings: 0,
        }
    }

    pub fn variant(&self) -> SandVariant {
        self.variant
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn grid(&self) -> &DenseGrid<SandCell> {
        &self.grid
    }

    pub fn grains(&self, c: Coord2) -> u64 {
        self.grid.get(c).grains
    }

    pub fn ever_occupied(&self, c: Coord2) -> bool {
        self.grid.get(c).ever_occupied
    }

    /// Individual topplings performed so far.
    pub fn topplings(&self) -> u64 {
        self.topplings
    }

    pub fn total_grains(&self) -> u64 {
        self.grid.cells().iter().map(|c| c.grains).sum()
    }

    pub fn is_unstable(&self, c: Coord2) -> bool {
        self.grains(c) >= self.variant.threshold()
    }

    pub fn is_stable(&self) -> bool {
        self.grid
            .cells()
            .iter()
            .all(|c| c.grains < self.variant.threshold())
    }

    /// Ever-occupied sites, row-major.
    pub fn ever_occupied_sites(&self) -> Vec<Coord2> {
        self.grid
            .iter()
            .filter(|(_, c)| c.ever_occupied)
            .map(|(p, _)| p)
            .collect()
    }

    /// Non-empty sites with their grain counts, row-major.
    pub fn nonempty(&self) -> Vec<(Coord2, u64)> {
        self.grid
            .iter()
            .filter(|(_, c)| c.grains > 0)
            .map(|(p, c)| (p, c.grains))
            .collect()
    }

    fn topple_times(&mut self, c: Coord2, k: u64) -> Result<()> {
        self.grid.ensure(c, 1)?;
        let i = self.grid.index_unchecked(c);
        let strides = Direction::ALL.map(|d| self.grid.stride(d));
        let cells = self.grid.cells_mut();
        cells[i].grains -= 4 * k;
        for s in strides {
            let nb = &mut cells[(i as isize + s) as usize];
            nb.grains += k;
            nb.ever_occupied = true;
        }
        self.topplings += k;
        Ok(())
    }

    /// One toppling at `c`.
    pub fn topple(&mut self, c: Coord2) -> Result<()> {
        if !self.is_unstable(c) {
            return Err(Error::PreconditionViolated(format!(
                "{c} holds {} grains",
                self.grains(c)
            )));
        }
        self.topple_times(c, 1)
    }

    /// How many topplings a visit to `c` performs.
    fn batch(&self, c: Coord2, batching: Batching) -> u64 {
        let g = self.grains(c);
        if g < self.variant.threshold() {
            0
        } else {
            match batching {
                Batching::Single => 1,
                Batching::Multi => (g - self.variant.keep()) / 4,
            }
        }
    }

    /// Topples until stable. `observe` runs after every visit.
    pub fn stabilize_observed(
        &mut self,
        order: Order,
        batching: Batching,
        mut observe: impl FnMut(&SandGrid),
    ) -> Result<()> {
        let cap = self.n.saturating_mul(10_000).max(10_000);
        let check = |g: &SandGrid| {
            if g.topplings > cap {
                Err(Error::StepCapExceeded {
                    what: "sandpile topplings",
                    cap,
                })
            } else {
                Ok(())
            }
        };
        match order {
            Order::Systematic => {
                let mut queue: VecDeque<Coord2> = self.unstable_sites().into();
                while let Some(c) = queue.pop_front() {
                    let k = self.batch(c, batching);
                    if k == 0 {
                        continue;
                    }
                    self.topple_times(c, k)?;
                    check(self)?;
                    observe(self);
                    for nb in c.neighbors() {
                        // queued once, on the grain that crosses the threshold
                        if self.grains(nb) == self.variant.threshold()
                            || (k > 1 && self.is_unstable(nb))
                        {
                            queue.push_back(nb);
                        }
                    }
                    if self.is_unstable(c) {
                        queue.push_back(c);
                    }
                }
            }
            Order::Random(seed) => {
                let mut rng = SeededRandom::new(seed);
                let mut list = self.unstable_sites();
                let mut pos: HashMap<Coord2, usize> =
                    list.iter().enumerate().map(|(i, c)| (*c, i)).collect();
                while !list.is_empty() {
                    let i = rng.below(list.len() as u64) as usize;
                    let c = list[i];
                    let k = self.batch(c, batching);
                    self.topple_times(c, k)?;
                    check(self)?;
                    observe(self);
                    if !self.is_unstable(c) {
                        list.swap_remove(i);
                        pos.remove(&c);
                        if let Some(moved) = list.get(i) {
                            pos.insert(*moved, i);
                        }
                    }
                    for nb in c.neighbors() {
                        if self.is_unstable(nb) && !pos.contains_key(&nb) {
                            pos.insert(nb, list.len());
                            list.push(nb);
                        }
                    }
                }
            }
        }
        debug_assert!(self.is_stable());
        Ok(())
    }

    pub fn stabilize_with(&mut self, order: Order, batching: Batching) -> Result<()> {
        self.stabilize_observed(order, batching, |_| {})
    }

    fn unstable_sites(&self) -> Vec<Coord2> {
        let t = self.variant.threshold();
        self.grid
            .iter()
            .filter(|(_, c)| c.grains >= t)
            .map(|(p, _)| p)
            .collect()
    }

    /// Zero-grain sites cut off from the outside by non-empty sites.
    pub fn interior_holes(&self) -> Vec<Coord2> {
        let g = &self.grid;
        let side = g.side();
        let mut outside = vec![false; side * side];
        let mut queue = VecDeque::new();
        for (i, out) in outside.iter_mut().enumerate() {
            let (row, col) = (i / side, i % side);
            let rim = row == 0 || col == 0 || row == side - 1 || col == side - 1;
            if rim && g.cells()[i].grains == 0 {
                *out = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let p = g.coord_of(i);
            for nb in p.neighbors() {
                if let Some(j) = g.index_of(nb) {
                    if !outside[j] && g.cells()[j].grains == 0 {
                        outside[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        (0..side * side)
            .filter(|&i| !outside[i] && g.cells()[i].grains == 0)
            .map(|i| g.coord_of(i))
            .collect()
    }

    /// Whether the grain field is unchanged under all eight symmetries of the square.
    pub fn is_dihedral_symmetric(&self) -> bool {
        let maps: [fn(Coord2) -> Coord2; 7] = [
            |c| Coord2::new(-c.x, c.y),
            |c| Coord2::new(c.x, -c.y),
            |c| Coord2::new(-c.x, -c.y),
            |c| Coord2::new(c.y, c.x),
            |c| Coord2::new(-c.y, c.x),
            |c| Coord2::new(c.y, -c.x),
            |c| Coord2::new(-c.y, -c.x),
        ];
        self.grid
            .iter()
            .all(|(p, cell)| maps.iter().all(|m| self.grains(m(p)) == cell.grains))
    }

    /// Bounding box `(x0, y0, width, height)` of the non-empty sites.
    pub fn bounding_box(&self) -> (i32, i32, u32, u32) {
        let ne = self.nonempty();
        if ne.is_empty() {
            return (0, 0, 0, 0);
        }
        let x0 = ne.iter().map(|(p, _)| p.x).min().unwrap_or(0);
        let x1 = ne.iter().map(|(p, _)| p.x).max().unwrap_or(0);
        let y0 = ne.iter().map(|(p, _)| p.y).min().unwrap_or(0);
        let y1 = ne.iter().map(|(p, _)| p.y).max().unwrap_or(0);
        (x0, y0, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32)
    }

    /// `x0 y0 width height`, then one line of counts per row from `y0` upward.
    pub fn to_dump(&self) -> String {
        let (x0, y0, w, h) = self.bounding_box();
        let mut s = format!("{x0} {y0} {w} {h}\n");
        for dy in 0..h as i32 {
            let row: Vec<String> = (0..w as i32)
                .map(|dx| self.grains(Coord2::new(x0 + dx, y0 + dy)).to_string())
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// `n` grains dropped on the origin and toppled to stability.
pub fn stabilize(n: u64, variant: SandVariant, order: Order) -> Result<SandGrid> {
    let mut g = SandGrid::new(n, variant);
    g.stabilize_with(order, Batching::Multi)?;
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub n: u64,
    pub sandpile_sites: u64,
    pub blob_sites: u64,
    /// Greedy-pile sites missing from the rotor blob.
    pub violations: Vec<Coord2>,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares the greedy pile of `n` grains with the rotor blob of `n` bugs.
pub fn containment_check(n: u64) -> Result<ContainmentReport> {
    let pile = stabilize(n, SandVariant::Greedy, Order::Systematic)?;
    let (blob, _) = crate::rotor::run(n)?;
    Ok(containment_against(&pile, &blob))
}

pub fn containment_against(pile: &SandGrid, blob: &RotorBlob) -> ContainmentReport {
    let sites = pile.ever_occupied_sites();
    ContainmentReport {
        n: pile.n(),
        sandpile_sites: sites.len() as u64,
        blob_sites: blob.occupied_sites().len() as u64,
        violations: sites
            .into_iter()
            .filter(|p| !blob.is_occupied(*p))
            .collect(),
    }
}

/// A rotor swarm held back to sandpile moves: a site holding at least 5 bugs
/// (one settled, four or more waiting) sends four waiting bugs one rotor step
/// each. Bugs landing on vacant sites settle there. Returns bugs per site.
pub fn swarm_to_sandpile(n: u64) -> Result<SandGrid> {
    let mut blob = RotorBlob::new();
    let mut count: HashMap<Coord2, u64> = HashMap::new();
    if n > 0 {
        blob.settle(Coord2::ORIGIN)?;
        count.insert(Coord2::ORIGIN, n);
    }
    let mut queue: VecDeque<Coord2> = VecDeque::from([Coord2::ORIGIN]);
    let cap = n.saturating_mul(10_000).max(10_000);
    let mut moves = 0u64;
    while let Some(c) = queue.pop_front() {
        while count.get(&c).copied().unwrap_or(0) >= 5 {
            moves += 1;
            if moves > cap {
                return Err(Error::StepCapExceeded {
                    what: "sandpile swarm",
                    cap,
                });
            }
            *count.get_mut(&c).expect("present") -= 4;
            for _ in 0..4 {
                let to = blob.fire(c);
                if !blob.is_occupied(to) {
                    blob.settle(to)?;
                }
                let k = count.entry(to).or_default();
                *k += 1;
                if *k == 5 {
                    queue.push_back(to);
                }
            }
        }
    }
    let mut pile = SandGrid::new(0, SandVariant::Greedy);
    pile.n = n;
    for (p, k) in count {
        pile.grid.set(
            p,
            SandCell {
                grains: k,
                ever_occupied: true,
            },
        )?;
    }
    Ok(pile)
}

impl PartialEq for SandGrid {
    fn eq(&self, other: &Self) -> bool {
        self.variant == other.variant
            && self.n == other.n
            && self.nonempty() == other.nonempty()
            && {
                let a: Vec<_> = self.ever_occupied_sites();
                a == other.ever_occupied_sites()
            }
    }
}
