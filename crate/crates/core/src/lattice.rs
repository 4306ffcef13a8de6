//! Lattice primitives shared by every model: compass directions in rotor
//! order, integer coordinates, an origin-centred dense grid that grows on
//! demand, and the seeded random source.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four lattice directions.
///
/// The declaration order is the rotor order: each counterclockwise quarter
/// turn moves one step along East, North, West, South and back to East.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    East,
    North,
    West,
    South,
}

impl Direction {
    /// All directions in counterclockwise order starting from East.
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::West,
        Direction::South,
    ];

    /// The direction one quarter turn counterclockwise from `self`.
    #[inline]
    pub const fn ccw_next(self) -> Direction {
        match self {
            Direction::East => Direction::North,
            Direction::North => Direction::West,
            Direction::West => Direction::South,
            Direction::South => Direction::East,
        }
    }

    /// Position in [`Direction::ALL`].
    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub const fn from_index(i: usize) -> Direction {
        Direction::ALL[i & 3]
    }

    /// `self` advanced by `turns` counterclockwise quarter turns.
    #[inline]
    pub const fn rotated(self, turns: u64) -> Direction {
        Direction::from_index(self.index() + (turns % 4) as usize)
    }

    #[inline]
    pub const fn opposite(self) -> Direction {
        self.rotated(2)
    }

    /// Unit step `(dx, dy)` for this direction.
    #[inline]
    pub const fn offset(self) -> (i32, i32) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, 1),
            Direction::West => (-1, 0),
            Direction::South => (0, -1),
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Direction::East => 'E',
            Direction::North => 'N',
            Direction::West => 'W',
            Direction::South => 'S',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A point of the square lattice.
///
/// Ordering is row-major: by `y` first, then by `x`. The card-stack file
/// format relies on this.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord2 {
    pub x: i32,
    pub y: i32,
}

impl Coord2 {
    pub const ORIGIN: Coord2 = Coord2 { x: 0, y: 0 };

    #[inline]
    pub const fn new(x: i32, y: i32) -> Self {
        Coord2 { x, y }
    }

    #[inline]
    pub const fn neighbor(self, d: Direction) -> Coord2 {
        let (dx, dy) = d.offset();
        Coord2 {
            x: self.x + dx,
            y: self.y + dy,
        }
    }

    /// The four neighbours, indexed like [`Direction::ALL`].
    #[inline]
    pub fn neighbors(self) -> [Coord2; 4] {
        Direction::ALL.map(|d| self.neighbor(d))
    }

    /// Squared Euclidean distance from the origin, computed exactly.
    #[inline]
    pub const fn dist2(self) -> i64 {
        let x = self.x as i64;
        let y = self.y as i64;
        x * x + y * y
    }

    /// Chebyshev norm, `max(|x|, |y|)`.
    #[inline]
    pub const fn sup_norm(self) -> u32 {
        let ax = self.x.unsigned_abs();
        let ay = self.y.unsigned_abs();
        if ax > ay {
            ax
        } else {
            ay
        }
    }

    /// Parity of `x + y`: 0 for even sites, 1 for odd.
    #[inline]
    pub const fn parity(self) -> u8 {
        ((self.x + self.y) & 1) as u8
    }
}

impl Ord for Coord2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Coord2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coord2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i32, i32)> for Coord2 {
    fn from((x, y): (i32, i32)) -> Self {
        Coord2 { x, y }
    }
}

/// Grid half-width that an `n`-particle aggregate stays inside at every
/// scale we run: `ceil(2 sqrt(n / pi)) + 16`.
pub fn safe_radius(n: u64) -> u32 {
    (2.0 * (n as f64 / std::f64::consts::PI).sqrt()).ceil() as u32 + 16
}

/// Largest number of sites a [`DenseGrid`] will allocate.
pub const MAX_GRID_CELLS: usize = 1 << 30;

/// Dense payload storage over the square `[-r, r]^2`.
///
/// Reads outside the extent return the default payload; writes outside it
/// grow the extent. Growth copies every stored payload to its new slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseGrid<T> {
    radius: u32,
    side: usize,
    cells: Vec<T>,
    default: T,
}

impl<T: Clone> DenseGrid<T> {
    pub fn new(default: T) -> Self {
        Self::with_radius(0, default)
    }

    pub fn with_radius(radius: u32, default: T) -> Self {
        let side = 2 * radius as usize + 1;
        DenseGrid {
            radius,
            side,
            cells: vec![default.clone(); side * side],
            default,
        }
    }

    /// Like [`DenseGrid::with_radius`] but reports allocation failure.
    pub fn try_with_radius(radius: u32, default: T) -> Result<Self> {
        let side = 2 * radius as usize + 1;
        let len = side
            .checked_mul(side)
            .filter(|&len| len <= MAX_GRID_CELLS)
            .ok_or(Error::ResourceExhausted {
                what: "grid extent",
            })?;
        let mut cells = Vec::new();
        cells
            .try_reserve_exact(len)
            .map_err(|_| Error::ResourceExhausted {
                what: "grid allocation",
            })?;
        cells.resize(len, default.clone());
        Ok(DenseGrid {
            radius,
            side,
            cells,
            default,
        })
    }

    #[inline]
    pub fn radius(&self) -> u32 {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn default_value(&self) -> &T {
        &self.default
    }

    #[inline]
    pub fn contains(&self, c: Coord2) -> bool {
        c.sup_norm() <= self.radius
    }

    #[inline]
    pub fn index_of(&self, c: Coord2) -> Option<usize> {
        if self.contains(c) {
            Some(self.index_unchecked(c))
        } else {
            None
        }
    }

    /// Flat index of `c`. The caller guarantees `c` is inside the extent.
    #[inline]
    pub fn index_unchecked(&self, c: Coord2) -> usize {
        let r = self.radius as i64;
        ((c.y as i64 + r) as usize) * self.side + (c.x as i64 + r) as usize
    }

    #[inline]
    pub fn coord_of(&self, index: usize) -> Coord2 {
        let r = self.radius as i32;
        Coord2::new(
            (index % self.side) as i32 - r,
            (index / self.side) as i32 - r,
        )
    }

    /// Flat index offset of one step in direction `d`.
    #[inline]
    pub fn stride(&self, d: Direction) -> isize {
        let s = self.side as isize;
        match d {
            Direction::East => 1,
            Direction::North => s,
            Direction::West => -1,
            Direction::South => -s,
        }
    }

    #[inline]
    pub fn get(&self, c: Coord2) -> &T {
        match self.index_of(c) {
            Some(i) => &self.cells[i],
            None => &self.default,
        }
    }

    pub fn set(&mut self, c: Coord2, value: T) -> Result<()> {
        *self.get_mut(c)? = value;
        Ok(())
    }

    /// Mutable access, growing the extent to include `c` if needed.
    pub fn get_mut(&mut self, c: Coord2) -> Result<&mut T> {
        self.ensure(c, 0)?;
        let i = self.index_unchecked(c);
        Ok(&mut self.cells[i])
    }

    /// Grows the extent so that every site within Chebyshev distance
    /// `margin` of `c` is stored.
    pub fn ensure(&mut self, c: Coord2, margin: u32) -> Result<()> {
        let need = c.sup_norm().saturating_add(margin);
        if need <= self.radius {
            return Ok(());
        }
        let target = need.max(self.radius.saturating_mul(2)).max(4);
        self.grow_to(target)
    }

    pub fn grow_to(&mut self, radius: u32) -> Result<()> {
        if radius <= self.radius {
            return Ok(());
        }
        let mut bigger = Self::try_with_radius(radius, self.default.clone())?;
        let shift = (radius - self.radius) as usize;
        for row in 0..self.side {
            let src = row * self.side;
            let dst = (row + shift) * bigger.side + shift;
            bigger.cells[dst..dst + self.side].clone_from_slice(&self.cells[src..src + self.side]);
        }
        *self = bigger;
        Ok(())
    }

    #[inline]
    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    #[inline]
    pub fn cells_mut(&mut self) -> &mut [T] {
        &mut self.cells
    }

    /// Stored sites with their payloads, row by row from the bottom.
    pub fn iter(&self) -> impl Iterator<Item = (Coord2, &T)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.coord_of(i), v))
    }
}

/// Whether `sites` forms one 4-connected component. The empty set counts as
/// connected.
pub fn is_connected(sites: &[Coord2]) -> bool {
    use std::collections::HashSet;
    let Some(&start) = sites.first() else {
        return true;
    };
    let set: HashSet<Coord2> = sites.iter().copied().collect();
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some(c) = queue.pop_front() {
        for nb in c.neighbors() {
            if set.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    seen.len() == set.len()
}

/// Deterministic random source used by every stochastic experiment.
///
/// The generator is PCG-64 MCG (`rand_pcg::Pcg64Mcg`, 128-bit state with a
/// 64-bit XSL-RR output), seeded through `SeedableRng::seed_from_u64`.
/// Independent streams for parallel trials come from
/// [`SeededRandom::stream`], which reseeds with
/// `seed + (stream + 1) * 0x9E37_79B9_7F4A_7C15` (wrapping).
#[derive(Clone, Debug)]
pub struct SeededRandom {
    seed: u64,
    rng: Pcg64Mcg,
    bits: u64,
    bits_left: u32,
}

impl SeededRandom {
    pub fn new(seed: u64) -> Self {
        SeededRandom {
            seed,
            rng: Pcg64Mcg::seed_from_u64(seed),
            bits: 0,
            bits_left: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent generator for sub-stream `stream` of this seed.
    pub fn stream(&self, stream: u64) -> SeededRandom {
        SeededRandom::new(
            self.seed
                .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Two fresh bits, drawn 32 at a time from the 64-bit output.
    #[inline]
    pub fn two_bits(&mut self) -> u8 {
        if self.bits_left == 0 {
            self.bits = self.rng.next_u64();
            self.bits_left = 32;
        }
        let out = (self.bits & 3) as u8;
        self.bits >>= 2;
        self.bits_left -= 1;
        out
    }

    /// A uniformly random direction: bits 0..3 map to E, N, W, S.
    #[inline]
    pub fn direction(&mut self) -> Direction {
        Direction::from_index(self.two_bits() as usize)
    }

    /// A fair coin flip.
    #[inline]
    pub fn coin(&mut self) -> bool {
        self.two_bits() & 1 == 1
    }

    /// Uniform integer in `0..bound`. Panics if `bound == 0`.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn ccw_order() {
        assert_eq!(Direction::East.ccw_next(), Direction::North);
        assert_eq!(Direction::North.ccw_next(), Direction::West);
        assert_eq!(Direction::West.ccw_next(), Direction::South);
        assert_eq!(Direction::South.ccw_next(), Direction::East);
        for d in Direction::ALL {
            assert_eq!(d.ccw_next().ccw_next().ccw_next().ccw_next(), d);
            assert_eq!(d.rotated(4), d);
            assert_eq!(d.rotated(1), d.ccw_next());
        }
    }

    #[test]
    fn ccw_is_a_bijection() {
        let mut images: Vec<_> = Direction::ALL.iter().map(|d| d.ccw_next()).collect();
        images.sort();
        assert_eq!(images, Direction::ALL.to_vec());
    }

    #[test]
    fn unit_steps() {
        assert_eq!(Coord2::ORIGIN.neighbor(Direction::North), Coord2::new(0, 1));
        assert_eq!(
            Coord2::new(2, -1).neighbor(Direction::West),
            Coord2::new(1, -1)
        );
        assert_eq!(Coord2::ORIGIN.neighbor(Direction::East), Coord2::new(1, 0));
        assert_eq!(
            Coord2::ORIGIN.neighbor(Direction::South),
            Coord2::new(0, -1)
        );
    }

    #[test]
    fn dist2_is_exact_at_the_edge_of_the_supported_range() {
        let m = 1 << 15;
        assert_eq!(Coord2::new(m, -m).dist2(), 2 * (1i64 << 30));
        assert_eq!(Coord2::new(3, 4).dist2(), 25);
    }

    #[test]
    fn row_major_ordering() {
        let mut v = vec![
            Coord2::new(1, 0),
            Coord2::new(-1, 1),
            Coord2::new(0, 0),
            Coord2::new(5, -1),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Coord2::new(5, -1),
                Coord2::new(0, 0),
                Coord2::new(1, 0),
                Coord2::new(-1, 1)
            ]
        );
    }

    #[test]
    fn fresh_grid_reads_default() {
        let g = DenseGrid::new(7u8);
        assert_eq!(*g.get(Coord2::new(3, -9)), 7);
        assert_eq!(*g.get(Coord2::ORIGIN), 7);
    }

    #[test]
    fn read_after_write() {
        let mut g = DenseGrid::new(0u32);
        g.set(Coord2::new(5, 5), 11).unwrap();
        assert_eq!(*g.get(Coord2::new(5, 5)), 11);
    }

    #[test]
    fn far_write_preserves_others() {
        let mut g = DenseGrid::new(0u8);
        g.set(Coord2::new(2, 3), 4).unwrap();
        g.set(Coord2::new(1000, 0), 9).unwrap();
        assert_eq!(*g.get(Coord2::ORIGIN), 0);
        assert_eq!(*g.get(Coord2::new(2, 3)), 4);
        assert_eq!(*g.get(Coord2::new(1000, 0)), 9);
    }

    #[test]
    fn million_away_write() {
        // A dense square of side 2e6+1 is past MAX_GRID_CELLS.
        let mut g = DenseGrid::new(0u8);
        g.set(Coord2::new(3, 3), 2).unwrap();
        let err = g.set(Coord2::new(1_000_000, 0), 1).unwrap_err();
        assert!(matches!(err, Error::ResourceExhausted { .. }));
        assert_eq!(*g.get(Coord2::ORIGIN), 0);
        assert_eq!(*g.get(Coord2::new(3, 3)), 2);
        assert_eq!(*g.get(Coord2::new(1_000_000, 0)), 0);
    }

    #[test]
    fn connectivity() {
        let line: Vec<_> = (0..5).map(|x| Coord2::new(x, 0)).collect();
        assert!(is_connected(&line));
        assert!(!is_connected(&[Coord2::new(0, 0), Coord2::new(1, 1)]));
        assert!(is_connected(&[]));
    }

    #[test]
    fn seeded_streams_repeat() {
        let mut a = SeededRandom::new(42);
        let mut b = SeededRandom::new(42);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(
            SeededRandom::new(42).stream(0).next_u64(),
            SeededRandom::new(42).next_u64()
        );
    }

    #[test]
    fn two_bits_are_balanced() {
        let mut r = SeededRandom::new(1);
        let mut counts = [0u32; 4];
        for _ in 0..40_000 {
            counts[r.two_bits() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn inverse_steps(x in -1000i32..1000, y in -1000i32..1000) {
            let c = Coord2::new(x, y);
            for d in Direction::ALL {
                prop_assert_eq!(c.neighbor(d).neighbor(d.opposite()), c);
            }
        }

        #[test]
        fn grid_matches_map_oracle(ops in proptest::collection::vec((-300i32..300, -300i32..300, any::<u16>(), any::<bool>()), 1..200)) {
            let mut grid = DenseGrid::new(0u16);
            let mut oracle: HashMap<Coord2, u16> = HashMap::new();
            for (x, y, v, write) in ops {
                let c = Coord2::new(x, y);
                if write {
                    grid.set(c, v).unwrap();
                    oracle.insert(c, v);
                } else {
                    prop_assert_eq!(*grid.get(c), oracle.get(&c).copied().unwrap_or(0));
                }
            }
            for (c, v) in &oracle {
                prop_assert_eq!(grid.get(*c), v);
            }
        }
    }
}
