//! Departure cards: each departure from a site leaves a card naming its
//! direction. Replaying `n` bugs that each take any remaining card at an
//! occupied site reproduces the occupied set of the original run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{departures_toward, run, RotorBlob};
use crate::error::{Error, Result};
use crate::lattice::{Coord2, Direction, SeededRandom};

/// Column order of the text format.
const FILE_ORDER: [Direction; 4] = [
    Direction::North,
    Direction::West,
    Direction::South,
    Direction::East,
];

/// Per-site card counts, indexed by [`Direction::index`]. Sites with no cards
/// are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CardStacks {
    stacks: BTreeMap<Coord2, [u64; 4]>,
}

impl CardStacks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blob(blob: &RotorBlob) -> Self {
        let mut stacks = BTreeMap::new();
        for (p, cell) in blob.nonempty_cells() {
            if cell.departures > 0 {
                stacks.insert(
                    p,
                    Direction::ALL.map(|d| departures_toward(cell.departures, d)),
                );
            }
        }
        CardStacks { stacks }
    }

    pub fn get(&self, site: Coord2, d: Direction) -> u64 {
        self.stacks.get(&site).map_or(0, |s| s[d.index()])
    }

    pub fn stack(&self, site: Coord2) -> [u64; 4] {
        self.stacks.get(&site).copied().unwrap_or([0; 4])
    }

    pub fn set(&mut self, site: Coord2, counts: [u64; 4]) {
        if counts == [0; 4] {
            self.stacks.remove(&site);
        } else {
            self.stacks.insert(site, counts);
        }
    }

    pub fn total(&self) -> u64 {
        self.stacks.values().flatten().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }

    /// Sites with cards, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (Coord2, [u64; 4])> + '_ {
        self.stacks.iter().map(|(p, s)| (*p, *s))
    }

    /// `x y nN nW nS nE` per site, row-major.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.stacks {
            let [n, w, so, e] = FILE_ORDER.map(|d| c[d.index()]);
            let _ = writeln!(s, "{} {} {n} {w} {so} {e}", p.x, p.y);
        }
        s
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut stacks = BTreeMap::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", f.len())));
            }
            let x: i32 = f[0].parse().map_err(|e| bad(format!("x: {e}")))?;
            let y: i32 = f[1].parse().map_err(|e| bad(format!("y: {e}")))?;
            let mut counts = [0u64; 4];
            for (d, field) in FILE_ORDER.iter().zip(&f[2..]) {
                counts[d.index()] = field.parse().map_err(|e| bad(format!("{d} count: {e}")))?;
            }
            let site = Coord2::new(x, y);
            if stacks.insert(site, counts).is_some() {
                return Err(bad(format!("site {site} listed twice")));
            }
        }
        stacks.retain(|_, c| *c != [0; 4]);
        Ok(CardStacks { stacks })
    }
}

/// Cards left behind by a run of `n` bugs.
pub fn record_cards(n: u64) -> Result<CardStacks> {
    Ok(CardStacks::from_blob(&run(n)?.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    /// Row-major.
    pub occupied: Vec<Coord2>,
    pub leftover: CardStacks,
    pub consumed: u64,
}

/// Replays `n` bugs, each taking a uniformly random remaining card at every
/// occupied site it visits.
pub fn replay_with_cards(cards: &CardStacks, n: u64, seed: u64) -> Result<ReplayOutcome> {
    let mut rng = SeededRandom::new(seed);
    let mut left = cards.clone();
    let mut occupied = BTreeSet::new();
    let mut consumed = 0u64;
    for _ in 0..n {
        let mut p = RotorBlob::SOURCE;
        while occupied.contains(&p) {
            let stack = left.stacks.get_mut(&p).ok_or(Error::CardUnderflow {
                site: p,
                direction: None,
            })?;
            let total: u64 = stack.iter().sum();
            let mut pick = rng.below(total);
            let mut dir = Direction::East;
            for d in Direction::ALL {
                if pick < stack[d.index()] {
                    dir = d;
                    break;
                }
                pick -= stack[d.index()];
            }
            stack[dir.index()] -= 1;
            if total == 1 {
                left.stacks.remove(&p);
            }
            consumed += 1;
            p = p.neighbor(dir);
        }
        occupied.insert(p);
    }
    Ok(ReplayOutcome {
        occupied: occupied.into_iter().collect(),
        leftover: left,
        consumed,
    })
}

/// Sites where the leftover cards leaving differ from those arriving.
pub fn loop_imbalance(cards: &CardStacks) -> Vec<(Coord2, i64)> {
    let mut balance: BTreeMap<Coord2, i64> = BTreeMap::new();
    for (p, c) in cards.iter() {
        for d in Direction::ALL {
            let k = c[d.index()] as i64;
            *balance.entry(p).or_default() += k;
            *balance.entry(p.neighbor(d)).or_default() -= k;
        }
    }
    balance.into_iter().filter(|(_, b)| *b != 0).collect()
}
