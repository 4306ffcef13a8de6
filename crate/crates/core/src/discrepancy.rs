//! Rotor walks of many bugs on `Z` and `Z^2` compared with the expected
//! random-walk distribution.
//!
//! Every step, each bug at a site turns that site's rotor once and follows it.
//! The discrepancy `D(t)` is the largest gap, over all sites, between the bug
//! count and the expected number of bugs after `t` random-walk steps.
//!
//! Rotor orders: in dimension 2 the indices 0..4 are E, N, W, S; in dimension
//! 1 index 0 is right (+1) and index 1 is left (-1). A rotor is incremented
//! before it is followed.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Coord2, Direction};

/// Dimension of the walk, 1 or 2. One-dimensional sites use `y = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_u8(d: u8) -> Result<Dim> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(Error::OutOfRange(format!("dimension {d} not in {{1, 2}}"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// Number of neighbours, `2d`.
    pub fn degree(self) -> u8 {
        2 * self.as_u8()
    }

    /// Neighbour of `c` in rotor slot `k`.
    pub fn neighbor(self, c: Coord2, k: u8) -> Coord2 {
        match self {
            Dim::One => Coord2::new(if k == 0 { c.x + 1 } else { c.x - 1 }, c.y),
            Dim::Two => c.neighbor(Direction::from_index(k as usize)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotorInit {
    /// Every rotor starts at this index.
    Constant(u8),
    /// Each site's starting index is a hash of the seed and the site.
    Random(u64),
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rotor indices of every site, stored lazily: untouched sites are at their
/// initial index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotorField {
    dim: Dim,
    init: RotorInit,
    touched: HashMap<Coord2, u8>,
}

impl RotorField {
    pub fn new(dim: Dim, init: RotorInit) -> Result<Self> {
        if let RotorInit::Constant(k) = init {
            if k >= dim.degree() {
                return Err(Error::OutOfRange(format!(
                    "rotor index {k} for dimension {}",
                    dim.as_u8()
                )));
            }
        }
        Ok(RotorField {
            dim,
            init,
            touched: HashMap::new(),
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn initial(&self, c: Coord2) -> u8 {
        match self.init {
            RotorInit::Constant(k) => k,
            RotorInit::Random(seed) => {
                let key = ((c.x as u32 as u64) << 32) | c.y as u32 as u64;
                (splitmix64(seed ^ splitmix64(key)) % self.dim.degree() as u64) as u8
            }
        }
    }

    pub fn get(&self, c: Coord2) -> u8 {
        self.touched
            .get(&c)
            .copied()
            .unwrap_or_else(|| self.initial(c))
    }

    /// Turns the rotor at `c` once and returns the neighbour it now names.
    pub fn advance(&mut self, c: Coord2) -> Coord2 {
        let k = (self.get(c) + 1) % self.dim.degree();
        self.touched.insert(c, k);
        self.dim.neighbor(c, k)
    }
}

/// Bug counts per site.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugDistribution {
    bugs: BTreeMap<Coord2, u64>,
}

impl BugDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sites(sites: &[(Coord2, u64)]) -> Self {
        let mut d = Self::new();
        for &(c, k) in sites {
            d.add(c, k);
        }
        d
    }

    pub fn add(&mut self, c: Coord2, k: u64) {
        if k > 0 {
            *self.bugs.entry(c).or_default() += k;
        }
    }

    pub fn get(&self, c: Coord2) -> u64 {
        self.bugs.get(&c).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.bugs.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord2, u64)> + '_ {
        self.bugs.iter().map(|(c, k)| (*c, *k))
    }

    pub fn len(&self) -> usize {
        self.bugs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bugs.is_empty()
    }

    /// Common parity of `x + y` over occupied sites, if there is one.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.bugs.keys().map(|c| c.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// All bugs on sites of one parity.
    pub fn is_checkered(&self) -> bool {
        self.is_empty() || self.parity().is_some()
    }
}

/// Moves every bug one rotor step. A site with `k` bugs sends them along the
/// next `k` rotor positions in turn.
pub fn rotor_step(dist: &BugDistribution, field: &mut RotorField) -> BugDistribution {
    let deg = field.dim.degree() as u64;
    let mut out = BugDistribution::new();
    for (c, k) in dist.iter() {
        let r = field.get(c) as u64;
        let (each, rest) = (k / deg, k % deg);
        for j in 1..=deg {
            let slot = ((r + j) % deg) as u8;
            let share = each + (j <= rest) as u64;
            out.add(field.dim.neighbor(c, slot), share);
        }
        field.touched.insert(c, ((r + k) % deg) as u8);
    }
    out
}

/// Expected bug counts in double precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedDistribution {
    dim: Dim,
    mass: BTreeMap<Coord2, f64>,
}

impl ExpectedDistribution {
    pub fn from_bugs(dim: Dim, bugs: &BugDistribution) -> Self {
        ExpectedDistribution {
            dim,
            mass: bugs.iter().map(|(c, k)| (c, k as f64)).collect(),
        }
    }

    pub fn get(&self, c: Coord2) -> f64 {
        self.mass.get(&c).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord2, f64)> + '_ {
        self.mass.iter().map(|(c, m)| (*c, *m))
    }
}

/// One random-walk step: each site passes `1/2d` of its mass to each neighbour.
pub fn expected_step(e: &ExpectedDistribution) -> ExpectedDistribution {
    let deg = e.dim.degree();
    let mut mass = BTreeMap::new();
    for (c, m) in e.iter() {
        let share = m / deg as f64;
        for k in 0..deg {
            *mass.entry(e.dim.neighbor(c, k)).or_insert(0.0) += share;
        }
    }
    ExpectedDistribution { dim: e.dim, mass }
}

/// Expected counts as exact dyadic numerators over `(2d)^t`.
///
/// The denominator outgrows 128 bits after about 126 steps in dimension 1 and
/// 63 in dimension 2; [`ExactExpected::step`] refuses to go further.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactExpected {
    dim: Dim,
    t: u32,
    num: BTreeMap<Coord2, u128>,
}

impl ExactExpected {
    pub fn from_bugs(dim: Dim, bugs: &BugDistribution) -> Self {
        ExactExpected {
            dim,
            t: 0,
            num: bugs.iter().map(|(c, k)| (c, k as u128)).collect(),
        }
    }

    pub fn steps(&self) -> u32 {
        self.t
    }

    /// `log2` of the common denominator.
    pub fn denominator_bits(&self) -> u32 {
        self.t * self.dim.as_u8() as u32
    }

    pub fn numerator(&self, c: Coord2) -> u128 {
        self.num.get(&c).copied().unwrap_or(0)
    }

    pub fn to_f64(&self, c: Coord2) -> f64 {
        self.numerator(c) as f64 / 2f64.powi(self.denominator_bits() as i32)
    }

    /// Sum of numerators; equals `total * (2d)^t` exactly.
    pub fn numerator_total(&self) -> u128 {
        self.num.values().sum()
    }

    pub fn step(&mut self) -> Result<()> {
        let total: u128 = self.numerator_total();
        let bits = 128 - total.leading_zeros() + self.dim.as_u8() as u32;
        if bits >= 128 {
            return Err(Error::OutOfRange(format!(
                "exact masses overflow after {} steps",
                self.t
            )));
        }
        let deg = self.dim.degree();
        let mut num = BTreeMap::new();
        for (&c, &m) in &self.num {
            for k in 0..deg {
                *num.entry(self.dim.neighbor(c, k)).or_insert(0u128) += m;
            }
        }
        self.num = num;
        self.t += 1;
        Ok(())
    }
}

/// Closed-form transition probabilities of the simple random walk.
///
/// In dimension 1, `p_t(k) = C(t, (t+k)/2) / 2^t`. In dimension 2 the
/// coordinates `x + y` and `x - y` are independent one-dimensional walks, so
/// `p_t(x, y) = p_t(x + y) p_t(x - y)`.
#[derive(Clone, Debug)]
pub struct WalkKernel {
    ln_fact: Vec<f64>,
}

impl WalkKernel {
    pub fn new(t_max: u32) -> Self {
        let mut ln_fact = Vec::with_capacity(t_max as usize + 1);
        let mut acc = 0.0f64;
        ln_fact.push(0.0);
        for i in 1..=t_max as usize {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        WalkKernel { ln_fact }
    }

    pub fn t_max(&self) -> u32 {
        (self.ln_fact.len() - 1) as u32
    }

    /// One-dimensional `p_t(k)`.
    pub fn pmf(&self, t: u32, k: i64) -> f64 {
        let t64 = t as i64;
        if k.abs() > t64 || (t64 + k) % 2 != 0 {
            return 0.0;
        }
        let a = ((t64 + k) / 2) as usize;
        let b = ((t64 - k) / 2) as usize;
        let lf = &self.ln_fact;
        (lf[t as usize] - lf[a] - lf[b] - t as f64 * std::f64::consts::LN_2).exp()
    }

    /// Largest `p_t(k)` over `|k| >= m`.
    fn tail_peak(&self, t: u32, m: i64) -> f64 {
        let m = m.max(0);
        let k = if (m + t as i64) % 2 == 0 { m } else { m + 1 };
        self.pmf(t, k)
    }

    pub fn transition(&self, dim: Dim, t: u32, from: Coord2, to: Coord2) -> f64 {
        let dx = (to.x - from.x) as i64;
        let dy = (to.y - from.y) as i64;
        match dim {
            Dim::One => {
                if dy != 0 {
                    0.0
                } else {
                    self.pmf(t, dx)
                }
            }
            Dim::Two => self.pmf(t, dx + dy) * self.pmf(t, dx - dy),
        }
    }

    /// Expected count at `x` after `t` steps from `sources`.
    pub fn expected(&self, dim: Dim, t: u32, sources: &[(Coord2, u64)], x: Coord2) -> f64 {
        sources
            .iter()
            .map(|&(s, k)| k as f64 * self.transition(dim, t, s, x))
            .sum()
    }
}

/// Largest expected count over sites not in `skip`, found by scanning rings
/// around the first source until no farther site can beat the best so far.
fn max_expected_off(
    kernel: &WalkKernel,
    dim: Dim,
    t: u32,
    sources: &[(Coord2, u64)],
    skip: &BugDistribution,
) -> f64 {
    let Some(&(c0, _)) = sources.first() else {
        return 0.0;
    };
    // Offsets in the coordinates where the walk splits into 1D walks.
    let rot = |c: Coord2| -> (i64, i64) {
        let (dx, dy) = ((c.x - c0.x) as i64, (c.y - c0.y) as i64);
        match dim {
            Dim::One => (dx, 0),
            Dim::Two => (dx + dy, dx - dy),
        }
    };
    let unrot = |u: i64, v: i64| -> Coord2 {
        match dim {
            Dim::One => Coord2::new(c0.x + u as i32, c0.y),
            Dim::Two => Coord2::new(c0.x + ((u + v) / 2) as i32, c0.y + ((u - v) / 2) as i32),
        }
    };
    let src_rho: Vec<(i64, f64)> = sources
        .iter()
        .map(|&(s, k)| {
            let (u, v) = rot(s);
            (u.abs().max(v.abs()), k as f64)
        })
        .collect();
    let peak = match dim {
        Dim::One => 1.0,
        Dim::Two => kernel.tail_peak(t, 0),
    };
    let bound = |rho: i64| -> f64 {
        src_rho
            .iter()
            .map(|&(r, k)| k * peak * kernel.tail_peak(t, rho - r))
            .sum()
    };
    let reach = t as i64 + src_rho.iter().map(|r| r.0).max().unwrap_or(0);
    let mut best = 0.0f64;
    let consider = |u: i64, v: i64, best: &mut f64| {
        let x = unrot(u, v);
        if skip.get(x) == 0 {
            let e = kernel.expected(dim, t, sources, x);
            if e > *best {
                *best = e;
            }
        }
    };
    // Mass sits where u and v have the parity of t.
    let mut rho = (t % 2) as i64;
    while rho <= reach {
        if bound(rho) <= best {
            break;
        }
        match dim {
            Dim::One => {
                consider(rho, 0, &mut best);
                if rho != 0 {
                    consider(-rho, 0, &mut best);
                }
            }
            Dim::Two => {
                if rho == 0 {
                    consider(0, 0, &mut best);
                } else {
                    let mut w = -rho;
                    while w <= rho {
                        consider(rho, w, &mut best);
                        consider(-rho, w, &mut best);
                        if w.abs() != rho {
                            consider(w, rho, &mut best);
                            consider(w, -rho, &mut best);
                        }
                        w += 2;
                    }
                }
            }
        }
        rho += 2;
    }
    best
}

/// `D(1), ..., D(steps)` for the rotor walk started from `dist0` and `field0`.
pub fn max_discrepancy(
    dist0: &BugDistribution,
    field0: &RotorField,
    steps: u32,
) -> Result<Vec<f64>> {
    if !dist0.is_checkered() {
        return Err(Error::RefusesNonCheckered);
    }
    let dim = field0.dim;
    if dim == Dim::One && dist0.iter().any(|(c, _)| c.y != 0) {
        return Err(Error::PreconditionViolated(
            "one-dimensional bugs must have y = 0".into(),
        ));
    }
    let kernel = WalkKernel::new(steps);
    let sources: Vec<(Coord2, u64)> = dist0.iter().collect();
    let mut field = field0.clone();
    let mut dist = dist0.clone();
    let mut trace = Vec::with_capacity(steps as usize);
    for t in 1..=steps {
        dist = rotor_step(&dist, &mut field);
        let on_bugs = dist
            .iter()
            .map(|(c, k)| (k as f64 - kernel.expected(dim, t, &sources, c)).abs())
            .fold(0.0, f64::max);
        let off_bugs = max_expected_off(&kernel, dim, t, &sources, &dist);
        trace.push(on_bugs.max(off_bugs));
    }
    Ok(trace)
}

/// Trace as CSV, preceded by a `#` comment line holding `config_json`.
pub fn trace_csv(config_json: &str, trace: &[f64]) -> String {
    let mut s = format!("# {config_json}\nt,discrepancy\n");
    for (i, d) in trace.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, d);
    }
    s
}

/// Initial loads used by the plateau experiment.
pub fn standard_loads(dim: Dim) -> Vec<(&'static str, BugDistribution)> {
    let o = Coord2::ORIGIN;
    let spread: Vec<(Coord2, u64)> = match dim {
        Dim::One => [0, 2, -2, 4]
            .iter()
            .map(|&x| (Coord2::new(x, 0), 4))
            .collect(),
        Dim::Two => [(0, 0), (2, 0), (1, 1), (0, 2)]
            .iter()
            .map(|&(x, y)| (Coord2::new(x, y), 4))
            .collect(),
    };
    vec![
        ("single", BugDistribution::from_sites(&[(o, 1)])),
        ("pile64", BugDistribution::from_sites(&[(o, 64)])),
        ("spread16", BugDistribution::from_sites(&spread)),
    ]
}
