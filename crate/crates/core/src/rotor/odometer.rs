//! Final state of rotor aggregation without simulating every hop.
//!
//! The state after `n` bugs is fixed by the odometer `u`, the number of
//! departures from each site. Write `c(x)` for the bugs that arrive at `x`
//! (plus `n` at the source) minus `u(x)`. A candidate `u` is the true odometer
//! when
//!
//! 1. `c` is 0 or 1 everywhere, and 1 wherever `u > 0`;
//! 2. the last-exit pointers of the sites with `u > 0` contain no cycle.
//!
//! The first condition makes the configuration stable, so `u` is at least the
//! true odometer; the second rules out any excess, since surplus departures
//! would have to form closed loops of last exits.
//!
//! [`solve`] starts from a smooth estimate of `u` built from the lattice
//! potential kernel, fires and unfires sites until condition 1 holds, then
//! pops last-exit cycles until condition 2 holds. [`certify`] re-checks both
//! conditions on a finished blob from scratch.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{departures_toward, Cell, RotorBlob};
use crate::error::{Error, Result};
use crate::lattice::{safe_radius, Coord2, DenseGrid, Direction, MAX_GRID_CELLS};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Half-width of the table of exact kernel values.
const TABLE: usize = 48;

/// Departure cycle starting from the first departure: N, W, S, E.
const CYCLE: [Direction; 4] = [
    Direction::North,
    Direction::West,
    Direction::South,
    Direction::East,
];

/// Departures toward `CYCLE[k]` after `u` departures.
#[inline]
fn toward(u: i64, k: usize) -> i64 {
    if u <= 0 {
        0
    } else {
        (u - k as i64 + 3) / 4
    }
}

fn kappa() -> f64 {
    (2.0 * EULER_GAMMA + 8f64.ln()) / PI
}

/// Potential kernel `a(x, y)` for `0 <= y <= x <= TABLE`, by Simpson's rule on
///
/// `a(x, y) = (2/pi) int_0^pi (1 - e^{-x s} cos(y t)) / sinh s dt`, `cosh s = 2 - cos t`.
fn kernel_table() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let m = TABLE + 1;
        let np = 8192usize;
        let h = PI / np as f64;
        let theta: Vec<f64> = (0..=np).map(|i| i as f64 * h).collect();
        let s: Vec<f64> = theta.iter().map(|t| (2.0 - t.cos()).acosh()).collect();
        let sinh: Vec<f64> = s.iter().map(|v| v.sinh()).collect();
        let mut tab = vec![0.0; m * m];
        for x in 0..m {
            for y in 0..=x {
                let mut acc = 0.0;
                for i in 0..=np {
                    // the integrand tends to x as t -> 0
                    let f = if i == 0 {
                        x as f64
                    } else {
                        (1.0 - (-(x as f64) * s[i]).exp() * (y as f64 * theta[i]).cos()) / sinh[i]
                    };
                    let w = if i == 0 || i == np {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += w * f;
                }
                let v = (2.0 / PI) * h / 3.0 * acc;
                tab[x * m + y] = v;
                tab[y * m + x] = v;
            }
        }
        tab
    })
}

/// Lattice potential kernel: exact near the origin, asymptotic beyond.
fn potential(dx: i64, dy: i64) -> f64 {
    let (ax, ay) = (dx.unsigned_abs() as usize, dy.unsigned_abs() as usize);
    if ax <= TABLE && ay <= TABLE {
        return kernel_table()[ax * (TABLE + 1) + ay];
    }
    let (x, y) = (dx as f64, dy as f64);
    let q = x * x + y * y;
    let cos4 = (x * x * x * x - 6.0 * x * x * y * y + y * y * y * y) / (q * q);
    q.ln() / PI + kappa() - cos4 / (6.0 * PI * q)
}

/// Square work area of half-width `r` with flat `i64` fields.
struct Work {
    side: usize,
    u: Vec<i64>,
    c: Vec<i64>,
    offs: [isize; 4],
}

impl Work {
    fn on_rim(&self, i: usize) -> bool {
        let (row, col) = (i / self.side, i % self.side);
        row == 0 || col == 0 || row == self.side - 1 || col == self.side - 1
    }

    /// Moves `u` at `i` to `u1`, updating the neighbours' chip counts.
    /// `touched` sees each changed neighbour with its new `(c, u)`.
    #[inline]
    fn set_u(&mut self, i: usize, u1: i64, mut touched: impl FnMut(usize, i64, i64)) {
        let u0 = self.u[i];
        self.u[i] = u1;
        self.c[i] -= u1 - u0;
        for k in 0..4 {
            let d = toward(u1, k) - toward(u0, k);
            if d != 0 {
                let j = (i as isize + self.offs[k]) as usize;
                self.c[j] += d;
                touched(j, self.c[j], self.u[j]);
            }
        }
    }
}

/// Attempts the computation on a square of half-width `r`. `None` means the
/// blob reached the edge.
fn attempt(n: u64, r: usize) -> Result<Option<Work>> {
    let side = 2 * r + 1;
    let cells = side.checked_mul(side).filter(|&v| v <= MAX_GRID_CELLS);
    let cells = cells.ok_or(Error::ResourceExhausted {
        what: "odometer grid",
    })?;
    let mut u = Vec::new();
    u.try_reserve_exact(cells)
        .map_err(|_| Error::ResourceExhausted {
            what: "odometer grid",
        })?;
    u.resize(cells, 0i64);
    let mut c = Vec::new();
    c.try_reserve_exact(cells)
        .map_err(|_| Error::ResourceExhausted {
            what: "odometer grid",
        })?;
    c.resize(cells, 0i64);
    let ss = side as isize;
    let mut w = Work {
        side,
        u,
        c,
        offs: [ss, -1, -ss, 1],
    };
    let src = r * side + r;

    // Smooth estimate: |x|^2 - n a(x) + const inside the disk of area n.
    let nf = n as f64;
    let r2 = nf / PI;
    let konst = if n > 0 {
        nf * (r2.ln() / PI + kappa()) - r2
    } else {
        0.0
    };
    let ri = r as i64;
    for row in 0..side {
        let dy = row as i64 - ri;
        for col in 0..side {
            let dx = col as i64 - ri;
            let q = (dx * dx + dy * dy) as f64;
            if q < r2 && dx.abs() < ri && dy.abs() < ri {
                let v = q - nf * potential(dx, dy) + konst;
                if v > 0.0 {
                    w.u[row * side + col] = v.floor() as i64;
                }
            }
        }
    }
    w.c[src] += n as i64;
    for i in 0..cells {
        let ui = w.u[i];
        if ui > 0 {
            w.c[i] -= ui;
            for k in 0..4 {
                let j = (i as isize + w.offs[k]) as usize;
                w.c[j] += toward(ui, k);
            }
        }
    }

    // Fire until every site holds at most one bug.
    let mut stack: Vec<usize> = (0..cells).filter(|&i| w.c[i] >= 2).collect();
    while let Some(i) = stack.pop() {
        if w.c[i] < 2 {
            continue;
        }
        if w.on_rim(i) {
            return Ok(None);
        }
        let u1 = w.u[i] + w.c[i] - 1;
        w.set_u(i, u1, |j, c, _| {
            if c >= 2 {
                stack.push(j)
            }
        });
    }

    // Unfire sites that fired into a deficit.
    let mut stack: Vec<usize> = (0..cells).filter(|&i| w.u[i] > 0 && w.c[i] <= 0).collect();
    while let Some(i) = stack.pop() {
        if !(w.u[i] > 0 && w.c[i] <= 0) {
            continue;
        }
        let k = (1 - w.c[i]).min(w.u[i]);
        w.set_u(i, w.u[i] - k, |j, c, u| {
            if u > 0 && c <= 0 {
                stack.push(j)
            }
        });
    }

    // Pop cycles of last exits. Removing a cycle's final departures leaves
    // every count c unchanged.
    let mut mark = vec![0u32; cells];
    let mut done = vec![false; cells];
    let mut epoch = 0u32;
    let mut path = Vec::new();
    let mut stack: Vec<usize> = (0..cells).rev().filter(|&i| w.u[i] > 0).collect();
    while let Some(s) = stack.pop() {
        if w.u[s] == 0 || done[s] {
            continue;
        }
        epoch += 1;
        path.clear();
        let mut i = s;
        loop {
            if w.u[i] == 0 || done[i] {
                for &p in &path {
                    done[p] = true;
                }
                break;
            }
            if mark[i] == epoch {
                let start = path
                    .iter()
                    .position(|&p| p == i)
                    .expect("marked site is on the path");
                for &p in &path[start..] {
                    w.u[p] -= 1;
                }
                stack.extend(path.iter().copied());
                break;
            }
            mark[i] = epoch;
            path.push(i);
            let k = ((w.u[i] - 1) & 3) as usize;
            i = (i as isize + w.offs[k]) as usize;
        }
    }
    Ok(Some(w))
}

/// Final blob after `n` bugs from the source. `None` only if the internal
/// consistency checks fail.
pub(crate) fn solve(n: u64) -> Result<Option<RotorBlob>> {
    let mut r = safe_radius(n) as usize;
    let w = loop {
        match attempt(n, r)? {
            Some(w) => break w,
            None => r *= 2,
        }
    };
    if w.c.iter().any(|&c| !(0..=1).contains(&c)) {
        return Ok(None);
    }
    let side = w.side;
    let reach = (0..side * side)
        .filter(|&i| w.c[i] == 1)
        .map(|i| {
            ((i % side) as i64 - r as i64)
                .unsigned_abs()
                .max(((i / side) as i64 - r as i64).unsigned_abs())
        })
        .max()
        .unwrap_or(0) as u32;
    let mut grid = DenseGrid::try_with_radius(reach + 1, Cell::default())?;
    for i in 0..side * side {
        if w.c[i] == 1 || w.u[i] > 0 {
            let p = Coord2::new((i % side) as i32 - r as i32, (i / side) as i32 - r as i32);
            grid.set(
                p,
                Cell {
                    occupied: w.c[i] == 1,
                    departures: w.u[i] as u64,
                },
            )?;
        }
    }
    Ok(Some(RotorBlob::from_parts(grid, n)))
}

/// Whether `blob` is exactly the state reached by `blob.n()` bugs.
pub fn certify(blob: &RotorBlob) -> bool {
    let g = blob.grid();
    let side = g.side();
    let cells = g.cells();
    let r = g.radius() as i32;
    let mut occupied = 0u64;
    for (i, cell) in cells.iter().enumerate() {
        let p = g.coord_of(i);
        let u = cell.departures;
        if u > 0 && (p.x.abs() == r || p.y.abs() == r) {
            return false;
        }
        let mut c = if p == RotorBlob::SOURCE {
            blob.n() as i128
        } else {
            0
        };
        c -= u as i128;
        for d in Direction::ALL {
            let nb = p.neighbor(d);
            if let Some(j) = g.index_of(nb) {
                c += departures_toward(cells[j].departures, d.opposite()) as i128;
            }
        }
        if c != cell.occupied as i128 || (u > 0 && c != 1) {
            return false;
        }
        occupied += cell.occupied as u64;
    }
    if occupied != blob.n() {
        return false;
    }
    // Each site with u > 0 has one last-exit pointer; look for a cycle.
    let step = |i: usize| -> usize {
        let d = cells[i].rotor();
        (i as isize + g.stride(d)) as usize
    };
    let mut state = vec![0u8; side * side]; // 0 new, 1 on current path, 2 finished
    let mut path = Vec::new();
    for s in 0..side * side {
        if cells[s].departures == 0 || state[s] != 0 {
            continue;
        }
        path.clear();
        let mut i = s;
        while cells[i].departures > 0 && state[i] == 0 {
            state[i] = 1;
            path.push(i);
            i = step(i);
        }
        if cells[i].departures > 0 && state[i] == 1 {
            return false;
        }
        for &p in &path {
            state[p] = 2;
        }
    }
    debug_assert!(CYCLE
        .iter()
        .enumerate()
        .all(|(k, d)| departures_toward(k as u64 + 1, *d) == 1));
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert!(potential(0, 0).abs() < 1e-12);
        assert!((potential(1, 0) - 1.0).abs() < 1e-9);
        assert!((potential(1, 1) - 4.0 / PI).abs() < 1e-9);
        // discrete harmonicity away from the origin
        for (x, y) in [(3, 2), (10, 0), (20, 17), (47, 5)] {
            let lap = potential(x + 1, y)
                + potential(x - 1, y)
                + potential(x, y + 1)
                + potential(x, y - 1)
                - 4.0 * potential(x, y);
            assert!(lap.abs() < 1e-9, "({x},{y}) {lap}");
        }
        // Laplacian at the origin is 4 with this normalisation
        let lap0 = 4.0 * potential(1, 0) - 4.0 * potential(0, 0);
        assert!((lap0 - 4.0).abs() < 1e-9);
        // the asymptotic form joins the table smoothly
        let inside = potential(48, 30);
        let (x, y) = (48.0f64, 30.0f64);
        let q = x * x + y * y;
        let outside = q.ln() / PI + kappa()
            - (x.powi(4) - 6.0 * x * x * y * y + y.powi(4)) / (q * q) / (6.0 * PI * q);
        assert!((inside - outside).abs() < 1e-7);
    }

    #[test]
    fn cycle_matches_rotor_order() {
        for (k, d) in CYCLE.iter().enumerate() {
            assert_eq!(*d, Direction::East.rotated(k as u64 + 1));
            for u in 0..20 {
                assert_eq!(toward(u, k) as u64, departures_toward(u as u64, *d));
            }
        }
    }
}
