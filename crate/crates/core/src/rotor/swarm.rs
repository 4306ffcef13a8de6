use super::RotorBlob;
use crate::error::{Error, Result};
use crate::lattice::{safe_radius, Coord2, SeededRandom};

/// Hop budget per 10^4 bugs (at least one unit).
pub const SWARM_STEP_CAP: u64 = 1_000_000_000;

/// All `n` bugs start at the source together; a randomly chosen unsettled bug
/// takes one rotor step at a time until every bug has settled.
pub fn run_swarm(n: u64, seed: u64) -> Result<RotorBlob> {
    let mut blob = RotorBlob::new();
    blob.grid_mut().grow_to(safe_radius(n).min(1 << 14))?;
    if n == 0 {
        return Ok(blob);
    }
    let mut rng = SeededRandom::new(seed);
    blob.settle(RotorBlob::SOURCE)?;
    let mut bugs: Vec<Coord2> = vec![RotorBlob::SOURCE; (n - 1) as usize];
    let cap = SWARM_STEP_CAP.saturating_mul(n.div_ceil(10_000).max(1));
    let mut hops = 0u64;
    while !bugs.is_empty() {
        if hops >= cap {
            return Err(Error::StepCapExceeded {
                what: "rotor swarm",
                cap,
            });
        }
        hops += 1;
        let k = rng.below(bugs.len() as u64) as usize;
        let next = blob.fire(bugs[k]);
        if blob.is_occupied(next) {
            bugs[k] = next;
        } else {
            blob.settle(next)?;
            bugs.swap_remove(k);
        }
    }
    Ok(blob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::run_sequential;

    #[test]
    fn empty_and_single() {
        assert_eq!(run_swarm(0, 1).unwrap().n(), 0);
        assert!(run_swarm(0, 1).unwrap().occupied_sites().is_empty());
        assert_eq!(run_swarm(1, 1).unwrap(), run_sequential(1).unwrap());
    }

    #[test]
    fn matches_sequential_state() {
        let target = run_sequential(250).unwrap();
        for seed in 0..5 {
            assert_eq!(run_swarm(250, seed).unwrap(), target);
        }
    }
}
