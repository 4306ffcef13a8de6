use serde::{Deserialize, Serialize};

use super::zphi::{PHI_MINUS, PHI_PLUS};
use super::STEP_CAP;
use crate::error::{Error, Result};
use crate::lattice::SeededRandom;

/// Probability that the fair +1/-2 walk from `i` is absorbed at `-1` before `0`.
///
/// Solves `p(i) = (p(i+1) + p(i-2)) / 2` with `p(-1) = 1`, `p(0) = 0` and `p`
/// bounded, which gives `(1 - phi_-^i) / phi_+^2`.
pub fn analytic_ruin_probability(i: i64) -> Result<f64> {
    if i < -1 {
        return Err(Error::OutOfRange(format!("start {i} is below -1")));
    }
    Ok((1.0 - PHI_MINUS.powi(i as i32)) / (PHI_PLUS * PHI_PLUS))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuinEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Fraction of `trials` seeded walks from `i` absorbed at `-1`.
pub fn monte_carlo_ruin(i: i64, trials: u64, seed: u64) -> Result<RuinEstimate> {
    if trials == 0 {
        return Err(Error::PreconditionViolated(
            "need at least one trial".into(),
        ));
    }
    if i < -1 {
        return Err(Error::OutOfRange(format!("start {i} is below -1")));
    }
    let mut rng = SeededRandom::new(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut p = i;
        let mut steps = 0u64;
        while p > 0 {
            if steps >= STEP_CAP {
                return Err(Error::StepCapExceeded {
                    what: "ruin trial",
                    cap: STEP_CAP,
                });
            }
            steps += 1;
            p += if rng.coin() { 1 } else { -2 };
        }
        if p == -1 {
            hits += 1;
        }
    }
    let est = hits as f64 / trials as f64;
    Ok(RuinEstimate {
        estimate: est,
        stderr: (est * (1.0 - est) / trials as f64).sqrt(),
        trials,
    })
}
