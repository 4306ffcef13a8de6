//! The goldbug walk on the half-line.
//!
//! Sites `1, 2, 3, ...` each hold an arrow. A bug arriving at a site flips its
//! arrow and then hops: to `i + 1` if the arrow now points Outbound, to `i - 2`
//! if it now points Inbound. Cups at `0` and `-1` catch the bugs.

mod ruin;
mod zphi;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ruin::{analytic_ruin_probability, monte_carlo_ruin, RuinEstimate};
pub use zphi::{fibonacci, phi_pow, Root, ZPhi, MAX_PHI_POWER, PHI_MINUS, PHI_PLUS};

/// Per-bug hop budget.
pub const STEP_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ArrowState {
    #[default]
    Outbound,
    Inbound,
}

impl ArrowState {
    /// Outbound is 0, Inbound is 1.
    pub fn digit(self) -> u8 {
        match self {
            ArrowState::Outbound => 0,
            ArrowState::Inbound => 1,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            ArrowState::Outbound => ArrowState::Inbound,
            ArrowState::Inbound => ArrowState::Outbound,
        }
    }
}

/// Where a finished bug came to rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cup {
    /// The cup at `-1`.
    Left,
    /// The cup at `0`.
    Right,
}

impl Cup {
    pub fn position(self) -> i64 {
        match self {
            Cup::Left => -1,
            Cup::Right => 0,
        }
    }
}

/// Shifted Fibonacci labels: `L(-1) = 0`, `L(0) = 1`, `L(i) = L(i-1) + L(i-2)`.
pub fn fib_label(i: i64) -> i64 {
    fibonacci(i + 1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldbugSystem {
    /// `arrows[k]` is the arrow at site `k + 1`; sites past the end are Outbound.
    arrows: Vec<ArrowState>,
    cup_left: u64,
    cup_right: u64,
    bugs_run: u64,
    bug_pos: Option<i64>,
}

impl GoldbugSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cup_left(&self) -> u64 {
        self.cup_left
    }

    pub fn cup_right(&self) -> u64 {
        self.cup_right
    }

    pub fn bugs_run(&self) -> u64 {
        self.bugs_run
    }

    pub fn bug_pos(&self) -> Option<i64> {
        self.bug_pos
    }

    pub fn arrow(&self, site: i64) -> ArrowState {
        if site < 1 {
            return ArrowState::Outbound;
        }
        self.arrows
            .get((site - 1) as usize)
            .copied()
            .unwrap_or_default()
    }

    /// Highest Inbound site, or 0 if every arrow is Outbound.
    pub fn max_inbound_site(&self) -> i64 {
        self.arrows
            .iter()
            .rposition(|&a| a == ArrowState::Inbound)
            .map_or(0, |k| k as i64 + 1)
    }

    /// Iterator over Inbound sites in increasing order.
    pub fn inbound_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.arrows
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == ArrowState::Inbound)
            .map(|(k, _)| k as i64 + 1)
    }

    /// Places a fresh bug at site 1.
    pub fn inject(&mut self) -> Result<()> {
        if self.bug_pos.is_some() {
            return Err(Error::PreconditionViolated(
                "a bug is already in flight".into(),
            ));
        }
        self.bug_pos = Some(1);
        Ok(())
    }

    /// One flip-then-hop. Returns the cup if the bug just landed in one; the
    /// bug stays recorded at the cup position until [`Self::collect`].
    pub fn step_bug(&mut self) -> Result<Option<Cup>> {
        let i = match self.bug_pos {
            Some(i) if i >= 1 => i,
            _ => return Err(Error::PreconditionViolated("no bug on a site".into())),
        };
        let k = (i - 1) as usize;
        if k >= self.arrows.len() {
            self.arrows.resize(k + 1, ArrowState::Outbound);
        }
        let a = self.arrows[k].toggled();
        self.arrows[k] = a;
        let next = match a {
            ArrowState::Outbound => i + 1,
            ArrowState::Inbound => i - 2,
        };
        self.bug_pos = Some(next);
        Ok(match next {
            0 => Some(Cup::Right),
            -1 => Some(Cup::Left),
            _ => None,
        })
    }

    /// Removes a bug sitting in a cup and counts it.
    pub fn collect(&mut self) -> Result<Cup> {
        let cup = match self.bug_pos {
            Some(0) => Cup::Right,
            Some(-1) => Cup::Left,
            _ => return Err(Error::PreconditionViolated("no bug in a cup".into())),
        };
        match cup {
            Cup::Left => self.cup_left += 1,
            Cup::Right => self.cup_right += 1,
        }
        self.bugs_run += 1;
        self.bug_pos = None;
        Ok(cup)
    }

    /// Runs one bug from site 1 into a cup.
    pub fn run_bug(&mut self) -> Result<Cup> {
        self.run_bug_observed(STEP_CAP, |_| {})
    }

    /// Like [`Self::run_bug`] with a custom cap, calling `observe` after
    /// injection and after every hop.
    pub fn run_bug_observed(&mut self, cap: u64, mut observe: impl FnMut(&Self)) -> Result<Cup> {
        self.inject()?;
        observe(self);
        let mut steps = 0u64;
        loop {
            if steps >= cap {
                return Err(Error::StepCapExceeded {
                    what: "goldbug",
                    cap,
                });
            }
            steps += 1;
            let landed = self.step_bug()?;
            observe(self);
            if landed.is_some() {
                return self.collect();
            }
        }
    }

    /// Runs `n` more bugs; returns the cumulative `(cup_left, cup_right)`.
    pub fn run_bugs(&mut self, n: u64) -> Result<(u64, u64)> {
        for _ in 0..n {
            self.run_bug()?;
        }
        Ok((self.cup_left, self.cup_right))
    }

    /// Value of the current configuration: `phi^i` per Inbound site `i`, plus
    /// `phi^(p+1)` for a bug at position `p`.
    pub fn system_value(&self) -> Result<ZPhi> {
        let mut v = ZPhi::ZERO;
        for i in self.inbound_sites() {
            v += phi_pow(i)?;
        }
        if let Some(p) = self.bug_pos {
            v += phi_pow(p + 1)?;
        }
        Ok(v)
    }

    /// Reads the arrows as a base-Fibonacci numeral with labels `L(i - shift)`.
    pub fn fib_decode(&self, shift: u8) -> Result<u64> {
        if shift > 2 {
            return Err(Error::OutOfRange(format!(
                "label shift {shift} not in 0..=2"
            )));
        }
        if self.bug_pos.is_some() {
            return Err(Error::PreconditionViolated("bug in flight".into()));
        }
        let mut total = 0i64;
        for i in self.inbound_sites() {
            if i - shift as i64 > 91 {
                return Err(Error::OutOfRange(format!("label at site {i} overflows")));
            }
            total += fib_label(i - shift as i64);
        }
        Ok(total as u64)
    }

    /// No two consecutive Outbound arrows between site 1 and the top Inbound site.
    pub fn digits_have_no_double_zero(&self) -> bool {
        let top = self.max_inbound_site() as usize;
        !self.arrows[..top]
            .windows(2)
            .any(|w| w[0] == ArrowState::Outbound && w[1] == ArrowState::Outbound)
    }

    /// Arrow digits from site 1 upward to the top Inbound site.
    pub fn digit_string(&self) -> String {
        let top = self.max_inbound_site() as usize;
        self.arrows[..top]
            .iter()
            .map(|a| char::from(b'0' + a.digit()))
            .collect()
    }

    pub fn report(&self) -> Result<GoldbugReport> {
        Ok(GoldbugReport {
            n: self.bugs_run,
            cup_left: self.cup_left,
            cup_right: self.cup_right,
            value_phi_minus: self.system_value()?.numeric(Root::Minus),
            fib0: self.fib_decode(0)?,
            fib1: self.fib_decode(1)?,
            fib2: self.fib_decode(2)?,
            max_inbound_site: self.max_inbound_site(),
        })
    }
}

impl fmt::Display for GoldbugSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} [{}]",
            self.cup_left,
            self.cup_right,
            self.digit_string()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldbugReport {
    pub n: u64,
    pub cup_left: u64,
    pub cup_right: u64,
    pub value_phi_minus: f64,
    pub fib0: u64,
    pub fib1: u64,
    pub fib2: u64,
    pub max_inbound_site: i64,
}

impl GoldbugReport {
    pub const CSV_HEADER: &'static str =
        "n,cup_left,cup_right,value_phi_minus,fib0,fib1,fib2,max_inbound_site";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.cup_left,
            self.cup_right,
            self.value_phi_minus,
            self.fib0,
            self.fib1,
            self.fib2,
            self.max_inbound_site
        )
    }
}
