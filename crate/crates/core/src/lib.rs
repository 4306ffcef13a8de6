//! Deterministic lattice walks and aggregation.
//!
//! * [`goldbug`]: the one-dimensional +1/-2 walker steered by two-state
//!   arrows, with exact `Z[phi]` invariants and the base-Fibonacci reading of
//!   the arrows.
//! * [`rotor`]: rotor-router aggregation in the plane, its swarm and
//!   card-stack variants, and flow checks on the departure counts.
//! * [`sandpile`]: greedy and standard abelian sandpiles grown from the
//!   origin.
//! * [`idla`]: internal diffusion limited aggregation, including the
//!   card-constrained coupling with a rotor run.
//! * [`discrepancy`]: rotor walks of many bugs on `Z` and `Z^2` against the
//!   expected random-walk distribution.
//! * [`render`]: PPM images of blobs and sandpiles.

pub mod discrepancy;
pub mod error;
pub mod goldbug;
pub mod idla;
pub mod lattice;
pub mod render;
pub mod rotor;
pub mod sandpile;

pub use error::{Error, Result};
pub use lattice::{Coord2, DenseGrid, Direction, SeededRandom};
