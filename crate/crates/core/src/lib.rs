//! Continuous-approximation design of AB-type skip-stop transit service on a
//! loop corridor with spatially heterogeneous demand.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! - [`demand`]: gridded origin-destination densities and their aggregates
//!   (origin/destination densities, directional totals, on-board flows) and
//!   the backtracking-trip densities of a skip-stop design.
//! - [`cost`]: user and agency cost components and the generalized cost.
//! - [`heuristic`]: the two-stage design heuristic (pointwise spacing and bay
//!   size with a successive-averages fixed point, then line counts and
//!   headways).
//! - [`bound`]: a relaxation lower bound on the optimal generalized cost.
//! - [`plan`]: conversion of continuous profiles into a discrete stop plan.
//! - [`exact`]: per-OD exact cost accounting on a stop plan.
//!
//! All positions are in km, times in hours, flows in trips per hour. Agency
//! costs are converted to passenger-hours per hour through the value of time.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bound;
pub mod cost;
pub mod demand;
mod error;
pub mod exact;
pub mod heuristic;
pub mod params;
pub mod plan;
pub mod search;
pub mod spline;

pub use error::{Error, Result};

/// Travel direction around the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Clockwise, i.e. increasing position.
    Cw,
    /// Counterclockwise.
    Ccw,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Cw => Direction::Ccw,
            Direction::Ccw => Direction::Cw,
        }
    }
}

pub(crate) mod math {
    pub use libm::{erf, floor, sqrt};
}
