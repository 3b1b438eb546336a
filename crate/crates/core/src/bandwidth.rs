//! Fixed-point bandwidth.
//!
//! Link capacities and connection rates are kept as integer kilobits per second so that
//! capacity bookkeeping is exact: a throttle followed by the matching upgrade restores the
//! state bit for bit, and per-link usage is always the exact sum of its connections.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Units per Gbps (1 unit = 1 kbps).
pub const UNITS_PER_GBPS: i64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bandwidth(i64);

impl Bandwidth {
    pub const ZERO: Bandwidth = Bandwidth(0);

    pub const fn from_units(units: i64) -> Self {
        Bandwidth(units)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    /// Rounds to the nearest kbps.
    pub fn from_gbps(gbps: f64) -> Self {
        Bandwidth((gbps * UNITS_PER_GBPS as f64).round() as i64)
    }

    /// Smallest representable bandwidth that is at least `gbps - slack_units`.
    pub fn ceil_gbps(gbps: f64, slack_units: f64) -> Self {
        Bandwidth((gbps * UNITS_PER_GBPS as f64 - slack_units).ceil() as i64)
    }

    pub fn gbps(self) -> f64 {
        self.0 as f64 / UNITS_PER_GBPS as f64
    }

    pub fn to_scalar<S: Scalar>(self) -> S {
        S::lit(self.gbps())
    }

    /// `self * factor`, rounded to the nearest unit.
    pub fn scale(self, factor: f64) -> Self {
        Bandwidth((self.0 as f64 * factor).round() as i64)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn saturating_sub(self, other: Bandwidth) -> Bandwidth {
        Bandwidth((self.0 - other.0).max(0))
    }
}

impl Add for Bandwidth {
    type Output = Bandwidth;
    fn add(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0 + rhs.0)
    }
}

impl Sub for Bandwidth {
    type Output = Bandwidth;
    fn sub(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0 - rhs.0)
    }
}

impl AddAssign for Bandwidth {
    fn add_assign(&mut self, rhs: Bandwidth) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Bandwidth {
    fn sub_assign(&mut self, rhs: Bandwidth) {
        self.0 -= rhs.0;
    }
}

impl Sum for Bandwidth {
    fn sum<I: Iterator<Item = Bandwidth>>(iter: I) -> Bandwidth {
        Bandwidth(iter.map(|b| b.0).sum())
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Gbps", self.gbps())
    }
}
