//! Intervals on the extended likelihood-ratio axis `[0, +∞]`.
//!
//! Every measure query in this crate is phrased as "mass of
//! `{x : p(x)/r(x) ∈ I}`" for such an interval. Endpoints may be `0` or
//! `+∞` and each side carries its own closure flag; a closed right
//! endpoint at `+∞` means the interval contains the ratio atom living on
//! `{r = 0}`.

use crate::ext::ExtReal;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An interval of likelihood-ratio values inside `[0, +∞]`.
///
/// Degenerate intervals are allowed: `[a, a]` is the point `{a}` and any
/// other combination of equal endpoints is empty (useful as a neutral
/// restriction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInterval {
    #[serde(with = "endpoint")]
    lo: f64,
    #[serde(with = "endpoint")]
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl RatioInterval {
    /// Builds an interval, validating that `0 ≤ lo ≤ hi` and that neither
    /// endpoint is NaN.
    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Result<RatioInterval> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::BadInterval("endpoint is NaN".into()));
        }
        if lo < 0.0 {
            return Err(Error::BadInterval(format!("negative endpoint {lo}")));
        }
        if lo > hi {
            return Err(Error::BadInterval(format!("lo {lo} exceeds hi {hi}")));
        }
        Ok(RatioInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    /// `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<RatioInterval> {
        RatioInterval::new(lo, true, hi, true)
    }

    /// `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Result<RatioInterval> {
        RatioInterval::new(lo, true, hi, false)
    }

    /// `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Result<RatioInterval> {
        RatioInterval::new(lo, false, hi, false)
    }

    /// The single point `{x}`.
    pub fn point(x: f64) -> Result<RatioInterval> {
        RatioInterval::new(x, true, x, true)
    }

    /// The whole axis `[0, +∞]`, ratio atoms included.
    pub fn full() -> RatioInterval {
        RatioInterval {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// A canonical empty interval.
    pub fn empty() -> RatioInterval {
        RatioInterval {
            lo: 1.0,
            hi: 1.0,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi && !(self.lo_closed && self.hi_closed)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi && self.lo_closed && self.hi_closed
    }

    /// Whether the interval contains the `+∞` ratio atom.
    pub fn contains_infinity(&self) -> bool {
        self.hi == f64::INFINITY && self.hi_closed
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = x > self.lo || (self.lo_closed && x == self.lo);
        let below = x < self.hi || (self.hi_closed && x == self.hi);
        above && below
    }

    /// Interval length in ratio space (ignores closure; `+∞` if unbounded).
    pub fn width(&self) -> ExtReal {
        ExtReal::from_f64(self.hi - self.lo)
    }

    /// Splits the interval at an interior point into `[lo, at) ∪ [at, hi]`,
    /// keeping the outer closures.
    pub fn split_at(&self, at: f64) -> Result<(RatioInterval, RatioInterval)> {
        if !(at > self.lo && at < self.hi) || at.is_nan() || at.is_infinite() {
            return Err(Error::BadInterval(format!(
                "split point {at} is not interior to {self}"
            )));
        }
        let left = RatioInterval::new(self.lo, self.lo_closed, at, false)?;
        let right = RatioInterval::new(at, true, self.hi, self.hi_closed)?;
        Ok((left, right))
    }
}

impl fmt::Display for RatioInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lb = if self.lo_closed { '[' } else { '(' };
        let rb = if self.hi_closed { ']' } else { ')' };
        write!(f, "{lb}{}, {}{rb}", self.lo, self.hi)
    }
}

/// Serde helper for endpoints that may be `+∞`.
mod endpoint {
    use crate::ext::ExtReal;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtReal::from_f64(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(ExtReal::deserialize(d)?.as_f64())
    }
}
