use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidParameter(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// The unit interval `[0, 1]`.
    pub const fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    /// Lebesgue measure.
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Length of the overlap with `other` (zero when disjoint).
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_within_unit(&self) -> bool {
        self.lo >= 0.0 && self.hi <= 1.0
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed() {
        assert!(Interval::new(0.5, 0.25).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn overlap_and_intersection() {
        let a = Interval::new(0.0, 0.5).unwrap();
        let b = Interval::new(0.25, 1.0).unwrap();
        assert_eq!(a.overlap(&b), 0.25);
        assert_eq!(a.intersect(&b), Some(Interval { lo: 0.25, hi: 0.5 }));
        let c = Interval::new(0.75, 1.0).unwrap();
        assert_eq!(a.overlap(&c), 0.0);
        assert!(a.intersect(&c).is_none());
    }
}
