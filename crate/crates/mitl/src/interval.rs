use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval bounds must be finite and non-negative, got lower bound {0}")]
    BadLower(f64),
    #[error("interval upper bound {hi} must exceed lower bound {lo}")]
    Empty { lo: f64, hi: f64 },
    #[error("an unbounded interval cannot be closed at infinity")]
    ClosedAtInfinity,
}

/// A time interval with non-negative lower bound and a strictly larger
/// (possibly infinite) upper bound.
#[derive(Debug, Clone, Copy)]
pub struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Result<Self, IntervalError> {
        if !lo.is_finite() || lo < 0.0 {
            return Err(IntervalError::BadLower(lo));
        }
        if hi.is_nan() || hi <= lo {
            return Err(IntervalError::Empty { lo, hi });
        }
        if hi == f64::INFINITY && hi_closed {
            return Err(IntervalError::ClosedAtInfinity);
        }
        Ok(Self {
            lo: lo + 0.0,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        Self::new(lo, true, hi, true)
    }

    /// `[lo, inf)`
    pub fn from(lo: f64) -> Result<Self, IntervalError> {
        Self::new(lo, true, f64::INFINITY, false)
    }

    /// `[0, inf)`, the interval assumed when a formula omits one.
    pub fn unrestricted() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
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

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn contains(&self, d: f64) -> bool {
        let above = if self.lo_closed {
            d >= self.lo
        } else {
            d > self.lo
        };
        let below = if self.hi_closed {
            d <= self.hi
        } else {
            d < self.hi
        };
        above && below
    }

    /// True once `d` lies strictly beyond every point of the interval.
    pub fn is_past(&self, d: f64) -> bool {
        if self.hi_closed {
            d > self.hi
        } else {
            d >= self.hi
        }
    }

    /// True once `d` and everything after it exceed the lower bound.
    pub fn is_above_lower(&self, d: f64) -> bool {
        d > self.lo
    }

    /// The interval seen from a point `delta` time units later, clipped to
    /// non-negative delays. `None` when nothing of it remains.
    ///
    /// For `d >= 0`: `shifted.contains(d)` iff `self.contains(d + delta)`.
    pub fn shift(&self, delta: f64) -> Option<Interval> {
        let hi = self.hi - delta;
        if hi < 0.0 || (hi == 0.0 && !self.hi_closed) {
            return None;
        }
        let lo = self.lo - delta;
        let (lo, lo_closed) = if lo < 0.0 {
            (0.0, true)
        } else {
            (lo + 0.0, self.lo_closed)
        };
        // hi == lo only when clipping leaves the single point [0,0].
        Some(Interval {
            lo,
            hi,
            lo_closed,
            hi_closed: self.hi_closed,
        })
    }

    fn key(&self) -> (u64, u64, bool, bool) {
        (
            self.lo.to_bits(),
            self.hi.to_bits(),
            self.lo_closed,
            self.hi_closed,
        )
    }
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Interval {}

impl Hash for Interval {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then(self.hi.total_cmp(&other.hi))
            .then(self.lo_closed.cmp(&other.lo_closed))
            .then(self.hi_closed.cmp(&other.hi_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        if self.hi.is_finite() {
            let close = if self.hi_closed { ']' } else { ')' };
            write!(f, "{open}{},{}{close}", self.lo, self.hi)
        } else {
            write!(f, "{open}{},inf)", self.lo)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_bounds() {
        assert!(matches!(
            Interval::closed(3.0, 2.0),
            Err(IntervalError::Empty { .. })
        ));
        assert!(Interval::closed(2.0, 2.0).is_err());
        assert!(Interval::new(0.0, true, f64::INFINITY, true).is_err());
        assert!(Interval::closed(-1.0, 2.0).is_err());
    }

    #[test]
    fn membership_respects_open_ends() {
        let i = Interval::new(2.0, false, 4.0, true).unwrap();
        assert!(!i.contains(2.0));
        assert!(i.contains(3.0));
        assert!(i.contains(4.0));
        assert!(!i.contains(4.5));
        assert!(i.is_past(4.5));
        assert!(!i.is_past(4.0));
    }

    #[test]
    fn shift_preserves_membership() {
        let intervals = [
            Interval::closed(0.0, 5.0).unwrap(),
            Interval::new(2.0, false, 4.0, false).unwrap(),
            Interval::new(1.0, true, 3.0, false).unwrap(),
            Interval::from(2.5).unwrap(),
            Interval::new(3.0, false, f64::INFINITY, false).unwrap(),
        ];
        for i in intervals {
            for delta in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
                let shifted = i.shift(delta);
                for k in 0..40 {
                    let d = k as f64 * 0.25;
                    let expect = i.contains(d + delta);
                    let got = shifted.is_some_and(|s| s.contains(d));
                    assert_eq!(got, expect, "{i} shifted by {delta} at {d}");
                }
            }
        }
    }

    #[test]
    fn shift_to_single_point() {
        let i = Interval::closed(0.0, 5.0).unwrap();
        let s = i.shift(5.0).unwrap();
        assert!(s.contains(0.0));
        assert!(!s.contains(0.1));
        assert!(Interval::new(0.0, true, 5.0, false)
            .unwrap()
            .shift(5.0)
            .is_none());
    }

    #[test]
    fn display() {
        assert_eq!(Interval::closed(0.0, 50.0).unwrap().to_string(), "[0,50]");
        assert_eq!(Interval::unrestricted().to_string(), "[0,inf)");
        assert_eq!(
            Interval::new(2.0, false, 4.5, true).unwrap().to_string(),
            "(2,4.5]"
        );
    }
}
