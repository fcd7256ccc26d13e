//! Interval sets on the extended real line and closed arcs on the unit circle.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// Half-open `[lo, hi)`, the shape of a right-continuous piece.
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }
}

/// Sorted, pairwise disjoint intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    items: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Normalises by sorting and merging overlapping or touching pieces.
    pub fn from_intervals(mut items: Vec<Interval>) -> Self {
        items.retain(|i| !i.is_empty());
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for it in items {
            if let Some(last) = out.last_mut() {
                let touches = it.lo < last.hi || (it.lo == last.hi && (it.lo_closed || last.hi_closed));
                if touches {
                    if it.hi > last.hi || (it.hi == last.hi && it.hi_closed) {
                        last.hi = it.hi;
                        last.hi_closed = it.hi_closed || (it.hi == last.hi && last.hi_closed);
                    }
                    continue;
                }
            }
            out.push(it);
        }
        IntervalSet { items: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.items
    }

    pub fn contains(&self, x: f64) -> bool {
        self.items.iter().any(|i| i.contains(x))
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.items.iter().map(Interval::length).sum()
    }

    /// Measure of the part inside `(a, b)`.
    pub fn measure_within(&self, a: f64, b: f64) -> f64 {
        self.items
            .iter()
            .map(|i| (i.hi.min(b) - i.lo.max(a)).max(0.0))
            .sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.items.clone();
        all.extend_from_slice(&other.items);
        IntervalSet::from_intervals(all)
    }
}

/// Check the probe intervals `I`, `J`: open, nonempty, inside `R \ {0}`,
/// with disjoint closures and at least one of them bounded.
pub fn validate_pair(i: &Interval, j: &Interval) -> Result<()> {
    for (name, x) in [("I", i), ("J", j)] {
        if !(x.lo < x.hi) || x.lo.is_nan() || x.hi.is_nan() {
            return Err(Error::IntervalValidation(format!("{name} = ({}, {}) is empty", x.lo, x.hi)));
        }
        if x.lo_closed || x.hi_closed {
            return Err(Error::IntervalValidation(format!("{name} must be open")));
        }
        if x.lo < 0.0 && x.hi > 0.0 {
            return Err(Error::IntervalValidation(format!("{name} = ({}, {}) contains 0", x.lo, x.hi)));
        }
    }
    if !(i.hi < j.lo || j.hi < i.lo) {
        return Err(Error::IntervalValidation("closures of I and J intersect".into()));
    }
    if !i.is_bounded() && !j.is_bounded() {
        return Err(Error::IntervalValidation("at least one of I and J must be bounded".into()));
    }
    Ok(())
}

/// Closed arc `{e^{i theta} : theta in [a, b]}` with `0 <= b - a < 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub a: f64,
    pub b: f64,
}

impl Arc {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b < a || b - a >= TAU {
            return Err(Error::ArcGeometry(format!("[{a}, {b}] is not a proper arc")));
        }
        Ok(Arc { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Membership of the angle `theta`, taken mod `2 pi`.
    pub fn contains_angle(&self, theta: f64) -> bool {
        let off = (theta - self.a).rem_euclid(TAU);
        off <= self.length() + 1e-13 || off >= TAU - 1e-13
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_measure() {
        let s = IntervalSet::from_intervals(vec![
            Interval::closed_open(0.5, 1.0),
            Interval::closed_open(0.0, 0.5),
            Interval::open(2.0, 3.0),
        ]);
        assert_eq!(s.intervals().len(), 2);
        assert_eq!(s.measure(), 2.0);
        assert_eq!(s.measure_within(0.25, 2.5), 1.25);
        assert!(s.contains(0.5) && !s.contains(1.0) && !s.contains(2.0));
    }

    #[test]
    fn pair_validation() {
        let ok = validate_pair(&Interval::open(1.5, 4.5), &Interval::open(-4.5, -1.5));
        assert!(ok.is_ok());
        assert!(validate_pair(&Interval::open(-1.0, 1.0), &Interval::open(2.0, 3.0)).is_err());
        assert!(validate_pair(&Interval::open(1.0, 2.0), &Interval::open(2.0, 3.0)).is_err());
        assert!(validate_pair(
            &Interval::open(2.0, f64::INFINITY),
            &Interval::open(f64::NEG_INFINITY, -1.0)
        )
        .is_err());
        assert!(validate_pair(&Interval::closed(1.0, 2.0), &Interval::open(3.0, 4.0)).is_err());
    }

    #[test]
    fn arc_membership_wraps() {
        let arc = Arc::new(3.0 * std::f64::consts::FRAC_PI_2, 5.0 * std::f64::consts::FRAC_PI_2).unwrap();
        assert!(arc.contains_angle(0.0));
        assert!(arc.contains_angle(TAU));
        assert!(!arc.contains_angle(std::f64::consts::PI));
        assert!(Arc::new(0.0, 7.0).is_err());
    }
}
