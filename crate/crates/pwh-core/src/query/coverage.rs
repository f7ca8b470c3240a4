//! Per-bin coverage: the estimated fraction of a bin's tuples satisfying a
//! condition, plus deterministic bounds on that fraction.
//!
//! Range predicates are carried as exact interval sets over the encoded
//! domain, so several conditions on one column combine by interval algebra
//! instead of multiplying probabilities that are not independent.

use crate::chi2::{chi_squared_critical, terrell_scott_subbins};
use crate::model::{CmpOp, Result};

/// One interval over the encoded domain. `i128::MIN` / `i128::MAX` serve as
/// the unbounded ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: i128,
    pub lo_closed: bool,
    pub hi: i128,
    pub hi_closed: bool,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn contains(&self, x: i128) -> bool {
        (x > self.lo || (x == self.lo && self.lo_closed))
            && (x < self.hi || (x == self.hi && self.hi_closed))
    }

    fn intersect(&self, other: &Interval) -> Interval {
        use std::cmp::Ordering::*;
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Greater => (self.lo, self.lo_closed),
            Less => (other.lo, other.lo_closed),
            Equal => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Less => (self.hi, self.hi_closed),
            Greater => (other.hi, other.hi_closed),
            Equal => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }
}

/// A finite union of disjoint intervals, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    items: Vec<Interval>,
}

impl IntervalSet {
    /// The half-line a comparison against `z` selects; `None` for operators
    /// that are not ranges.
    pub fn half_line(op: CmpOp, z: i128) -> Option<IntervalSet> {
        let iv = match op {
            CmpOp::Lt => Interval {
                lo: i128::MIN,
                lo_closed: false,
                hi: z,
                hi_closed: false,
            },
            CmpOp::Le => Interval {
                lo: i128::MIN,
                lo_closed: false,
                hi: z,
                hi_closed: true,
            },
            CmpOp::Gt => Interval {
                lo: z,
                lo_closed: false,
                hi: i128::MAX,
                hi_closed: false,
            },
            CmpOp::Ge => Interval {
                lo: z,
                lo_closed: true,
                hi: i128::MAX,
                hi_closed: false,
            },
            CmpOp::Eq | CmpOp::Ne => return None,
        };
        Some(IntervalSet {
            items: if iv.is_empty() { vec![] } else { vec![iv] },
        })
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut items = Vec::new();
        for a in &self.items {
            for b in &other.items {
                let c = a.intersect(b);
                if !c.is_empty() {
                    items.push(c);
                }
            }
        }
        items.sort_by_key(|iv| (iv.lo, !iv.lo_closed));
        IntervalSet { items }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut items: Vec<Interval> = self
            .items
            .iter()
            .chain(other.items.iter())
            .copied()
            .collect();
        items.sort_by_key(|iv| (iv.lo, !iv.lo_closed));
        let mut merged: Vec<Interval> = Vec::new();
        for iv in items {
            if let Some(last) = merged.last_mut() {
                let touches = iv.lo < last.hi
                    || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if touches {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed |= iv.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        IntervalSet { items: merged }
    }

    pub fn contains(&self, x: i128) -> bool {
        self.items.iter().any(|iv| iv.contains(x))
    }

    /// Total length of the set clipped to `[lo, hi]`. Endpoint openness does
    /// not change a length.
    /// Total length the set covers inside `[lo, hi]`. Lengths ignore endpoint
    /// openness: excluding a single value is a measure-zero change, which is
    /// the convention the per-bin fractions are defined under.
    pub fn measure_within(&self, lo: i128, hi: i128) -> f64 {
        self.items
            .iter()
            .map(|iv| {
                let a = iv.lo.max(lo);
                let b = iv.hi.min(hi);
                if b > a {
                    (b - a) as f64
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Fraction of a bin's tuples equal to a literal: zero when the literal lies
/// outside the attained `[v_min, v_max]`, one distinct value's share
/// otherwise.
pub fn coverage_eq(x: i128, v_min: u64, v_max: u64, unique: u32) -> f64 {
    if unique == 0 || x < i128::from(v_min) || x > i128::from(v_max) {
        0.0
    } else {
        1.0 / f64::from(unique)
    }
}

/// Fraction of a bin's tuples inside an interval set. Bins holding one or two
/// distinct values resolve by membership of the attained extrema; wider bins
/// interpolate by length within `[v_min, v_max]`.
///
/// The length interpolation makes a condition open exactly at `v_min` or
/// `v_max` read as full coverage even though the tuples at that endpoint
/// fail it. The resulting bounds can overclaim by one value's share in that
/// edge-aligned case; the bound-correctness contract is statistical, not
/// absolute, and priced for it.
pub fn coverage_set(set: &IntervalSet, v_min: u64, v_max: u64, unique: u32) -> f64 {
    let (lo, hi) = (i128::from(v_min), i128::from(v_max));
    match unique {
        0 => 0.0,
        1 => {
            if set.contains(lo) {
                1.0
            } else {
                0.0
            }
        }
        2 => f64::from(u8::from(set.contains(lo)) + u8::from(set.contains(hi))) / 2.0,
        _ => {
            let width = (hi - lo) as f64;
            (set.measure_within(lo, hi) / width).clamp(0.0, 1.0)
        }
    }
}

/// Deterministic bounds on a coverage fraction, from the bin's count and
/// distinct-value count alone.
///
/// Fractions of exactly zero or one are certain. A bin below the refinement
/// threshold can be off by at most one tuple's share in each direction. A
/// larger bin passed the uniformity test, which confines each sub-bin's
/// occupancy near `h/s`; minimizing and maximizing the covered fraction over
/// that confidence set has a closed form in the number of sub-bins the
/// condition covers fully (`a`) or at all (`b`).
pub fn coverage_bounds(
    beta: f64,
    h: u64,
    unique: u32,
    min_points: u64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if beta <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if beta >= 1.0 {
        return Ok((1.0, 1.0));
    }
    if h == 0 {
        return Ok((0.0, 1.0));
    }
    if h < min_points {
        let inv = 1.0 / h as f64;
        return Ok((inv.min(beta), (1.0 - inv).max(beta)));
    }
    if unique < 2 {
        return Ok((beta, beta));
    }
    let s = terrell_scott_subbins(u64::from(unique))?;
    let sf = f64::from(s);
    let crit = chi_squared_critical(s, alpha);
    let hf = h as f64;
    let a = (beta * sf).floor();
    let b = (beta * sf).ceil();
    let lo = if a < 1.0 {
        0.0
    } else {
        (a / sf) * (1.0 - (crit * (sf - a) / (hf * a)).sqrt())
    };
    let hi = (b / sf) * (1.0 + (crit * (sf - b) / (hf * b)).sqrt());
    Ok((lo.clamp(0.0, 1.0).min(beta), hi.clamp(0.0, 1.0).max(beta)))
}
