//! Open subinterval unions of (0,1), used as actuator / delay supports.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite union of disjoint open subintervals of (0,1).
///
/// Construction normalizes the input: intervals are sorted, touching or
/// overlapping intervals are merged, and degenerate (zero-length) intervals
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(raw: Vec<(f64, f64)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInterval("empty interval list".into()));
        }
        let mut sorted = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInterval("non-finite endpoint".into()));
            }
            if lo >= hi {
                return Err(Error::InvalidInterval(format!(
                    "zero-length or reversed interval ({lo}, {hi})"
                )));
            }
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::InvalidInterval(format!(
                    "interval ({lo}, {hi}) not contained in (0, 1)"
                )));
            }
            sorted.push((lo, hi));
        }
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Merge touching intervals.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (lo, hi) in sorted {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self { intervals: merged })
    }

    /// The full domain (0,1).
    pub fn full() -> Self {
        Self {
            intervals: vec![(0.0, 1.0)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Total Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// True when the two sets are disjoint up to `tol` overlap.
    pub fn disjoint_from(&self, other: &IntervalSet, tol: f64) -> bool {
        for &(alo, ahi) in &self.intervals {
            for &(blo, bhi) in other.intervals() {
                let overlap = ahi.min(bhi) - alo.max(blo);
                if overlap > tol {
                    return false;
                }
            }
        }
        true
    }

    /// True when `self` and `other` are disjoint and their union covers (0,1)
    /// up to measure `tol`.
    pub fn covers_unit_with(&self, other: &IntervalSet, tol: f64) -> bool {
        if !self.disjoint_from(other, tol) {
            return false;
        }
        let mut all: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .chain(other.intervals().iter())
            .copied()
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut end = 0.0_f64;
        for (lo, hi) in all {
            if lo - end > tol {
                return false;
            }
            end = end.max(hi);
        }
        1.0 - end <= tol
    }
}
