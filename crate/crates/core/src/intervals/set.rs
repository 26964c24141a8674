use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::IntervalError;
use crate::axioms::StageSet;

/// Finite union of half-open intervals `[lo, hi)` in canonical form.
///
/// Parts are sorted, pairwise disjoint and non-adjacent (`hi_i < lo_{i+1}`),
/// with `lo < hi` in every part. Endpoints are compared exactly; there is no
/// epsilon anywhere in the algebra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    parts: Vec<[f64; 2]>,
}

impl From<Vec<[f64; 2]>> for IntervalSet {
    fn from(parts: Vec<[f64; 2]>) -> Self {
        IntervalSet::from_parts(parts)
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(set: IntervalSet) -> Self {
        set.parts
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    /// `[lo, hi)`, empty unless `lo < hi`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        IntervalSet::from_parts([[lo, hi]])
    }

    /// `[0, ∞)`.
    pub fn half_line() -> Self {
        IntervalSet::interval(0.0, f64::INFINITY)
    }

    /// `(-∞, ∞)`.
    pub fn real_line() -> Self {
        IntervalSet::interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Canonicalizes arbitrary parts; parts with `!(lo < hi)` (including NaN) are dropped.
    pub fn from_parts(parts: impl IntoIterator<Item = [f64; 2]>) -> Self {
        let mut parts: Vec<[f64; 2]> = parts.into_iter().filter(|[lo, hi]| lo < hi).collect();
        parts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap_or(Ordering::Equal));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(parts.len());
        for [lo, hi] in parts {
            match merged.last_mut() {
                Some(last) if lo <= last[1] => {
                    if hi > last[1] {
                        last[1] = hi;
                    }
                }
                _ => merged.push([lo, hi]),
            }
        }
        IntervalSet { parts: merged }
    }

    pub fn parts(&self) -> &[[f64; 2]] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Total length, summed in ascending order.
    pub fn measure(&self) -> f64 {
        self.parts.iter().map(|[lo, hi]| hi - lo).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        let idx = self.parts.partition_point(|p| p[0] <= t);
        idx > 0 && t < self.parts[idx - 1][1]
    }

    /// Left endpoint of the first part.
    pub fn sample_point(&self) -> Result<f64, IntervalError> {
        self.parts
            .first()
            .map(|p| p[0])
            .ok_or(IntervalError::EmptySet)
    }

    pub fn inf(&self) -> Option<f64> {
        self.parts.first().map(|p| p[0])
    }

    pub fn sup(&self) -> Option<f64> {
        self.parts.last().map(|p| p[1])
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_parts(self.parts.iter().chain(other.parts.iter()).copied())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i][0].max(b[j][0]);
            let hi = a[i][1].min(b[j][1]);
            if lo < hi {
                out.push([lo, hi]);
            }
            if a[i][1] < b[j][1] {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces come out sorted and separated because each input is canonical
        IntervalSet { parts: out }
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let b = &other.parts;
        let mut out = Vec::new();
        let mut j = 0;
        for &[lo, hi] in &self.parts {
            let mut cur = lo;
            while j < b.len() && b[j][1] <= cur {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k][0] < hi {
                if b[k][0] > cur {
                    out.push([cur, b[k][0]]);
                }
                cur = cur.max(b[k][1]);
                if cur >= hi {
                    break;
                }
                k += 1;
            }
            if cur < hi {
                out.push([cur, hi]);
            }
        }
        IntervalSet { parts: out }
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }
}

impl StageSet for IntervalSet {
    fn empty() -> Self {
        IntervalSet::empty()
    }
    fn is_empty(&self) -> bool {
        IntervalSet::is_empty(self)
    }
    fn union(&self, other: &Self) -> Self {
        IntervalSet::union(self, other)
    }
    fn intersection(&self, other: &Self) -> Self {
        IntervalSet::intersection(self, other)
    }
    fn difference(&self, other: &Self) -> Self {
        IntervalSet::difference(self, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(parts: &[[f64; 2]]) -> IntervalSet {
        IntervalSet::from_parts(parts.iter().copied())
    }

    #[test]
    fn basic_algebra() {
        assert_eq!(
            set(&[[0.0, 2.0]]).intersection(&set(&[[1.0, 3.0]])),
            set(&[[1.0, 2.0]])
        );
        assert_eq!(set(&[[0.0, 1.0], [2.0, 2.5]]).measure(), 1.5);
        assert_eq!(
            set(&[[0.0, 3.0]]).difference(&set(&[[1.0, 2.0]])),
            set(&[[0.0, 1.0], [2.0, 3.0]])
        );
    }

    #[test]
    fn canonical_merging() {
        let s = set(&[
            [2.0, 3.0],
            [0.0, 1.0],
            [1.0, 2.0],
            [5.0, 4.0],
            [f64::NAN, 1.0],
        ]);
        assert_eq!(s.parts(), &[[0.0, 3.0]]);
    }

    #[test]
    fn membership_is_half_open() {
        let s = set(&[[0.0, 1.0], [2.0, 3.0]]);
        assert!(s.contains(0.0));
        assert!(!s.contains(1.0));
        assert!(s.contains(2.5));
        assert!(!s.contains(-1.0));
        assert!(!s.contains(3.0));
    }

    #[test]
    fn sample_of_empty_set_errors() {
        assert_eq!(
            IntervalSet::empty().sample_point(),
            Err(IntervalError::EmptySet)
        );
        assert_eq!(set(&[[4.0, 5.0], [1.0, 2.0]]).sample_point(), Ok(1.0));
    }

    #[test]
    fn difference_with_several_holes() {
        let a = set(&[[0.0, 10.0], [20.0, 30.0]]);
        let b = set(&[[-1.0, 1.0], [3.0, 4.0], [9.0, 21.0], [29.0, 40.0]]);
        assert_eq!(
            a.difference(&b),
            set(&[[1.0, 3.0], [4.0, 9.0], [21.0, 29.0]])
        );
    }

    #[test]
    fn serde_canonicalizes_input() {
        let parsed: IntervalSet = serde_json::from_str("[[1.0,2.0],[0.0,1.5]]").unwrap();
        assert_eq!(parsed, set(&[[0.0, 2.0]]));
        assert_eq!(serde_json::to_string(&parsed).unwrap(), "[[0.0,2.0]]");
    }
}
