//! Finite-horizon verification of the four stage conditions.
//!
//! Given the prefix `E_1, ..., E_{H-1}` of a stage sequence, [`check_prefix`]
//! decides conditions 1-3 exactly on the prefix and condition 4 as far as the
//! prefix allows:
//!
//! 1. an empty stage is followed only by empty stages;
//! 2. consecutive nonempty stages share an element and each has an element
//!    the other lacks;
//! 3. every element occupies a contiguous run of stages;
//! 4. every element appears, and disappears for good.
//!
//! Condition 3 is checked with a running union: an element re-enters at stage
//! `m` exactly when it lies in `(E_m \ E_{m-1}) ∩ (E_1 ∪ ... ∪ E_{m-2})`. This
//! works for any set algebra, so the same checker serves enumerated stages
//! and interval stages.

use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::element::Stage;

/// The set operations the checker needs.
pub trait StageSet: Clone + PartialEq {
    fn empty() -> Self;
    fn is_empty(&self) -> bool;
    fn union(&self, other: &Self) -> Self;
    fn intersection(&self, other: &Self) -> Self;
    fn difference(&self, other: &Self) -> Self;

    fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }
}

impl StageSet for Stage {
    fn empty() -> Self {
        Stage::new()
    }
    fn is_empty(&self) -> bool {
        Stage::is_empty(self)
    }
    fn union(&self, other: &Self) -> Self {
        self.iter().chain(other.iter()).cloned().collect()
    }
    fn intersection(&self, other: &Self) -> Self {
        Stage::intersection(self, other).cloned().collect()
    }
    fn difference(&self, other: &Self) -> Self {
        Stage::difference(self, other).cloned().collect()
    }
    fn is_subset(&self, other: &Self) -> bool {
        Stage::is_subset(self, other)
    }
}

/// Three-valued outcome of a horizon-limited check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    /// Conjunction: any FAIL wins, then any UNKNOWN.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
            _ => Verdict::Pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Condition 1: `stage` is empty but the later stage `other` is not.
    NonemptyAfterEmpty,
    /// Condition 2: `E_n ∩ E_{n+1} = ∅` for `n = stage`.
    EmptyOverlap,
    /// Condition 2: `E_n \ E_{n+1} = ∅`.
    NoDepartures,
    /// Condition 2: `E_{n+1} \ E_n = ∅`.
    NoArrivals,
    /// Condition 3: the witness left before `stage` and is back at `stage`.
    Reentry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation<S> {
    pub condition: u8,
    pub stage: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub other: Option<u64>,
    pub kind: ViolationKind,
    pub witness: S,
}

/// What the union of the stages is expected to cover.
#[derive(Clone, Debug)]
pub enum Coverage<S> {
    /// The full ground is known; covering it within the horizon is decisive.
    Complete(S),
    /// Only a finite sample of an infinite ground is known.
    Sampled(S),
    /// No information about the ground.
    Unspecified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport<S> {
    pub horizon: u64,
    /// Verdicts for conditions 1-4, in order.
    pub verdicts: [Verdict; 4],
    pub violations: Vec<Violation<S>>,
    /// Elements that appeared and are gone by stage `horizon - 1`.
    pub closed: S,
    /// Elements still present at stage `horizon - 1` and not known to leave.
    pub open: S,
    /// Appearance half of condition 4.
    pub coverage: Verdict,
    /// Known ground elements never seen in the prefix.
    pub unseen: S,
}

impl<S> AxiomReport<S> {
    pub fn verdict(&self, condition: u8) -> Verdict {
        self.verdicts[(condition - 1) as usize]
    }

    pub fn has_failure(&self) -> bool {
        self.verdicts.contains(&Verdict::Fail)
    }

    /// No FAIL anywhere: conditions 1-3 hold on the prefix and condition 4
    /// holds for every element the prefix can decide.
    pub fn passes_decidable(&self) -> bool {
        !self.has_failure()
    }

    pub fn violations_of(&self, condition: u8) -> impl Iterator<Item = &Violation<S>> {
        self.violations
            .iter()
            .filter(move |v| v.condition == condition)
    }

    /// Number of UNKNOWN verdicts (conditions and coverage).
    pub fn unknown_count(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| **v == Verdict::Unknown)
            .count()
    }
}

/// Checks the prefix `stages[0] = E_1, ..., stages[n-1] = E_n` with horizon `n + 1`.
///
/// `lookahead` is `E_{n+1}` when known. It only decides whether elements of
/// `E_n` are gone one stage later (a lifespan ending exactly at the horizon);
/// conditions 1-3 never look past `E_n`.
pub fn check_prefix<S: StageSet>(
    stages: &[Arc<S>],
    lookahead: Option<&S>,
    coverage: Coverage<S>,
) -> AxiomReport<S> {
    let horizon = stages.len() as u64 + 1;
    let mut violations = Vec::new();
    let at = |k: u64| -> &S { &stages[(k - 1) as usize] };

    // Condition 1.
    if let Some(first_empty) = (1..horizon).find(|&k| at(k).is_empty()) {
        for j in first_empty + 1..horizon {
            if !at(j).is_empty() {
                violations.push(Violation {
                    condition: 1,
                    stage: first_empty,
                    other: Some(j),
                    kind: ViolationKind::NonemptyAfterEmpty,
                    witness: at(j).clone(),
                });
            }
        }
    }

    // Condition 2.
    for n in 1..horizon.saturating_sub(1) {
        let (cur, next) = (at(n), at(n + 1));
        if cur.is_empty() || next.is_empty() {
            continue;
        }
        let checks = [
            (cur.intersection(next), ViolationKind::EmptyOverlap),
            (cur.difference(next), ViolationKind::NoDepartures),
            (next.difference(cur), ViolationKind::NoArrivals),
        ];
        for (set, kind) in checks {
            if set.is_empty() {
                violations.push(Violation {
                    condition: 2,
                    stage: n,
                    other: Some(n + 1),
                    kind,
                    witness: set,
                });
            }
        }
    }

    // Condition 3.
    let mut seen_before_prev = S::empty();
    let mut seen = S::empty();
    for m in 1..horizon {
        if m >= 3 {
            let returned = at(m).difference(at(m - 1)).intersection(&seen_before_prev);
            if !returned.is_empty() {
                violations.push(Violation {
                    condition: 3,
                    stage: m,
                    other: None,
                    kind: ViolationKind::Reentry,
                    witness: returned,
                });
            }
        }
        if m >= 2 {
            seen_before_prev = seen_before_prev.union(at(m - 1));
        }
        seen = seen.union(at(m));
    }

    // Condition 4.
    let open = match (stages.last(), lookahead) {
        (Some(last), Some(next)) => last.intersection(next),
        (Some(last), None) => (**last).clone(),
        (None, _) => S::empty(),
    };
    let closed = seen.difference(&open);
    let (coverage, unseen) = match coverage {
        Coverage::Complete(ground) => {
            let unseen = ground.difference(&seen);
            let v = if unseen.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Unknown
            };
            (v, unseen)
        }
        Coverage::Sampled(sample) => (Verdict::Unknown, sample.difference(&seen)),
        Coverage::Unspecified => (Verdict::Unknown, S::empty()),
    };

    let fails = |c: u8| violations.iter().any(|v: &Violation<S>| v.condition == c);
    let binary = |c: u8| {
        if fails(c) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    };
    let lifetime = if open.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Unknown
    };
    let verdicts = [binary(1), binary(2), binary(3), lifetime.and(coverage)];

    AxiomReport {
        horizon,
        verdicts,
        violations,
        closed,
        open,
        coverage,
        unseen,
    }
}
