//! Appearance/disappearance maps and the evolutions they determine.
//!
//! A chronology assigns each element an appearance index `A(x)` and an
//! exclusive disappearance index `D(x)`; the induced stages are
//! `E_k = {x : A(x) <= k < D(x)}` for `k >= 1`.
//!
//! Indexing: `A` ranges over `{0, 1, 2, ...}` and `D` over `{2, 3, ...}`.
//! With every lifespan at least 2 and `A` hitting every index from 0, each
//! consecutive pair of stages shares the elements born at `k`, loses the
//! elements with `D = k + 1` and gains those with `A = k + 1`. Because stages
//! start at 1, `A = 0` and `A = 1` are indistinguishable from the stages;
//! [`Lifespan::observed`] normalizes that.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::element::{ElementId, Stage};
use crate::error::{EvolutionError, GapKind};
use crate::evolution::{Evolution, Ground};

/// Elements scanned per index before a lazy chronology gives up.
pub const SCAN_LIMIT: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifespan {
    pub appear: u64,
    pub disappear: u64,
}

impl Lifespan {
    pub fn new(appear: u64, disappear: u64) -> Self {
        Lifespan { appear, disappear }
    }

    pub fn alive_at(&self, k: u64) -> bool {
        self.appear <= k && k < self.disappear
    }

    pub fn length(&self) -> u64 {
        self.disappear.saturating_sub(self.appear)
    }

    /// The lifespan as seen through stages indexed from 1.
    pub fn observed(&self) -> Lifespan {
        Lifespan {
            appear: self.appear.max(1),
            disappear: self.disappear,
        }
    }

    fn feasible(&self) -> bool {
        self.appear + 2 <= self.disappear
    }
}

/// A finite chronology: one lifespan per element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chronology {
    pub entries: BTreeMap<ElementId, Lifespan>,
}

impl Chronology {
    pub fn get(&self, x: &ElementId) -> Option<Lifespan> {
        self.entries.get(x).copied()
    }

    pub fn insert(&mut self, x: ElementId, span: Lifespan) {
        self.entries.insert(x, span);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(ElementId, Lifespan)> for Chronology {
    fn from_iter<I: IntoIterator<Item = (ElementId, Lifespan)>>(iter: I) -> Self {
        Chronology {
            entries: iter.into_iter().collect(),
        }
    }
}

type IndexFn = Arc<dyn Fn(i64) -> u64 + Send + Sync>;

/// A chronology on `{start, start + 1, ...}` given by formulas.
///
/// `appear` must be nondecreasing along the enumeration and unbounded, so a
/// stage can be produced by scanning until `appear(x) > k`.
#[derive(Clone)]
pub struct MonotoneChronology {
    pub start: i64,
    appear: IndexFn,
    disappear: IndexFn,
}

impl MonotoneChronology {
    pub fn new(
        start: i64,
        appear: impl Fn(i64) -> u64 + Send + Sync + 'static,
        disappear: impl Fn(i64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        MonotoneChronology {
            start,
            appear: Arc::new(appear),
            disappear: Arc::new(disappear),
        }
    }

    /// `A(x) = x / period`, `D(x) = A(x) + lifespan + x mod period` on `{0, 1, ...}`.
    pub fn periodic(period: u64, lifespan: u64) -> Self {
        let p = period.max(1) as i64;
        MonotoneChronology::new(
            0,
            move |x| (x / p) as u64,
            move |x| (x / p) as u64 + lifespan + (x % p) as u64,
        )
    }

    pub fn lifespan(&self, x: i64) -> Lifespan {
        Lifespan::new((self.appear)(x), (self.disappear)(x))
    }

    fn stage(&self, k: u64) -> Stage {
        let mut stage = Stage::new();
        for x in self.start..self.start + SCAN_LIMIT as i64 {
            let span = self.lifespan(x);
            if span.appear > k {
                break;
            }
            if span.alive_at(k) {
                stage.insert(ElementId::Num(x));
            }
        }
        stage
    }
}

/// Input to [`from_chronology`].
#[derive(Clone)]
pub enum ChronologySource {
    Finite(Chronology),
    Monotone(MonotoneChronology),
}

/// Builds `E_k = {x : A(x) <= k < D(x)}`.
///
/// Finite chronologies are validated completely: every `A(x) + 2 <= D(x)`,
/// `A` hits every index `0..=max A` and `D` hits every index `2..=max A`.
/// Lazy chronologies are validated for indices up to `check_horizon`.
pub fn from_chronology(
    source: ChronologySource,
    check_horizon: u64,
) -> Result<Evolution, EvolutionError> {
    match source {
        ChronologySource::Finite(chron) => {
            validate_finite(&chron)?;
            let ground = Ground::Finite(chron.entries.keys().cloned().collect());
            Ok(Evolution::from_fn(ground, move |k| {
                chron
                    .entries
                    .iter()
                    .filter(|(_, span)| span.alive_at(k))
                    .map(|(x, _)| x.clone())
                    .collect()
            }))
        }
        ChronologySource::Monotone(chron) => {
            validate_monotone(&chron, check_horizon)?;
            let ground = Ground::Naturals { start: chron.start };
            Ok(Evolution::from_fn(ground, move |k| chron.stage(k)))
        }
    }
}

fn check_coverage(
    appear: &BTreeSet<u64>,
    disappear: &BTreeSet<u64>,
    top: u64,
) -> Result<(), EvolutionError> {
    for k in 0..=top {
        if !appear.contains(&k) {
            return Err(EvolutionError::SurjectivityGap {
                index: k,
                kind: GapKind::Appearance,
            });
        }
        if k >= 1 && k < top && !disappear.contains(&(k + 1)) {
            return Err(EvolutionError::SurjectivityGap {
                index: k,
                kind: GapKind::Disappearance,
            });
        }
    }
    Ok(())
}

fn validate_finite(chron: &Chronology) -> Result<(), EvolutionError> {
    for (x, span) in &chron.entries {
        if !span.feasible() {
            return Err(EvolutionError::ChronologyInfeasible {
                element: x.clone(),
                appear: span.appear,
                disappear: span.disappear,
            });
        }
    }
    let appear: BTreeSet<u64> = chron.entries.values().map(|s| s.appear).collect();
    let disappear: BTreeSet<u64> = chron.entries.values().map(|s| s.disappear).collect();
    match appear.last() {
        Some(&top) => check_coverage(&appear, &disappear, top),
        None => Ok(()),
    }
}

fn validate_monotone(chron: &MonotoneChronology, check_horizon: u64) -> Result<(), EvolutionError> {
    let mut appear = BTreeSet::new();
    let mut disappear = BTreeSet::new();
    let mut x = chron.start;
    loop {
        let span = chron.lifespan(x);
        if span.appear > check_horizon {
            break;
        }
        if !span.feasible() {
            return Err(EvolutionError::ChronologyInfeasible {
                element: ElementId::Num(x),
                appear: span.appear,
                disappear: span.disappear,
            });
        }
        appear.insert(span.appear);
        disappear.insert(span.disappear);
        x += 1;
        if (x - chron.start) as u64 > SCAN_LIMIT {
            return Err(EvolutionError::ScanLimit {
                index: check_horizon,
            });
        }
    }
    // everything with A <= check_horizon was scanned, so D-values up to
    // check_horizon + 1 are complete
    check_coverage(&appear, &disappear, check_horizon + 1).or_else(|err| match err {
        EvolutionError::SurjectivityGap { index, .. } if index > check_horizon => Ok(()),
        other => Err(other),
    })
}

/// Result of reading a chronology off a finite prefix.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedChronology {
    pub chronology: Chronology,
    /// Elements still alive at the horizon or with gaps in their occurrences.
    pub undetermined: Stage,
}

/// `A(x)` = first stage containing `x`, `D(x)` = last stage containing it + 1,
/// for every element whose occurrences in `E_1..E_{horizon-1}` are contiguous
/// and which is absent from `E_horizon`.
pub fn chronology_of(evo: &Evolution, horizon: u64) -> ObservedChronology {
    let occurrences = evo.occurrences(horizon);
    let lookahead = evo.stage(horizon);
    let mut observed = ObservedChronology::default();
    for (x, ks) in occurrences {
        let first = ks[0];
        let last = ks[ks.len() - 1];
        let contiguous = (last - first + 1) as usize == ks.len();
        let closed = last < horizon - 1 || !lookahead.contains(&x);
        if contiguous && closed {
            observed
                .chronology
                .insert(x, Lifespan::new(first, last + 1));
        } else {
            observed.undetermined.insert(x);
        }
    }
    observed
}

/// Lifespans of the elements present at each stage, where known.
pub fn lifespans_by_stage(evo: &Evolution, horizon: u64) -> Vec<Option<u64>> {
    let observed = chronology_of(evo, horizon);
    evo.prefix(horizon)
        .iter()
        .map(|stage| {
            stage.iter().try_fold(0u64, |acc, x| {
                observed
                    .chronology
                    .get(x)
                    .map(|span| acc.max(span.length()))
            })
        })
        .collect()
}
