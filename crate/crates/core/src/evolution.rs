//! Stage sequences over enumerable ground sets.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::axioms::{check_prefix, AxiomReport, Coverage};
use crate::element::{range_stage, ElementId, Stage};
use crate::lazy::LazyStages;

/// Descriptor of the ground set an evolution lives on.
#[derive(Clone, Debug, PartialEq)]
pub enum Ground {
    Finite(Stage),
    /// `{start, start + 1, ...}`.
    Naturals {
        start: i64,
    },
}

impl Ground {
    pub fn naturals() -> Self {
        Ground::Naturals { start: 0 }
    }

    pub fn positive() -> Self {
        Ground::Naturals { start: 1 }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ground::Finite(_))
    }

    pub fn contains(&self, x: &ElementId) -> bool {
        match self {
            Ground::Finite(set) => set.contains(x),
            Ground::Naturals { start } => x.as_num().is_some_and(|n| n >= *start),
        }
    }

    /// All elements of a finite ground, or the first `n` of an infinite one.
    pub fn sample(&self, n: u64) -> Stage {
        match self {
            Ground::Finite(set) => set.clone(),
            Ground::Naturals { start } => range_stage(*start, start + n as i64 - 1),
        }
    }

    pub fn coverage(&self, horizon: u64) -> Coverage<Stage> {
        match self {
            Ground::Finite(set) => Coverage::Complete(set.clone()),
            Ground::Naturals { .. } => Coverage::Sampled(self.sample(horizon)),
        }
    }
}

struct Inner {
    ground: Ground,
    stages: LazyStages<Stage>,
}

/// A deterministic, memoized sequence of stages `E_1, E_2, ...` over a ground set.
///
/// Cloning is cheap and clones share the memo.
#[derive(Clone)]
pub struct Evolution {
    inner: Arc<Inner>,
}

impl fmt::Debug for Evolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evolution")
            .field("ground", &self.inner.ground)
            .field("materialized", &self.inner.stages.materialized())
            .finish()
    }
}

impl Evolution {
    /// Wraps a generator. Stage elements outside the ground are dropped.
    pub fn from_fn(
        ground: Ground,
        generator: impl Fn(u64) -> Stage + Send + Sync + 'static,
    ) -> Self {
        let filter = ground.clone();
        let stages = LazyStages::new(move |k| {
            let mut stage = generator(k);
            stage.retain(|x| filter.contains(x));
            stage
        });
        Evolution {
            inner: Arc::new(Inner { ground, stages }),
        }
    }

    /// Listed stages `E_1..E_n`; every later stage is empty.
    pub fn explicit(ground: Ground, stages: Vec<Stage>) -> Self {
        Evolution::from_fn(ground, move |k| {
            stages.get(k as usize - 1).cloned().unwrap_or_default()
        })
    }

    /// Explicit stages over the ground formed by their union.
    pub fn explicit_over_union(stages: Vec<Stage>) -> Self {
        let ground = Ground::Finite(stages.iter().flatten().cloned().collect());
        Evolution::explicit(ground, stages)
    }

    /// `E_n = {n, ..., (n+1)^2}` on the positive integers.
    pub fn example_square() -> Self {
        Evolution::from_fn(Ground::positive(), |n| {
            let n = n as i64;
            range_stage(n, (n + 1) * (n + 1))
        })
    }

    pub fn ground(&self) -> &Ground {
        &self.inner.ground
    }

    pub fn stage(&self, k: u64) -> Arc<Stage> {
        self.inner.stages.get(k)
    }

    /// Stages `1..horizon`.
    pub fn prefix(&self, horizon: u64) -> Vec<Arc<Stage>> {
        self.inner.stages.prefix(horizon)
    }

    pub fn check_axioms(&self, horizon: u64) -> AxiomReport<Stage> {
        let lookahead = self.stage(horizon);
        check_prefix(
            &self.prefix(horizon),
            Some(&lookahead),
            self.ground().coverage(horizon),
        )
    }

    /// Stage indices `k < horizon` at which each observed element is present.
    pub fn occurrences(&self, horizon: u64) -> BTreeMap<ElementId, Vec<u64>> {
        let mut occ: BTreeMap<ElementId, Vec<u64>> = BTreeMap::new();
        for (i, stage) in self.prefix(horizon).iter().enumerate() {
            for x in stage.iter() {
                occ.entry(x.clone()).or_default().push(i as u64 + 1);
            }
        }
        occ
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::Verdict;
    use crate::element::stage_of;

    fn pair_evolution() -> Evolution {
        Evolution::from_fn(Ground::naturals(), |k| {
            let k = k as i64;
            stage_of([k - 1, k])
        })
    }

    #[test]
    fn example_square_first_stages() {
        let evo = Evolution::example_square();
        assert_eq!(*evo.stage(1), stage_of([1i64, 2, 3, 4]));
        assert_eq!(*evo.stage(2), range_stage(2, 9));
    }

    #[test]
    fn example_square_axioms_at_64() {
        let report = Evolution::example_square().check_axioms(64);
        assert_eq!(&report.verdicts[..3], &[Verdict::Pass; 3]);
        assert!(report.passes_decidable());
        // x lives in E_A..E_x, so D(x) = x + 1; D <= 64 closes, the rest stay open
        assert_eq!(report.closed, range_stage(1, 63));
        assert_eq!(report.open, range_stage(64, 64 * 64));
    }

    #[test]
    fn stages_are_deterministic_and_grounded() {
        let evo = Evolution::from_fn(Ground::Finite(stage_of([1i64, 2])), |k| {
            stage_of([k as i64, 5])
        });
        assert_eq!(*evo.stage(1), stage_of([1i64]));
        assert_eq!(evo.stage(2), evo.stage(2));
        assert!(evo.stage(3).is_empty());
    }

    #[test]
    fn pair_evolution_passes_decidable_parts() {
        for h in [3u64, 4, 10, 40] {
            let report = pair_evolution().check_axioms(h);
            assert!(report.passes_decidable(), "horizon {h}");
            assert_eq!(report.verdict(4), Verdict::Unknown);
        }
    }

    #[test]
    fn explicit_stages_end_empty() {
        let evo =
            Evolution::explicit_over_union(alloc::vec![stage_of([1i64, 2]), stage_of([2i64, 3])]);
        assert!(evo.stage(3).is_empty());
        assert_eq!(evo.ground(), &Ground::Finite(stage_of([1i64, 2, 3])));
    }
}
