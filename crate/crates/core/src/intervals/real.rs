use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{IntervalError, IntervalSet};
use crate::axioms::{check_prefix, AxiomReport, Coverage};
use crate::evolution::{Evolution, Ground};
use crate::lazy::LazyStages;

struct Inner {
    ground: IntervalSet,
    stages: LazyStages<IntervalSet>,
}

/// A memoized sequence of interval stages `F_1, F_2, ...` inside a ground set of reals.
#[derive(Clone)]
pub struct RealEvolution {
    inner: Arc<Inner>,
}

impl fmt::Debug for RealEvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealEvolution")
            .field("ground", &self.inner.ground)
            .field("materialized", &self.inner.stages.materialized())
            .finish()
    }
}

impl RealEvolution {
    /// Stages are clipped to the ground.
    pub fn from_fn(
        ground: IntervalSet,
        generator: impl Fn(u64) -> IntervalSet + Send + Sync + 'static,
    ) -> Self {
        let clip = ground.clone();
        let stages = LazyStages::new(move |k| generator(k).intersection(&clip));
        RealEvolution {
            inner: Arc::new(Inner { ground, stages }),
        }
    }

    /// Listed stages; every later stage is empty.
    pub fn explicit(ground: IntervalSet, stages: Vec<IntervalSet>) -> Self {
        RealEvolution::from_fn(ground, move |k| {
            stages.get(k as usize - 1).cloned().unwrap_or_default()
        })
    }

    pub fn ground(&self) -> &IntervalSet {
        &self.inner.ground
    }

    pub fn stage(&self, k: u64) -> Arc<IntervalSet> {
        self.inner.stages.get(k)
    }

    pub fn prefix(&self, horizon: u64) -> Vec<Arc<IntervalSet>> {
        self.inner.stages.prefix(horizon)
    }

    /// A ground of finite length is known in full; an unbounded one is not.
    pub fn check_axioms(&self, horizon: u64) -> AxiomReport<IntervalSet> {
        let ground = self.ground();
        let coverage = if ground.measure().is_finite() {
            Coverage::Complete(ground.clone())
        } else {
            Coverage::Sampled(IntervalSet::empty())
        };
        let lookahead = self.stage(horizon);
        check_prefix(&self.prefix(horizon), Some(&lookahead), coverage)
    }

    /// Stages `k < horizon` containing `t`.
    pub fn occurrences_of(&self, t: f64, horizon: u64) -> Vec<u64> {
        (1..horizon)
            .filter(|&k| self.stage(k).contains(t))
            .collect()
    }
}

/// `F_k = [(k-1)s, (k-1)s + w)` on `[0, ∞)`.
pub fn sliding_window_evolution(width: f64, step: f64) -> Result<RealEvolution, IntervalError> {
    if !(0.0 < step && step < width && width.is_finite()) {
        return Err(IntervalError::BadWindow { width, step });
    }
    Ok(RealEvolution::from_fn(IntervalSet::half_line(), move |k| {
        let lo = (k - 1) as f64 * step;
        IntervalSet::interval(lo, lo + width)
    }))
}

fn shell(n: i64) -> [f64; 2] {
    let lo = n as f64;
    [lo, (lo + 1.0).next_up()]
}

/// `F_k = ⋃_{n ∈ index(k)} [n, n+1]`.
///
/// The closed shell `[n, n+1]` is stored as `[n, next_up(n+1))`, which holds
/// exactly the same doubles. Non-numeric and negative indices are ignored.
pub fn shell_evolution(index: Evolution) -> RealEvolution {
    let ground = match index.ground() {
        Ground::Finite(set) => IntervalSet::from_parts(
            set.iter()
                .filter_map(|x| x.as_num())
                .filter(|&n| n >= 0)
                .map(shell),
        ),
        Ground::Naturals { start } => IntervalSet::interval((*start).max(0) as f64, f64::INFINITY),
    };
    RealEvolution::from_fn(ground, move |k| {
        IntervalSet::from_parts(
            index
                .stage(k)
                .iter()
                .filter_map(|x| x.as_num())
                .filter(|&n| n >= 0)
                .map(shell),
        )
    })
}
