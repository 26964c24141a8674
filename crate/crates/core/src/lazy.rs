//! Memoized, prefix-queryable stage sequences.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use spin::RwLock;

type Generator<S> = Box<dyn Fn(u64) -> S + Send + Sync>;

/// A sequence `k -> S` for `k >= 1`, materialized on demand.
///
/// The cache always holds a contiguous prefix `stage(1..=n)`. Growing it takes
/// the write lock, so exactly one caller extends the prefix while readers see
/// either the old or the new prefix, never a partial one.
pub struct LazyStages<S> {
    generator: Generator<S>,
    memo: RwLock<Vec<Arc<S>>>,
}

impl<S> LazyStages<S> {
    pub fn new(generator: impl Fn(u64) -> S + Send + Sync + 'static) -> Self {
        LazyStages {
            generator: Box::new(generator),
            memo: RwLock::new(Vec::new()),
        }
    }

    /// Stage `k` (1-based). `k = 0` is treated as `k = 1`.
    pub fn get(&self, k: u64) -> Arc<S> {
        let idx = k.max(1) as usize - 1;
        if let Some(stage) = self.memo.read().get(idx) {
            return Arc::clone(stage);
        }
        let mut memo = self.memo.write();
        while memo.len() <= idx {
            let next = (self.generator)(memo.len() as u64 + 1);
            memo.push(Arc::new(next));
        }
        Arc::clone(&memo[idx])
    }

    /// Stages `1..horizon` (exclusive of `horizon`).
    pub fn prefix(&self, horizon: u64) -> Vec<Arc<S>> {
        if horizon <= 1 {
            return Vec::new();
        }
        self.get(horizon - 1);
        let memo = self.memo.read();
        memo[..(horizon - 1) as usize].to_vec()
    }

    /// Number of stages currently cached.
    pub fn materialized(&self) -> usize {
        self.memo.read().len()
    }
}
