//! Bounded search for subsequences of stages that are themselves evolutions.
//!
//! A candidate is a strictly increasing index list `k_1 < k_2 < ...` drawn
//! from `1..horizon`, of length at least 3, that skips at least one index
//! between two of its members. (Dropping only leading stages always yields
//! another evolution, so contiguous runs say nothing.) Each candidate is
//! checked against the union of its own stages as ground.
//!
//! Arithmetic subsequences with stride `2 <= s <= horizon / 3` are tried
//! first; when `horizon <= 12` every other index subset follows. The search
//! never concludes irreducibility.

use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::axioms::{check_prefix, Coverage};
use crate::element::Stage;
use crate::evolution::Evolution;

/// Largest horizon for which every index subset is tried.
pub const EXHAUSTIVE_HORIZON: u64 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Reduction {
    Reducible {
        indices: Vec<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        stride: Option<u64>,
    },
    NotFoundWithinBounds {
        candidates: usize,
    },
}

impl Reduction {
    pub fn is_reducible(&self) -> bool {
        matches!(self, Reduction::Reducible { .. })
    }
}

fn passes(stages: &[Arc<Stage>], indices: &[u64]) -> bool {
    let picked: Vec<Arc<Stage>> = indices
        .iter()
        .map(|&k| Arc::clone(&stages[k as usize - 1]))
        .collect();
    let ground: Stage = picked.iter().flat_map(|s| s.iter().cloned()).collect();
    !check_prefix(&picked, None, Coverage::Complete(ground)).has_failure()
}

fn has_gap(indices: &[u64]) -> bool {
    indices.windows(2).any(|w| w[1] > w[0] + 1)
}

pub fn find_reducing_subsequence(evo: &Evolution, horizon: u64) -> Reduction {
    let stages = evo.prefix(horizon);
    let last = horizon.saturating_sub(1);
    let mut candidates = 0usize;

    for stride in 2..=horizon / 3 {
        for start in 1..=stride {
            let indices: Vec<u64> = (start..=last).step_by(stride as usize).collect();
            if indices.len() < 3 {
                continue;
            }
            candidates += 1;
            if passes(&stages, &indices) {
                return Reduction::Reducible {
                    indices,
                    stride: Some(stride),
                };
            }
        }
    }

    if horizon <= EXHAUSTIVE_HORIZON {
        for mask in 1u32..(1u32 << last) {
            if mask.count_ones() < 3 {
                continue;
            }
            let indices: Vec<u64> = (0..last)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| i + 1)
                .collect();
            if !has_gap(&indices) {
                continue;
            }
            candidates += 1;
            if passes(&stages, &indices) {
                return Reduction::Reducible {
                    indices,
                    stride: None,
                };
            }
        }
    }

    Reduction::NotFoundWithinBounds { candidates }
}
