use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::IntervalError;
use crate::axioms::AxiomReport;
use crate::element::{ElementId, Stage};
use crate::evolution::Evolution;

/// A nonzero finitely supported vector, keyed by basis index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u64, f64>", into = "BTreeMap<u64, f64>")]
pub struct SupportVector {
    coords: BTreeMap<u64, f64>,
}

impl SupportVector {
    /// Zero coefficients are dropped; nothing left means the zero vector.
    pub fn new(coords: BTreeMap<u64, f64>) -> Result<Self, IntervalError> {
        let coords: BTreeMap<u64, f64> = coords.into_iter().filter(|(_, c)| *c != 0.0).collect();
        if coords.is_empty() {
            return Err(IntervalError::ZeroVectorRejected);
        }
        Ok(SupportVector { coords })
    }

    pub fn basis(i: u64) -> Self {
        SupportVector {
            coords: BTreeMap::from([(i, 1.0)]),
        }
    }

    pub fn coords(&self) -> &BTreeMap<u64, f64> {
        &self.coords
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.coords.keys().copied()
    }
}

impl TryFrom<BTreeMap<u64, f64>> for SupportVector {
    type Error = IntervalError;
    fn try_from(coords: BTreeMap<u64, f64>) -> Result<Self, IntervalError> {
        SupportVector::new(coords)
    }
}

impl From<SupportVector> for BTreeMap<u64, f64> {
    fn from(v: SupportVector) -> Self {
        v.coords
    }
}

/// Stage `k` is the span of the basis vectors indexed by `index(k)`, minus the origin.
#[derive(Clone, Debug)]
pub struct SpanEvolution {
    index: Evolution,
}

impl SpanEvolution {
    pub fn new(index: Evolution) -> Self {
        SpanEvolution { index }
    }

    pub fn index(&self) -> &Evolution {
        &self.index
    }

    pub fn contains(&self, v: &SupportVector, k: u64) -> bool {
        let stage = self.index.stage(k);
        v.support()
            .all(|i| i64::try_from(i).is_ok_and(|i| stage.contains(&ElementId::Num(i))))
    }

    /// Stages `k < horizon` containing `v`.
    pub fn occurrences(&self, v: &SupportVector, horizon: u64) -> Vec<u64> {
        (1..horizon).filter(|&k| self.contains(v, k)).collect()
    }

    /// The basis vector of the smallest index in stage `k`.
    pub fn witness(&self, k: u64) -> Option<SupportVector> {
        let stage: Stage = (*self.index.stage(k)).clone();
        stage
            .iter()
            .find_map(|x| x.as_num())
            .and_then(|i| u64::try_from(i).ok())
            .map(SupportVector::basis)
    }

    /// Conditions carry over from the index evolution because the origin is excluded.
    pub fn check_axioms(&self, horizon: u64) -> AxiomReport<Stage> {
        self.index.check_axioms(horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::range_stage;
    use crate::evolution::Ground;
    use alloc::vec;

    fn triple() -> SpanEvolution {
        SpanEvolution::new(Evolution::from_fn(Ground::positive(), |k| {
            range_stage(k as i64, k as i64 + 2)
        }))
    }

    #[test]
    fn support_membership() {
        let v = SupportVector::new(BTreeMap::from([(3, 1.0), (4, -2.5)])).unwrap();
        assert_eq!(triple().occurrences(&v, 20), vec![2, 3]);
        assert_eq!(
            triple().occurrences(&SupportVector::basis(3), 20),
            vec![1, 2, 3]
        );
        assert_eq!(triple().witness(5), Some(SupportVector::basis(5)));
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert_eq!(
            SupportVector::new(BTreeMap::new()),
            Err(IntervalError::ZeroVectorRejected)
        );
        assert_eq!(
            SupportVector::new(BTreeMap::from([(2, 0.0)])),
            Err(IntervalError::ZeroVectorRejected)
        );
        let parsed: Result<SupportVector, _> = serde_json::from_str("{\"1\": 0.0}");
        assert!(parsed.is_err());
    }

    #[test]
    fn verdicts_follow_the_index() {
        assert!(triple().check_axioms(20).passes_decidable());
    }
}
