//! Maps between ground sets: pullbacks and isoevolution.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::axioms::Verdict;
use crate::element::{ElementId, Stage};
use crate::error::{BijectionDefect, EvolutionError};
use crate::evolution::{Evolution, Ground};

/// A map `f: F -> E` that can also enumerate preimages.
pub trait GroundMap: Send + Sync {
    /// The source ground `F`.
    fn domain(&self) -> Ground;
    fn apply(&self, x: &ElementId) -> Option<ElementId>;
    fn preimage(&self, e: &ElementId) -> Stage;
}

/// A map given by its graph.
#[derive(Clone, Debug, Default)]
pub struct FiniteMap {
    forward: BTreeMap<ElementId, ElementId>,
    inverse: BTreeMap<ElementId, Stage>,
}

impl FiniteMap {
    pub fn new(pairs: impl IntoIterator<Item = (ElementId, ElementId)>) -> Self {
        let forward: BTreeMap<_, _> = pairs.into_iter().collect();
        let mut inverse: BTreeMap<ElementId, Stage> = BTreeMap::new();
        for (x, y) in &forward {
            inverse.entry(y.clone()).or_default().insert(x.clone());
        }
        FiniteMap { forward, inverse }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&ElementId, &ElementId)> {
        self.forward.iter()
    }
}

impl GroundMap for FiniteMap {
    fn domain(&self) -> Ground {
        Ground::Finite(self.forward.keys().cloned().collect())
    }
    fn apply(&self, x: &ElementId) -> Option<ElementId> {
        self.forward.get(x).cloned()
    }
    fn preimage(&self, e: &ElementId) -> Stage {
        self.inverse.get(e).cloned().unwrap_or_default()
    }
}

type ApplyFn = Arc<dyn Fn(&ElementId) -> Option<ElementId> + Send + Sync>;
type PreimageFn = Arc<dyn Fn(&ElementId) -> Stage + Send + Sync>;

/// A map on a possibly infinite ground, given by formulas for both directions.
#[derive(Clone)]
pub struct FnMap {
    domain: Ground,
    forward: ApplyFn,
    backward: PreimageFn,
}

impl FnMap {
    pub fn new(
        domain: Ground,
        forward: impl Fn(&ElementId) -> Option<ElementId> + Send + Sync + 'static,
        backward: impl Fn(&ElementId) -> Stage + Send + Sync + 'static,
    ) -> Self {
        FnMap {
            domain,
            forward: Arc::new(forward),
            backward: Arc::new(backward),
        }
    }

    pub fn identity(ground: Ground) -> Self {
        FnMap::new(
            ground,
            |x| Some(x.clone()),
            |e| core::iter::once(e.clone()).collect(),
        )
    }
}

impl GroundMap for FnMap {
    fn domain(&self) -> Ground {
        self.domain.clone()
    }
    fn apply(&self, x: &ElementId) -> Option<ElementId> {
        if self.domain.contains(x) {
            (self.forward)(x)
        } else {
            None
        }
    }
    fn preimage(&self, e: &ElementId) -> Stage {
        let mut pre = (self.backward)(e);
        pre.retain(|x| self.domain.contains(x));
        pre
    }
}

/// `f^{-1}(E_k)` for each stage.
///
/// When both grounds are finite, `f` must be total into the base ground and
/// every base element needs a preimage.
pub fn pullback(map: Arc<dyn GroundMap>, evo: &Evolution) -> Result<Evolution, EvolutionError> {
    let domain = map.domain();
    if let Ground::Finite(base) = evo.ground() {
        if let Some(e) = base.iter().find(|e| map.preimage(e).is_empty()) {
            return Err(EvolutionError::SurjectivityViolated(e.clone()));
        }
        if let Ground::Finite(source) = &domain {
            if let Some(x) = source
                .iter()
                .find(|x| map.apply(x).is_none_or(|y| !base.contains(&y)))
            {
                return Err(EvolutionError::MapUndefined(x.clone()));
            }
        }
    }
    let base = evo.clone();
    Ok(Evolution::from_fn(domain, move |k| {
        base.stage(k).iter().flat_map(|e| map.preimage(e)).collect()
    }))
}

/// Outcome of an isoevolution check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoReport {
    pub verdict: Verdict,
    /// First stage where `f(E_k) != F_k`, with the symmetric difference.
    pub mismatch: Option<(u64, Stage)>,
}

fn bijection_defect(
    map: &dyn GroundMap,
    sources: &Stage,
    targets: &Stage,
) -> Option<BijectionDefect> {
    let mut images: BTreeMap<ElementId, ElementId> = BTreeMap::new();
    for x in sources {
        let Some(y) = map.apply(x) else {
            return Some(BijectionDefect::Gap { element: x.clone() });
        };
        if let Some(first) = images.insert(y.clone(), x.clone()) {
            return Some(BijectionDefect::Collision {
                first,
                second: x.clone(),
                image: y,
            });
        }
    }
    for y in targets {
        let pre: Vec<_> = map.preimage(y).into_iter().collect();
        match pre.as_slice() {
            [] => return Some(BijectionDefect::Gap { element: y.clone() }),
            [_] => {}
            [a, b, ..] => {
                return Some(BijectionDefect::Collision {
                    first: a.clone(),
                    second: b.clone(),
                    image: y.clone(),
                })
            }
        }
    }
    None
}

/// Checks `F_k = f(E_k)` for all `k < horizon`.
///
/// With finite grounds the bijection is verified on the whole ground;
/// otherwise on every element seen in either prefix.
pub fn is_isoevolved(
    source: &Evolution,
    target: &Evolution,
    bij: &dyn GroundMap,
    horizon: u64,
) -> Result<IsoReport, EvolutionError> {
    let source_stages = source.prefix(horizon);
    let target_stages = target.prefix(horizon);
    let (sources, targets) = match (source.ground(), target.ground()) {
        (Ground::Finite(a), Ground::Finite(b)) => (a.clone(), b.clone()),
        _ => (
            source_stages
                .iter()
                .flat_map(|s| s.iter().cloned())
                .collect(),
            target_stages
                .iter()
                .flat_map(|s| s.iter().cloned())
                .collect(),
        ),
    };
    if let Some(defect) = bijection_defect(bij, &sources, &targets) {
        return Err(EvolutionError::NotABijection(defect));
    }
    for (i, (e, f)) in source_stages.iter().zip(&target_stages).enumerate() {
        let image: Stage = e.iter().filter_map(|x| bij.apply(x)).collect();
        if image != **f {
            let diff = image.symmetric_difference(f).cloned().collect();
            return Ok(IsoReport {
                verdict: Verdict::Fail,
                mismatch: Some((i as u64 + 1, diff)),
            });
        }
    }
    Ok(IsoReport {
        verdict: Verdict::Pass,
        mismatch: None,
    })
}
