//! Keeping every stage at positive measure by attaching a fresh atom to each stage.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{DiscreteMeasure, MeasureError};
use crate::element::{ElementId, Stage};
use crate::evolution::{Evolution, Ground};
use crate::maps::{FnMap, GroundMap};

/// Atoms `G_k = {first + stride (k - 1)}` on the naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArithmeticAtoms {
    pub first: i64,
    pub stride: i64,
}

impl ArithmeticAtoms {
    pub fn atom(&self, k: u64) -> Stage {
        core::iter::once(ElementId::Num(self.first + self.stride * (k as i64 - 1))).collect()
    }

    fn is_atom(&self, x: i64) -> bool {
        x >= self.first && (x - self.first) % self.stride == 0
    }

    /// The order-preserving bijection from the non-atoms onto the naturals.
    pub fn complement_map(&self) -> Result<FnMap, MeasureError> {
        if self.stride < 2 || self.first < 0 {
            return Err(MeasureError::BadParameter(alloc::format!(
                "arithmetic atoms need stride >= 2 and first >= 0, got stride {}, first {}",
                self.stride,
                self.first
            )));
        }
        let atoms = *self;
        let forward = move |x: &ElementId| {
            let n = x.as_num().filter(|&n| n >= 0 && !atoms.is_atom(n))?;
            if n < atoms.first {
                return Some(ElementId::Num(n));
            }
            let before = (n - atoms.first) / atoms.stride + 1;
            Some(ElementId::Num(n - before))
        };
        let backward = move |e: &ElementId| -> Stage {
            let Some(n) = e.as_num().filter(|&n| n >= 0) else {
                return Stage::new();
            };
            let x = if n < atoms.first {
                n
            } else {
                let m = n - atoms.first;
                let gap = atoms.stride - 1;
                atoms.first + (m / gap) * atoms.stride + 1 + m % gap
            };
            core::iter::once(ElementId::Num(x)).collect()
        };
        // domain is checked through `forward`, which rejects atoms
        Ok(FnMap::new(Ground::naturals(), forward, backward))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomFamily {
    /// `G_1, G_2, ...` listed; stages past the list get no atom.
    Listed(Vec<Stage>),
    Arithmetic(ArithmeticAtoms),
}

impl AtomFamily {
    pub fn atom(&self, k: u64) -> Stage {
        match self {
            AtomFamily::Listed(atoms) => atoms.get(k as usize - 1).cloned().unwrap_or_default(),
            AtomFamily::Arithmetic(a) => a.atom(k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AugmentedEvolution {
    pub evolution: Evolution,
    /// `w(G_k)` for `k < horizon`.
    pub atom_weights: Vec<f64>,
}

/// `stage(k) = f⁻¹(base(k)) ⊎ G_k`, validated for `k < horizon`.
///
/// `map` is `f` from the non-atoms onto the base ground; each base element
/// must have exactly one preimage, and it must not be an atom.
pub fn atom_augmented_evolution(
    ground: Ground,
    base: &Evolution,
    atoms: AtomFamily,
    map: Arc<dyn GroundMap>,
    mu: &DiscreteMeasure,
    horizon: u64,
) -> Result<AugmentedEvolution, MeasureError> {
    let mut owner: BTreeMap<ElementId, u64> = BTreeMap::new();
    let mut atom_weights = Vec::new();
    for k in 1..horizon {
        let atom = atoms.atom(k);
        for x in &atom {
            if let Some(first) = owner.insert(x.clone(), k) {
                return Err(MeasureError::AtomsOverlap {
                    first,
                    second: k,
                    element: x.clone(),
                });
            }
        }
        let weight = mu.measure(&atom)?;
        if !(weight > 0.0) {
            return Err(MeasureError::ZeroWeightAtom { stage: k });
        }
        atom_weights.push(weight);
    }

    let pull = {
        let map = Arc::clone(&map);
        move |e: &ElementId| -> Result<ElementId, MeasureError> {
            let pre = map.preimage(e);
            let mut it = pre.into_iter();
            match (it.next(), it.next()) {
                (Some(x), None) => Ok(x),
                _ => Err(MeasureError::NotInvertible(e.clone())),
            }
        }
    };
    let mut atom_members = Stage::new();
    for k in 1..=horizon {
        atom_members.extend(atoms.atom(k));
    }
    for stage in base.prefix(horizon + 1) {
        for e in stage.iter() {
            let x = pull(e)?;
            if atom_members.contains(&x) || map.apply(&x).as_ref() != Some(e) {
                return Err(MeasureError::NotInvertible(e.clone()));
            }
        }
    }

    let base = base.clone();
    let evolution = Evolution::from_fn(ground, move |k| {
        let mut stage: Stage = base.stage(k).iter().filter_map(|e| pull(e).ok()).collect();
        stage.extend(atoms.atom(k));
        stage
    });
    Ok(AugmentedEvolution {
        evolution,
        atom_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::stage_of;
    use crate::maps::FiniteMap;

    fn pair() -> Evolution {
        Evolution::from_fn(Ground::naturals(), |k| stage_of([k as i64 - 1, k as i64]))
    }

    fn half() -> DiscreteMeasure {
        DiscreteMeasure::geometric(0.5).unwrap()
    }

    #[test]
    fn complement_map_skips_atoms() {
        let atoms = ArithmeticAtoms {
            first: 2,
            stride: 3,
        };
        let f = atoms.complement_map().unwrap();
        let non_atoms: Vec<i64> = (0..10)
            .map(|n| {
                f.preimage(&ElementId::Num(n))
                    .first()
                    .unwrap()
                    .as_num()
                    .unwrap()
            })
            .collect();
        assert_eq!(non_atoms, [0, 1, 3, 4, 6, 7, 9, 10, 12, 13]);
        for (n, x) in non_atoms.iter().enumerate() {
            assert_eq!(f.apply(&ElementId::Num(*x)), Some(ElementId::Num(n as i64)));
        }
        assert_eq!(f.apply(&ElementId::Num(5)), None);
    }

    #[test]
    fn every_stage_keeps_its_atom() {
        let atoms = ArithmeticAtoms {
            first: 2,
            stride: 3,
        };
        let f = Arc::new(atoms.complement_map().unwrap());
        let aug = atom_augmented_evolution(
            Ground::naturals(),
            &pair(),
            AtomFamily::Arithmetic(atoms),
            f,
            &half(),
            64,
        )
        .unwrap();
        assert_eq!(*aug.evolution.stage(1), stage_of([0i64, 1, 2]));
        assert_eq!(*aug.evolution.stage(2), stage_of([1i64, 3, 5]));
        for k in 1..64u64 {
            let m = half().measure(&aug.evolution.stage(k)).unwrap();
            assert!(m >= aug.atom_weights[k as usize - 1] && m > 0.0);
        }
        assert!(aug.evolution.check_axioms(64).passes_decidable());
    }

    #[test]
    fn overlapping_atoms_are_rejected() {
        let atoms = AtomFamily::Listed(alloc::vec![stage_of([10i64]), stage_of([10i64, 11])]);
        let err = atom_augmented_evolution(
            Ground::naturals(),
            &pair(),
            atoms,
            Arc::new(FnMap::identity(Ground::naturals())),
            &half(),
            3,
        );
        assert_eq!(
            err.unwrap_err(),
            MeasureError::AtomsOverlap {
                first: 1,
                second: 2,
                element: ElementId::Num(10)
            }
        );
    }

    #[test]
    fn zero_weight_atoms_are_rejected() {
        let weights = BTreeMap::from([(ElementId::Num(0), 1.0), (ElementId::Num(1), 0.0)]);
        let mu = DiscreteMeasure::table(weights).unwrap();
        let atoms = AtomFamily::Listed(alloc::vec![stage_of([1i64])]);
        let err = atom_augmented_evolution(
            Ground::naturals(),
            &pair(),
            atoms,
            Arc::new(FnMap::identity(Ground::naturals())),
            &mu,
            2,
        );
        assert_eq!(err.unwrap_err(), MeasureError::ZeroWeightAtom { stage: 1 });
    }

    #[test]
    fn non_injective_maps_are_rejected() {
        let squash = FiniteMap::new([
            (ElementId::Num(0), ElementId::Num(0)),
            (ElementId::Num(1), ElementId::Num(0)),
            (ElementId::Num(2), ElementId::Num(1)),
        ]);
        let base = Evolution::explicit_over_union(alloc::vec![stage_of([0i64, 1])]);
        let atoms = AtomFamily::Listed(alloc::vec![stage_of([5i64])]);
        let err = atom_augmented_evolution(
            Ground::naturals(),
            &base,
            atoms,
            Arc::new(squash),
            &half(),
            2,
        );
        assert_eq!(
            err.unwrap_err(),
            MeasureError::NotInvertible(ElementId::Num(0))
        );
    }
}
