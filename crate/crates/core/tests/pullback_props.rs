use std::sync::Arc;

use evoset_core::chronology::{
    chronology_of, from_chronology, Chronology, ChronologySource, Lifespan,
};
use evoset_core::element::{ElementId, Stage};
use evoset_core::evolution::Evolution;
use evoset_core::maps::{pullback, FiniteMap};
use proptest::prelude::*;

/// Random stages over a small ground, not necessarily an evolution.
fn raw_stages() -> impl Strategy<Value = Evolution> {
    prop::collection::vec(prop::collection::btree_set(0i64..12, 1..6), 2..10).prop_map(|stages| {
        Evolution::explicit_over_union(
            stages
                .into_iter()
                .map(|s| s.into_iter().map(ElementId::Num).collect())
                .collect(),
        )
    })
}

fn chronology_evolution() -> impl Strategy<Value = (u64, Evolution)> {
    (2u64..20).prop_flat_map(|n| {
        prop::collection::vec((0..=n, 0u64..4), 0..8).prop_map(move |extras| {
            let mut chron = Chronology::default();
            for a in 0..=n {
                chron.insert(ElementId::Num(a as i64), Lifespan::new(a, a + 2));
            }
            for (i, (a, extra)) in extras.into_iter().enumerate() {
                chron.insert(
                    ElementId::Num((n + 1 + i as u64) as i64),
                    Lifespan::new(a, a + 2 + extra),
                );
            }
            (
                n + 1,
                from_chronology(ChronologySource::Finite(chron), 0).unwrap(),
            )
        })
    })
}

/// A surjection from `{0, ..., |E| + extra - 1}` (offset by 1000) onto the ground of `evo`.
fn surjection(evo: &Evolution, picks: &[usize]) -> FiniteMap {
    let targets: Vec<ElementId> = match evo.ground() {
        evoset_core::evolution::Ground::Finite(set) => set.iter().cloned().collect(),
        _ => unreachable!(),
    };
    let mut pairs: Vec<(ElementId, ElementId)> = targets
        .iter()
        .enumerate()
        .map(|(i, e)| (ElementId::Num(1000 + i as i64), e.clone()))
        .collect();
    for (j, p) in picks.iter().enumerate() {
        pairs.push((
            ElementId::Num(5000 + j as i64),
            targets[p % targets.len()].clone(),
        ));
    }
    FiniteMap::new(pairs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pullback_keeps_verdicts(base in raw_stages(), picks in prop::collection::vec(0usize..100, 0..20)) {
        let map = surjection(&base, &picks);
        let pulled = pullback(Arc::new(map), &base).unwrap();
        let horizon = 12;
        let (a, b) = (base.check_axioms(horizon), pulled.check_axioms(horizon));
        prop_assert_eq!(&a.verdicts[..3], &b.verdicts[..3]);
    }

    #[test]
    fn pullback_composes_chronologies((horizon, base) in chronology_evolution(), picks in prop::collection::vec(0usize..100, 0..30)) {
        let map = surjection(&base, &picks);
        let pulled = pullback(Arc::new(map.clone()), &base).unwrap();
        prop_assert!(pulled.check_axioms(horizon).passes_decidable());
        let before = chronology_of(&base, horizon);
        let after = chronology_of(&pulled, horizon);
        for (x, e) in map.pairs() {
            prop_assert_eq!(after.chronology.get(x), before.chronology.get(e));
        }
        let undetermined: Stage = after.undetermined.iter().map(|x| map.pairs().find(|(y, _)| *y == x).unwrap().1.clone()).collect();
        prop_assert_eq!(undetermined, before.undetermined);
    }
}
