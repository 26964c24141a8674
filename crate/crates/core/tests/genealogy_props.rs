use std::collections::BTreeMap;

use evoset_core::axioms::Verdict;
use evoset_core::element::{ElementId, Stage};
use evoset_core::genealogy::{ancestry_check, generational_evolution, GenealogyModel};
use proptest::prelude::*;

/// Random acyclic population: sexes, a random matching of some males to females, random mothers.
fn model() -> impl Strategy<Value = GenealogyModel> {
    (4usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<u16>(), n),
            prop::collection::vec(prop::option::weighted(0.8, any::<u16>()), n),
        )
            .prop_map(move |(sexes, partners, mothers)| {
                let id = |i: usize| ElementId::Num(i as i64);
                let males: Vec<usize> = (0..n).filter(|i| sexes[*i]).collect();
                let females: Vec<usize> = (0..n).filter(|i| !sexes[*i]).collect();
                // elements come in levels of five: spouses share a level, mothers sit strictly below
                let level = |i: usize| i / 5;
                let mut free = females.clone();
                let mut marriage = BTreeMap::new();
                for m in &males {
                    let same: Vec<usize> = (0..free.len())
                        .filter(|j| level(free[*j]) == level(*m))
                        .collect();
                    if !same.is_empty() && partners[*m] % 4 != 0 {
                        let f = free.remove(same[partners[*m] as usize % same.len()]);
                        marriage.insert(id(*m), id(f));
                    }
                }
                let mut reproduction = BTreeMap::new();
                for (child, mother) in mothers.iter().enumerate() {
                    let below: Vec<usize> = females
                        .iter()
                        .copied()
                        .filter(|f| level(*f) < level(child))
                        .collect();
                    if let (Some(r), false) = (mother, below.is_empty()) {
                        reproduction.insert(id(child), id(below[*r as usize % below.len()]));
                    }
                }
                GenealogyModel::new(
                    (0..n).map(id).collect(),
                    males.into_iter().map(id).collect(),
                    females.into_iter().map(id).collect(),
                    marriage,
                    reproduction,
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn distinct_couples_have_disjoint_children(model in model()) {
        let mut seen = Stage::new();
        for couple in model.couples() {
            for child in model.children_of(&couple) {
                prop_assert!(seen.insert(child));
            }
        }
    }

    #[test]
    fn generations_behave(model in model()) {
        let (males, females) = model.founders();
        prop_assume!(!males.is_empty() && !females.is_empty());
        let (trace, evo) = generational_evolution(&model, &males, &females, 50).unwrap();

        // children never land in an earlier generation
        let mut placed = Stage::new();
        for (k, generation) in trace.generations.iter().enumerate() {
            placed.extend(generation.members());
            for family in trace.families.iter().filter(|f| f.generation == k as u64 + 1) {
                prop_assert!(family.children.is_subset(&trace.generations.get(k + 1).map(|g| g.offspring.clone()).unwrap_or_default()));
            }
        }
        prop_assert_eq!(trace.placement_verdict(), Verdict::Pass);

        // once a stage is empty, the rest are
        if let Some(first_empty) = trace.stages.iter().position(|s| s.is_empty()) {
            prop_assert!(trace.stages[first_empty..].iter().all(|s| s.is_empty()));
        }

        // conditions 1-3 hold over the prefix where two generations ahead is still nonempty
        let alive = trace.generations.iter().take_while(|g| !g.members().is_empty()).count() as u64;
        if alive >= 2 {
            let report = evo.check_axioms(alive);
            prop_assert_eq!(&report.verdicts[..3], &[Verdict::Pass; 3]);
        }

        let ancestry = ancestry_check(&trace);
        prop_assert!(ancestry.passes(), "{:?}\n{:?}", ancestry, trace);
    }
}
