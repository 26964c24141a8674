use std::collections::BTreeMap;

use evoset_core::axioms::Verdict;
use evoset_core::chronology::{from_chronology, Chronology, ChronologySource, Lifespan};
use evoset_core::element::ElementId;
use evoset_core::evolution::Evolution;
use evoset_core::measure::{
    decay_check, disjoint_tail_violation, mu_trace, stage_integral, DiscreteMeasure, Integrand,
    StageIntegrand,
};
use proptest::prelude::*;

/// A finite chronology with ids numbered in order of appearance; returns the last disappearance index.
fn evolution() -> impl Strategy<Value = (u64, Evolution)> {
    (12u64..60).prop_flat_map(|n| {
        prop::collection::vec((0..=n, 0u64..4), 0..20).prop_map(move |extras| {
            let mut spans: Vec<Lifespan> = (0..=n).map(|a| Lifespan::new(a, a + 2)).collect();
            spans.extend(extras.into_iter().map(|(a, j)| Lifespan::new(a, a + 2 + j)));
            spans.sort_by_key(|s| (s.appear, s.disappear));
            let last = spans.iter().map(|s| s.disappear).max().unwrap();
            let chron: Chronology = spans
                .into_iter()
                .enumerate()
                .map(|(i, s)| (ElementId::Num(i as i64), s))
                .collect();
            (
                last,
                from_chronology(ChronologySource::Finite(chron), 0).unwrap(),
            )
        })
    })
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |a, b| a.max(*b))
}

proptest! {
    #[test]
    fn measures_decay_when_lifespans_are_bounded((last, evo) in evolution(), eps_exp in 2i32..8) {
        let mu = DiscreteMeasure::geometric(0.5).unwrap();
        let horizon = last + 1;
        let epsilon = 10f64.powi(-eps_exp);
        let report = decay_check(&evo, &mu, horizon, epsilon).unwrap();
        prop_assert_eq!(report.premise, Verdict::Pass);

        let oracle: Vec<f64> = evo.prefix(horizon).iter()
            .map(|s| s.iter().map(|x| 0.5f64.powi(x.as_num().unwrap() as i32 + 1)).sum())
            .collect();
        for (a, b) in report.measures.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }

        let q = report.measures.len() / 4;
        prop_assert!(max_of(&report.measures[report.measures.len() - q..]) < max_of(&report.measures[..q]));
        let k = report.first_below.unwrap();
        prop_assert!(report.measures[(k - 1) as usize..].iter().all(|m| *m < epsilon));
        prop_assert_eq!(disjoint_tail_violation(&evo, horizon), None);
    }

    #[test]
    fn bounded_integrands_stay_under_the_measure(
        (last, evo) in evolution(),
        raw_weights in prop::collection::vec(1u32..100, 200),
        coefficients in prop::collection::vec((-100i32..=100, -100i32..=100), 80),
        bound in 1u32..10,
    ) {
        let ground: Vec<ElementId> = evo.occurrences(last + 1).into_keys().collect();
        let total: f64 = raw_weights[..ground.len()].iter().map(|w| *w as f64).sum();
        let weights: BTreeMap<ElementId, f64> =
            ground.iter().zip(&raw_weights).map(|(x, w)| (x.clone(), *w as f64 / total)).collect();
        let mu = DiscreteMeasure::table(weights).unwrap();
        let c = bound as f64;
        let phi = StageIntegrand::per_stage(
            move |k| {
                let (a, b) = coefficients[k as usize % coefficients.len()];
                // |const| + 1 <= C everywhere
                let lo = (b.abs() % 30) as f64;
                let text = format!("const:{}+ind:{},{}", a as f64 / 100.0 * (c - 1.0), lo, lo + 5.0);
                text.parse::<Integrand>().unwrap()
            },
            Some(c),
        );
        let horizon = last + 1;
        let trace = stage_integral(&evo, &mu, &phi, horizon).unwrap();
        prop_assert_eq!(trace.bound_holds, Some(Verdict::Pass));
        let measures = mu_trace(&evo, &mu, horizon).unwrap();
        for (i, m) in measures.iter().enumerate() {
            prop_assert!(trace.integrals[i].abs() <= c * m + 1e-12);
        }
    }
}
