//! Populations with marriage and reproduction, and the evolution of their generations.
//!
//! A model splits its ground into males and females, marries some males to
//! distinct females (`m`), and assigns some elements a mother (`ρ`). The
//! children of a couple `(x, m(x))` are `ρ⁻¹(m(x))`.
//!
//! Starting from founder sets `M_1, F_1`, each generation is the set of
//! children of the married males of the previous one, minus anyone already
//! placed:
//!
//! ```text
//! G_{k+1} = ⋃_{x ∈ M_k ∩ M_*} ρ⁻¹(m(x))
//! M_{k+1} = (G_{k+1} ∩ M) ∖ (M_1 ∪ ... ∪ M_k)
//! E_k     = M_k ∪ F_k ∪ M_{k+1} ∪ F_{k+1}
//! ```

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::axioms::Verdict;
use crate::element::{ElementId, Stage};
use crate::evolution::{Evolution, Ground};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenealogyError {
    /// An element is both male and female.
    SexOverlap(ElementId),
    /// A ground element is neither male nor female.
    Unsexed(ElementId),
    OutsideGround(ElementId),
    MarriageNotMaleToFemale {
        male: ElementId,
        female: ElementId,
    },
    MarriageNotInjective {
        first: ElementId,
        second: ElementId,
        female: ElementId,
    },
    MotherNotFemale {
        child: ElementId,
        mother: ElementId,
    },
    FoundersInvalid(String),
}

impl fmt::Display for GenealogyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenealogyError::SexOverlap(x) => write!(f, "{x} is listed as both male and female"),
            GenealogyError::Unsexed(x) => write!(f, "{x} is neither male nor female"),
            GenealogyError::OutsideGround(x) => write!(f, "{x} is not in the ground set"),
            GenealogyError::MarriageNotMaleToFemale { male, female } => {
                write!(
                    f,
                    "marriage {male} -> {female} must pair a male with a female"
                )
            }
            GenealogyError::MarriageNotInjective {
                first,
                second,
                female,
            } => {
                write!(f, "{first} and {second} are both married to {female}")
            }
            GenealogyError::MotherNotFemale { child, mother } => {
                write!(f, "mother {mother} of {child} is not female")
            }
            GenealogyError::FoundersInvalid(reason) => write!(f, "invalid founders: {reason}"),
        }
    }
}

impl core::error::Error for GenealogyError {}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Couple {
    pub male: ElementId,
    pub female: ElementId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenealogyModel {
    ground: Stage,
    males: Stage,
    females: Stage,
    marriage: BTreeMap<ElementId, ElementId>,
    reproduction: BTreeMap<ElementId, ElementId>,
    children: BTreeMap<ElementId, Stage>,
}

impl GenealogyModel {
    /// `marriage` maps husbands to wives; `reproduction` maps children to mothers
    /// and may leave elements without a mother.
    pub fn new(
        ground: Stage,
        males: Stage,
        females: Stage,
        marriage: BTreeMap<ElementId, ElementId>,
        reproduction: BTreeMap<ElementId, ElementId>,
    ) -> Result<Self, GenealogyError> {
        if let Some(x) = males.intersection(&females).next() {
            return Err(GenealogyError::SexOverlap(x.clone()));
        }
        if let Some(x) = males.iter().chain(&females).find(|x| !ground.contains(x)) {
            return Err(GenealogyError::OutsideGround(x.clone()));
        }
        if let Some(x) = ground
            .iter()
            .find(|x| !males.contains(x) && !females.contains(x))
        {
            return Err(GenealogyError::Unsexed(x.clone()));
        }
        let mut husbands: BTreeMap<&ElementId, &ElementId> = BTreeMap::new();
        for (male, female) in &marriage {
            if !males.contains(male) || !females.contains(female) {
                return Err(GenealogyError::MarriageNotMaleToFemale {
                    male: male.clone(),
                    female: female.clone(),
                });
            }
            if let Some(first) = husbands.insert(female, male) {
                return Err(GenealogyError::MarriageNotInjective {
                    first: first.clone(),
                    second: male.clone(),
                    female: female.clone(),
                });
            }
        }
        let mut children: BTreeMap<ElementId, Stage> = BTreeMap::new();
        for (child, mother) in &reproduction {
            if !ground.contains(child) {
                return Err(GenealogyError::OutsideGround(child.clone()));
            }
            if !females.contains(mother) {
                return Err(GenealogyError::MotherNotFemale {
                    child: child.clone(),
                    mother: mother.clone(),
                });
            }
            children
                .entry(mother.clone())
                .or_default()
                .insert(child.clone());
        }
        Ok(GenealogyModel {
            ground,
            males,
            females,
            marriage,
            reproduction,
            children,
        })
    }

    pub fn ground(&self) -> &Stage {
        &self.ground
    }

    pub fn males(&self) -> &Stage {
        &self.males
    }

    pub fn females(&self) -> &Stage {
        &self.females
    }

    pub fn spouse(&self, male: &ElementId) -> Option<&ElementId> {
        self.marriage.get(male)
    }

    pub fn mother(&self, child: &ElementId) -> Option<&ElementId> {
        self.reproduction.get(child)
    }

    pub fn couple_of(&self, male: &ElementId) -> Option<Couple> {
        self.spouse(male).map(|female| Couple {
            male: male.clone(),
            female: female.clone(),
        })
    }

    pub fn couples(&self) -> impl Iterator<Item = Couple> + '_ {
        self.marriage.iter().map(|(m, f)| Couple {
            male: m.clone(),
            female: f.clone(),
        })
    }

    /// `ρ⁻¹(m(x))`; empty when the wife has no children.
    pub fn children_of(&self, couple: &Couple) -> Stage {
        self.children
            .get(&couple.female)
            .cloned()
            .unwrap_or_default()
    }

    /// Elements that are nobody's children, split by sex.
    pub fn founders(&self) -> (Stage, Stage) {
        let wives: BTreeSet<&ElementId> = self.marriage.values().collect();
        let is_child = |x: &ElementId| {
            self.reproduction
                .get(x)
                .is_some_and(|mother| wives.contains(mother))
        };
        let pick = |sex: &Stage| sex.iter().filter(|x| !is_child(x)).cloned().collect();
        (pick(&self.males), pick(&self.females))
    }
}

fn primes_up_to(n: usize) -> Vec<bool> {
    let mut sieve = alloc::vec![true; n + 1];
    for flag in sieve.iter_mut().take(2) {
        *flag = false;
    }
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            for q in (p * p..=n).step_by(p) {
                sieve[q] = false;
            }
        }
        p += 1;
    }
    sieve
}

/// Odd males married to the next even, and mother `ρ(y) = 2π(y)` with `π` the prime-counting function.
///
/// Everything is truncated at `bound`: a male whose would-be wife exceeds the
/// bound is unmarried, and `ρ(y)` is left undefined when `2π(y)` is not an
/// even number in `2..=bound`.
pub fn prime_model(bound: u64) -> GenealogyModel {
    let n = bound as i64;
    let is_prime = primes_up_to(bound as usize);
    let ground: Stage = (1..=n).map(ElementId::Num).collect();
    let males: Stage = (1..=n).step_by(2).map(ElementId::Num).collect();
    let females: Stage = (2..=n).step_by(2).map(ElementId::Num).collect();
    let marriage = (1..n)
        .step_by(2)
        .map(|x| (ElementId::Num(x), ElementId::Num(x + 1)))
        .collect();
    let mut reproduction = BTreeMap::new();
    let mut pi = 0i64;
    for y in 1..=n {
        if is_prime[y as usize] {
            pi += 1;
        }
        if pi >= 1 && 2 * pi <= n {
            reproduction.insert(ElementId::Num(y), ElementId::Num(2 * pi));
        }
    }
    GenealogyModel::new(ground, males, females, marriage, reproduction)
        .expect("prime model is well formed")
}

/// Three couples `(m_i, f_i)` where `m_{i+1}` and `f_{i+1}` are children of `f_i`.
pub fn toy_three_generation() -> GenealogyModel {
    let id = |s: &str| ElementId::from(s);
    let males: Stage = ["m1", "m2", "m3"].into_iter().map(id).collect();
    let females: Stage = ["f1", "f2", "f3"].into_iter().map(id).collect();
    let ground = males.union(&females).cloned().collect();
    let marriage = [("m1", "f1"), ("m2", "f2"), ("m3", "f3")]
        .into_iter()
        .map(|(m, f)| (id(m), id(f)))
        .collect();
    let reproduction = [("m2", "f1"), ("f2", "f1"), ("m3", "f2"), ("f3", "f2")]
        .into_iter()
        .map(|(c, m)| (id(c), id(m)))
        .collect();
    GenealogyModel::new(ground, males, females, marriage, reproduction)
        .expect("toy model is well formed")
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    /// `G_k`: everyone born into this generation, including those already placed.
    pub offspring: Stage,
    pub males: Stage,
    pub females: Stage,
}

impl Generation {
    pub fn members(&self) -> Stage {
        self.males.union(&self.females).cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    /// Generation of the parents.
    pub generation: u64,
    pub couple: Couple,
    pub children: Stage,
}

/// Children of a generation-`k` couple found among generations `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementViolation {
    pub generation: u64,
    pub couple: Couple,
    pub misplaced: Stage,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTrace {
    /// `generations[k - 1]` is generation `k`; trailing empty generations are dropped.
    pub generations: Vec<Generation>,
    /// `E_1, ..., E_n` up to the requested horizon.
    pub stages: Vec<Stage>,
    /// `E_1` together with every ground element that never enters a stage.
    pub stage_zero: Stage,
    pub families: Vec<Family>,
    pub placement: Vec<PlacementViolation>,
}

impl GenerationTrace {
    pub fn placement_verdict(&self) -> Verdict {
        if self.placement.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn stage_from(generations: &[Generation], k: usize) -> Stage {
    let empty = Generation::default();
    let g = |i: usize| generations.get(i - 1).unwrap_or(&empty);
    g(k).members().union(&g(k + 1).members()).cloned().collect()
}

/// Iterates generations from the founders until they die out.
///
/// The returned evolution lives on the elements the iteration reaches; the
/// trace lists stages `1..=horizon`.
pub fn generational_evolution(
    model: &GenealogyModel,
    founder_males: &Stage,
    founder_females: &Stage,
    horizon: u64,
) -> Result<(GenerationTrace, Evolution), GenealogyError> {
    let (ok_males, ok_females) = model.founders();
    if founder_males.is_empty() || founder_females.is_empty() {
        return Err(GenealogyError::FoundersInvalid(
            "both founder sets must be nonempty".into(),
        ));
    }
    if let Some(x) = founder_males.difference(&ok_males).next() {
        return Err(GenealogyError::FoundersInvalid(alloc::format!(
            "{x} is not a male founder"
        )));
    }
    if let Some(x) = founder_females.difference(&ok_females).next() {
        return Err(GenealogyError::FoundersInvalid(alloc::format!(
            "{x} is not a female founder"
        )));
    }

    let first = Generation {
        offspring: founder_males.union(founder_females).cloned().collect(),
        males: founder_males.clone(),
        females: founder_females.clone(),
    };
    let mut placed: Stage = first.members();
    let mut placed_males: Stage = first.males.clone();
    let mut placed_females: Stage = first.females.clone();
    let mut generations = alloc::vec![first];
    let mut families = Vec::new();
    let mut placement = Vec::new();

    loop {
        let k = generations.len() as u64;
        let current = &generations[generations.len() - 1];
        let mut offspring = Stage::new();
        for male in &current.males {
            let Some(couple) = model.couple_of(male) else {
                continue;
            };
            let children = model.children_of(&couple);
            let misplaced: Stage = children.intersection(&placed).cloned().collect();
            if !misplaced.is_empty() {
                placement.push(PlacementViolation {
                    generation: k,
                    couple: couple.clone(),
                    misplaced,
                });
            }
            offspring.extend(children.iter().cloned());
            families.push(Family {
                generation: k,
                couple,
                children,
            });
        }
        if offspring.is_empty() {
            break;
        }
        let males: Stage = offspring
            .intersection(model.males())
            .filter(|x| !placed_males.contains(*x))
            .cloned()
            .collect();
        let females: Stage = offspring
            .intersection(model.females())
            .filter(|x| !placed_females.contains(*x))
            .cloned()
            .collect();
        placed_males.extend(males.iter().cloned());
        placed_females.extend(females.iter().cloned());
        placed.extend(males.iter().chain(&females).cloned());
        let stop = males.is_empty() && females.is_empty();
        generations.push(Generation {
            offspring,
            males,
            females,
        });
        if stop {
            break;
        }
    }
    while generations
        .last()
        .is_some_and(|g| g.members().is_empty() && g.offspring.is_empty())
    {
        generations.pop();
    }

    let all: Vec<Stage> = (1..=generations.len())
        .map(|k| stage_from(&generations, k))
        .collect();
    let stages: Vec<Stage> = (1..=horizon as usize)
        .map(|k| stage_from(&generations, k))
        .collect();
    let reached: Stage = all.iter().flatten().cloned().collect();
    let mut stage_zero = all.first().cloned().unwrap_or_default();
    stage_zero.extend(model.ground().difference(&reached).cloned());

    let evolution = Evolution::explicit(Ground::Finite(reached), all);
    Ok((
        GenerationTrace {
            generations,
            stages,
            stage_zero,
            families,
            placement,
        },
        evolution,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncestryReport {
    pub generations_disjoint: Verdict,
    /// An element listed in two generations, with both indices.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shared_member: Option<(ElementId, u64, u64)>,
    pub children_disjoint: Verdict,
    /// A child claimed by two couples.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shared_child: Option<(ElementId, Couple, Couple)>,
    pub acyclic: Verdict,
    /// A chain `x_0 -> x_1 -> ... -> x_0` of parent-to-child links.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cycle: Option<Vec<ElementId>>,
}

impl AncestryReport {
    pub fn passes(&self) -> bool {
        [
            self.generations_disjoint,
            self.children_disjoint,
            self.acyclic,
        ]
        .iter()
        .all(|v| *v == Verdict::Pass)
    }
}

fn find_cycle(edges: &BTreeMap<ElementId, Stage>, nodes: &Stage) -> Option<Vec<ElementId>> {
    // every remaining node has a remaining predecessor, so walking back must repeat
    let mut preds: BTreeMap<&ElementId, &ElementId> = BTreeMap::new();
    for (from, tos) in edges {
        if nodes.contains(from) {
            for to in tos.iter().filter(|t| nodes.contains(*t)) {
                preds.entry(to).or_insert(from);
            }
        }
    }
    let mut at = nodes.iter().next()?;
    let mut seen: BTreeMap<&ElementId, usize> = BTreeMap::new();
    let mut walk = Vec::new();
    while !seen.contains_key(at) {
        seen.insert(at, walk.len());
        walk.push(at.clone());
        at = preds.get(at)?;
    }
    let mut cycle: Vec<ElementId> = walk[seen[at]..].to_vec();
    cycle.reverse();
    cycle.push(cycle[0].clone());
    Some(cycle)
}

/// Checks that generations are disjoint, that no child has two couples, and
/// that nobody descends from themselves.
pub fn ancestry_check(trace: &GenerationTrace) -> AncestryReport {
    let mut shared_member = None;
    let mut home: BTreeMap<&ElementId, u64> = BTreeMap::new();
    'outer: for (i, g) in trace.generations.iter().enumerate() {
        for x in g.males.iter().chain(&g.females) {
            if let Some(first) = home.insert(x, i as u64 + 1) {
                shared_member = Some((x.clone(), first, i as u64 + 1));
                break 'outer;
            }
        }
    }

    let mut shared_child = None;
    let mut parents: BTreeMap<&ElementId, &Couple> = BTreeMap::new();
    'families: for family in &trace.families {
        for child in &family.children {
            if let Some(first) = parents.insert(child, &family.couple) {
                if *first != family.couple {
                    shared_child = Some((child.clone(), first.clone(), family.couple.clone()));
                    break 'families;
                }
            }
        }
    }

    let mut edges: BTreeMap<ElementId, Stage> = BTreeMap::new();
    let mut nodes = Stage::new();
    for family in &trace.families {
        for parent in [&family.couple.male, &family.couple.female] {
            nodes.insert(parent.clone());
            edges
                .entry(parent.clone())
                .or_default()
                .extend(family.children.iter().cloned());
        }
        nodes.extend(family.children.iter().cloned());
    }
    let mut indegree: BTreeMap<&ElementId, usize> = nodes.iter().map(|x| (x, 0)).collect();
    for tos in edges.values() {
        for to in tos {
            *indegree.get_mut(to).expect("child is a node") += 1;
        }
    }
    let mut queue: VecDeque<&ElementId> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(x, _)| *x)
        .collect();
    let mut remaining = nodes.clone();
    while let Some(x) = queue.pop_front() {
        remaining.remove(x);
        for to in edges.get(x).into_iter().flatten() {
            let d = indegree.get_mut(to).expect("child is a node");
            *d -= 1;
            if *d == 0 {
                queue.push_back(to);
            }
        }
    }
    let cycle = if remaining.is_empty() {
        None
    } else {
        find_cycle(&edges, &remaining)
    };

    let verdict = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };
    AncestryReport {
        generations_disjoint: verdict(shared_member.is_none()),
        shared_member,
        children_disjoint: verdict(shared_child.is_none()),
        shared_child,
        acyclic: verdict(remaining.is_empty()),
        cycle,
    }
}
