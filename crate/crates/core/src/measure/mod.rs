//! Probability measures on grounds and what they say about stages.

mod atoms;
mod convergent;
mod integrand;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::axioms::Verdict;
use crate::chronology::lifespans_by_stage;
use crate::element::{ElementId, Stage};
use crate::evolution::{Evolution, Ground};
use crate::intervals::{IntervalSet, RealEvolution};

pub use atoms::{atom_augmented_evolution, ArithmeticAtoms, AtomFamily, AugmentedEvolution};
pub use convergent::{construct_convergent_evolution, ConvergenceReport, ConvergentConstruction};
pub use integrand::{stage_integral, IntegralTrace, Integrand, StageIntegrand, Term};

/// Allowed drift of a weight table's total from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance for comparisons between measures and integrals.
pub const MEASURE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureError {
    WeightMissing(ElementId),
    NegativeWeight(ElementId),
    NotNormalized {
        sum: f64,
    },
    /// A weighted element outside the ground.
    OutsideGround(ElementId),
    BadRatio(f64),
    CarrierNotNormalized {
        measure: f64,
    },
    CatalogUnsupported(String),
    AtomsOverlap {
        first: u64,
        second: u64,
        element: ElementId,
    },
    ZeroWeightAtom {
        stage: u64,
    },
    NotInvertible(ElementId),
    /// The integrand never changes sign, its integral is nonzero, and the
    /// schedule did not reach the tolerance.
    SignObstruction {
        total: f64,
    },
    BadParameter(String),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::WeightMissing(x) => write!(f, "no weight for {x}"),
            MeasureError::NegativeWeight(x) => write!(f, "negative weight for {x}"),
            MeasureError::NotNormalized { sum } => write!(f, "weights sum to {sum}, not 1"),
            MeasureError::OutsideGround(x) => write!(f, "weighted element {x} is outside the ground"),
            MeasureError::BadRatio(r) => write!(f, "geometric ratio must lie in (0, 1), got {r}"),
            MeasureError::CarrierNotNormalized { measure } => write!(f, "carrier has length {measure}, not 1"),
            MeasureError::CatalogUnsupported(what) => write!(f, "unsupported integrand: {what}"),
            MeasureError::AtomsOverlap { first, second, element } => {
                write!(f, "atoms of stages {first} and {second} share {element}")
            }
            MeasureError::ZeroWeightAtom { stage } => write!(f, "atom of stage {stage} has zero weight"),
            MeasureError::NotInvertible(x) => write!(f, "map has no unique preimage for {x}"),
            MeasureError::SignObstruction { total } => write!(
                f,
                "integrand has a single sign with integral {total}; the stage integrals do not reach it"
            ),
            MeasureError::BadParameter(what) => write!(f, "{what}"),
        }
    }
}

impl core::error::Error for MeasureError {}

/// A probability on an enumerable ground.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteMeasure {
    Table(BTreeMap<ElementId, f64>),
    /// `w(x) = (1 - r) r^x` on the naturals.
    Geometric {
        ratio: f64,
    },
}

impl DiscreteMeasure {
    pub fn table(weights: BTreeMap<ElementId, f64>) -> Result<Self, MeasureError> {
        if let Some((x, _)) = weights.iter().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(MeasureError::NegativeWeight(x.clone()));
        }
        let sum: f64 = weights.values().sum();
        if libm::fabs(sum - 1.0) > WEIGHT_SUM_TOLERANCE {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(DiscreteMeasure::Table(weights))
    }

    pub fn geometric(ratio: f64) -> Result<Self, MeasureError> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(MeasureError::BadRatio(ratio));
        }
        Ok(DiscreteMeasure::Geometric { ratio })
    }

    /// Every weighted element must belong to `ground`.
    pub fn check_ground(&self, ground: &Ground) -> Result<(), MeasureError> {
        match self {
            DiscreteMeasure::Table(weights) => match weights.keys().find(|x| !ground.contains(x)) {
                Some(x) => Err(MeasureError::OutsideGround(x.clone())),
                None => Ok(()),
            },
            DiscreteMeasure::Geometric { .. } => match ground {
                Ground::Naturals { start } if *start >= 0 => Ok(()),
                Ground::Naturals { start } => {
                    Err(MeasureError::WeightMissing(ElementId::Num(*start)))
                }
                Ground::Finite(set) => {
                    match set.iter().find(|x| !x.as_num().is_some_and(|n| n >= 0)) {
                        Some(x) => Err(MeasureError::WeightMissing(x.clone())),
                        None => Ok(()),
                    }
                }
            },
        }
    }

    pub fn weight(&self, x: &ElementId) -> Result<f64, MeasureError> {
        match self {
            DiscreteMeasure::Table(weights) => weights
                .get(x)
                .copied()
                .ok_or_else(|| MeasureError::WeightMissing(x.clone())),
            DiscreteMeasure::Geometric { ratio } => match x.as_num() {
                Some(n) if n >= 0 => Ok((1.0 - ratio) * libm::pow(*ratio, n as f64)),
                _ => Err(MeasureError::WeightMissing(x.clone())),
            },
        }
    }

    /// Sum of weights in ascending element order.
    pub fn measure(&self, stage: &Stage) -> Result<f64, MeasureError> {
        stage
            .iter()
            .try_fold(0.0, |acc, x| Ok(acc + self.weight(x)?))
    }
}

/// `μ(E_k)` for `k < horizon`.
pub fn mu_trace(
    evo: &Evolution,
    mu: &DiscreteMeasure,
    horizon: u64,
) -> Result<Vec<f64>, MeasureError> {
    evo.prefix(horizon)
        .iter()
        .map(|stage| mu.measure(stage))
        .collect()
}

/// Interval stages inside a carrier of length 1, measured by length.
#[derive(Clone, Debug)]
pub struct LebesgueModel {
    carrier: IntervalSet,
    stages: RealEvolution,
}

impl LebesgueModel {
    pub fn new(carrier: IntervalSet, stages: RealEvolution) -> Result<Self, MeasureError> {
        let measure = carrier.measure();
        if libm::fabs(measure - 1.0) > MEASURE_TOLERANCE {
            return Err(MeasureError::CarrierNotNormalized { measure });
        }
        Ok(LebesgueModel { carrier, stages })
    }

    pub fn carrier(&self) -> &IntervalSet {
        &self.carrier
    }

    pub fn stages(&self) -> &RealEvolution {
        &self.stages
    }

    pub fn stage(&self, k: u64) -> IntervalSet {
        self.stages.stage(k).intersection(&self.carrier)
    }

    pub fn mu_trace(&self, horizon: u64) -> Vec<f64> {
        (1..horizon).map(|k| self.stage(k).measure()).collect()
    }

    /// `∫_{F_k} φ` for `k < horizon`.
    pub fn integral_trace(&self, phi: &Integrand, horizon: u64) -> Result<Vec<f64>, MeasureError> {
        (1..horizon)
            .map(|k| phi.integrate(&self.stage(k)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub horizon: u64,
    pub epsilon: f64,
    /// `μ(E_k)` for `k < horizon`.
    pub measures: Vec<f64>,
    /// Longest lifespan among elements of `E_k`; `None` while any of them is undetermined.
    pub lifespan_bounds: Vec<Option<u64>>,
    /// Smallest `K` with `μ(E_k) < ε` for all `K <= k < horizon`.
    pub first_below: Option<u64>,
    /// Elements present in every stage of the second half of the prefix.
    pub persistent: Stage,
    /// FAIL when some element persists, PASS when every lifespan is bounded, else UNKNOWN.
    pub premise: Verdict,
    /// PASS when `first_below` exists; UNKNOWN when the measures stay above `ε`.
    pub decay: Verdict,
}

/// Tracks `μ(E_k)` against `ε` together with the lifespan premise behind decay.
pub fn decay_check(
    evo: &Evolution,
    mu: &DiscreteMeasure,
    horizon: u64,
    epsilon: f64,
) -> Result<DecayReport, MeasureError> {
    if horizon < 8 {
        return Err(MeasureError::BadParameter(alloc::format!(
            "decay check needs horizon >= 8, got {horizon}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(MeasureError::BadParameter(alloc::format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let measures = mu_trace(evo, mu, horizon)?;
    let lifespan_bounds = lifespans_by_stage(evo, horizon);

    let mut first_below = None;
    for k in (1..horizon).rev() {
        if measures[(k - 1) as usize] < epsilon {
            first_below = Some(k);
        } else {
            break;
        }
    }

    let stages = evo.prefix(horizon);
    let half = (horizon / 2).max(1);
    let mut suffix = stages[(half - 1) as usize..].iter();
    let mut persistent: Stage = suffix.next().map(|s| (**s).clone()).unwrap_or_default();
    for stage in suffix {
        persistent.retain(|x| stage.contains(x));
    }

    let premise = if !persistent.is_empty() {
        Verdict::Fail
    } else if lifespan_bounds.iter().all(Option::is_some) {
        Verdict::Pass
    } else {
        Verdict::Unknown
    };
    let decay = if first_below.is_some() {
        Verdict::Pass
    } else {
        Verdict::Unknown
    };
    Ok(DecayReport {
        horizon,
        epsilon,
        measures,
        lifespan_bounds,
        first_below,
        persistent,
        premise,
        decay,
    })
}

/// First pair `(k, n)` with `n >= k + d_k + 1` and `E_k ∩ E_n ≠ ∅`, over stages with known `d_k`.
pub fn disjoint_tail_violation(evo: &Evolution, horizon: u64) -> Option<(u64, u64)> {
    let bounds = lifespans_by_stage(evo, horizon);
    let stages = evo.prefix(horizon);
    for (i, bound) in bounds.iter().enumerate() {
        let Some(d) = bound else { continue };
        let k = i as u64 + 1;
        for n in k + d + 1..horizon {
            if stages[i]
                .intersection(&stages[(n - 1) as usize])
                .next()
                .is_some()
            {
                return Some((k, n));
            }
        }
    }
    None
}
