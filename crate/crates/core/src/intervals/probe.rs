use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{IntervalError, IntervalSet, RealEvolution};
use crate::axioms::AxiomReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeRange {
    NonNegative,
    Real,
}

impl ProbeRange {
    pub fn as_set(self) -> IntervalSet {
        match self {
            ProbeRange::NonNegative => IntervalSet::half_line(),
            ProbeRange::Real => IntervalSet::real_line(),
        }
    }
}

/// A real-valued function on `ℝⁿ` together with a witness sampler.
///
/// Determinant probes read points as `n × n` matrices in row-major order.
/// A distance-to-set probe measures distance to a finite set of points and is
/// declared onto `[0, ∞)`, which holds on the unbounded ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "kebab-case")]
pub enum ScalarProbe {
    DistanceToPoint { center: Vec<f64> },
    DistanceToSet { points: Vec<Vec<f64>> },
    Linear { coefficients: Vec<f64> },
    Determinant { n: usize },
    InnerProduct { with: Vec<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Gaussian elimination with partial pivoting on a row-major square matrix.
fn determinant(mut m: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| libm::fabs(m[a * n + col]).total_cmp(&libm::fabs(m[b * n + col])))
            .unwrap_or(col);
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = m[row * n + col] / p;
            if factor != 0.0 {
                for j in col..n {
                    m[row * n + j] -= factor * m[col * n + j];
                }
            }
        }
    }
    det
}

impl ScalarProbe {
    pub fn dimension(&self) -> usize {
        match self {
            ScalarProbe::DistanceToPoint { center } => center.len(),
            ScalarProbe::DistanceToSet { points } => points.first().map_or(0, Vec::len),
            ScalarProbe::Linear { coefficients } => coefficients.len(),
            ScalarProbe::Determinant { n } => n * n,
            ScalarProbe::InnerProduct { with } => with.len(),
        }
    }

    pub fn range(&self) -> ProbeRange {
        match self {
            ScalarProbe::DistanceToPoint { .. } | ScalarProbe::DistanceToSet { .. } => {
                ProbeRange::NonNegative
            }
            _ => ProbeRange::Real,
        }
    }

    /// Rejects probes that are not surjective onto their range.
    pub fn validate(&self) -> Result<(), IntervalError> {
        let nonzero = |v: &[f64]| v.iter().any(|x| *x != 0.0) && v.iter().all(|x| x.is_finite());
        match self {
            ScalarProbe::DistanceToPoint { center } if center.is_empty() => {
                Err(IntervalError::ZeroProbe)
            }
            ScalarProbe::DistanceToSet { points } => {
                let dim = self.dimension();
                if dim == 0 {
                    return Err(IntervalError::ZeroProbe);
                }
                match points.iter().find(|p| p.len() != dim) {
                    Some(p) => Err(IntervalError::DimensionMismatch {
                        expected: dim,
                        got: p.len(),
                    }),
                    None => Ok(()),
                }
            }
            ScalarProbe::Linear { coefficients: v } | ScalarProbe::InnerProduct { with: v }
                if !nonzero(v) =>
            {
                Err(IntervalError::ZeroProbe)
            }
            ScalarProbe::Determinant { n: 0 } => Err(IntervalError::ZeroProbe),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, IntervalError> {
        let dim = self.dimension();
        if point.len() != dim {
            return Err(IntervalError::DimensionMismatch {
                expected: dim,
                got: point.len(),
            });
        }
        Ok(match self {
            ScalarProbe::DistanceToPoint { center } => distance(point, center),
            ScalarProbe::DistanceToSet { points } => points
                .iter()
                .map(|p| distance(point, p))
                .fold(f64::INFINITY, f64::min),
            ScalarProbe::Linear { coefficients } => dot(coefficients, point),
            ScalarProbe::Determinant { n } => determinant(point.to_vec(), *n),
            ScalarProbe::InnerProduct { with } => dot(point, with),
        })
    }

    /// A point whose probe value is `t`, or as close as rounding allows.
    ///
    /// Determinant witnesses are `diag(1, ..., 1, t)` and hit `t` exactly.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let dim = self.dimension();
        match self {
            ScalarProbe::DistanceToPoint { center } => {
                let mut p = center.clone();
                p[0] += t;
                p
            }
            ScalarProbe::DistanceToSet { points } => {
                let far = points
                    .iter()
                    .max_by(|a, b| a[0].total_cmp(&b[0]))
                    .expect("validated probe");
                let mut p = far.clone();
                p[0] += t;
                p
            }
            ScalarProbe::Linear { coefficients } => {
                let (i, c) = coefficients
                    .iter()
                    .enumerate()
                    .max_by(|a, b| libm::fabs(*a.1).total_cmp(&libm::fabs(*b.1)))
                    .expect("validated probe");
                let mut p = vec![0.0; dim];
                p[i] = t / c;
                p
            }
            ScalarProbe::Determinant { n } => {
                let mut p = vec![0.0; dim];
                for i in 0..*n {
                    p[i * n + i] = 1.0;
                }
                p[dim - 1] = t;
                p
            }
            ScalarProbe::InnerProduct { with } => {
                let scale = t / dot(with, with);
                with.iter().map(|x| x * scale).collect()
            }
        }
    }
}

/// Stages `{e : probe(e) ∈ base(k)}` given as a membership oracle with a witness per stage.
#[derive(Clone, Debug)]
pub struct ScalarEvolution {
    probe: ScalarProbe,
    base: RealEvolution,
}

impl ScalarEvolution {
    /// Checks stages `1..=horizon` of `base` against the probe range.
    pub fn new(
        probe: ScalarProbe,
        base: RealEvolution,
        horizon: u64,
    ) -> Result<Self, IntervalError> {
        probe.validate()?;
        if probe.range() == ProbeRange::NonNegative {
            for k in 1..=horizon {
                if let Some(lo) = base.stage(k).inf().filter(|lo| *lo < 0.0) {
                    return Err(IntervalError::RangeMismatch {
                        stage: k,
                        value: lo,
                    });
                }
            }
        }
        Ok(ScalarEvolution { probe, base })
    }

    pub fn probe(&self) -> &ScalarProbe {
        &self.probe
    }

    pub fn base(&self) -> &RealEvolution {
        &self.base
    }

    pub fn contains(&self, point: &[f64], k: u64) -> Result<bool, IntervalError> {
        Ok(self.base.stage(k).contains(self.probe.evaluate(point)?))
    }

    /// Stages `k < horizon` containing `point`.
    pub fn occurrences(&self, point: &[f64], horizon: u64) -> Result<Vec<u64>, IntervalError> {
        let value = self.probe.evaluate(point)?;
        Ok((1..horizon)
            .filter(|&k| self.base.stage(k).contains(value))
            .collect())
    }

    /// A point of stage `k`, verified by evaluating the probe; `None` for an empty stage.
    pub fn witness(&self, k: u64) -> Option<Vec<f64>> {
        let stage = self
            .base
            .stage(k)
            .intersection(&self.probe.range().as_set());
        let candidates = stage.parts().iter().flat_map(|&[lo, hi]| {
            let mid = if hi.is_finite() {
                lo + (hi - lo) / 2.0
            } else {
                lo + 1.0
            };
            [lo, mid]
        });
        for t in candidates {
            let point = self.probe.sample(t);
            if self.probe.evaluate(&point).is_ok_and(|v| stage.contains(v)) {
                return Some(point);
            }
        }
        None
    }

    /// Preimages preserve the set operations, so the base verdicts carry over.
    pub fn check_axioms(&self, horizon: u64) -> AxiomReport<IntervalSet> {
        self.base.check_axioms(horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::sliding_window_evolution;

    fn windows() -> RealEvolution {
        sliding_window_evolution(2.0, 1.0).unwrap()
    }

    #[test]
    fn point_at_distance_five() {
        let evo = ScalarEvolution::new(
            ScalarProbe::DistanceToPoint {
                center: vec![0.0, 0.0],
            },
            windows(),
            20,
        )
        .unwrap();
        assert_eq!(evo.occurrences(&[3.0, 4.0], 20).unwrap(), vec![5, 6]);
        assert!(evo.contains(&[0.0, 0.0], 1).unwrap());
        assert!(!evo.contains(&[0.0, 0.0], 2).unwrap());
    }

    #[test]
    fn determinant_witness_is_diagonal() {
        let probe = ScalarProbe::Determinant { n: 2 };
        assert_eq!(probe.sample(7.5), vec![1.0, 0.0, 0.0, 7.5]);
        assert_eq!(probe.evaluate(&probe.sample(7.5)).unwrap(), 7.5);
        assert_eq!(probe.evaluate(&[0.0, 2.0, 3.0, 0.0]).unwrap(), -6.0);
        assert_eq!(
            ScalarProbe::Determinant { n: 3 }
                .evaluate(&[2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0])
                .unwrap(),
            24.0
        );
    }

    #[test]
    fn witnesses_land_in_their_stage() {
        let probes = [
            ScalarProbe::DistanceToPoint {
                center: vec![1.5, -2.0, 0.25],
            },
            ScalarProbe::DistanceToSet {
                points: vec![vec![0.0, 0.0], vec![3.0, 1.0]],
            },
            ScalarProbe::Linear {
                coefficients: vec![0.0, -3.0, 0.1],
            },
            ScalarProbe::Determinant { n: 3 },
            ScalarProbe::InnerProduct {
                with: vec![0.3, 0.7],
            },
        ];
        for probe in probes {
            let evo = ScalarEvolution::new(probe.clone(), windows(), 30).unwrap();
            for k in 1..30 {
                let w = evo
                    .witness(k)
                    .unwrap_or_else(|| panic!("{probe:?} stage {k}"));
                assert!(evo.contains(&w, k).unwrap(), "{probe:?} stage {k}");
            }
        }
    }

    #[test]
    fn distance_probe_rejects_negative_base() {
        let shifted = RealEvolution::from_fn(IntervalSet::real_line(), |k| {
            let lo = k as f64 - 3.0;
            IntervalSet::interval(lo, lo + 2.0)
        });
        let err = ScalarEvolution::new(
            ScalarProbe::DistanceToPoint { center: vec![0.0] },
            shifted.clone(),
            5,
        );
        assert_eq!(
            err.unwrap_err(),
            IntervalError::RangeMismatch {
                stage: 1,
                value: -2.0
            }
        );
        assert!(ScalarEvolution::new(
            ScalarProbe::Linear {
                coefficients: vec![1.0]
            },
            shifted,
            5
        )
        .is_ok());
    }

    #[test]
    fn degenerate_probes_are_rejected() {
        assert_eq!(
            ScalarProbe::Linear {
                coefficients: vec![0.0, 0.0]
            }
            .validate(),
            Err(IntervalError::ZeroProbe)
        );
        assert_eq!(
            ScalarProbe::InnerProduct { with: vec![] }.validate(),
            Err(IntervalError::ZeroProbe)
        );
        assert_eq!(
            ScalarProbe::DistanceToSet {
                points: vec![vec![0.0, 0.0], vec![1.0]]
            }
            .validate(),
            Err(IntervalError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(ScalarProbe::Linear {
            coefficients: vec![1.0]
        }
        .evaluate(&[1.0, 2.0])
        .is_err());
    }

    #[test]
    fn verdicts_follow_the_base() {
        let evo = ScalarEvolution::new(
            ScalarProbe::InnerProduct {
                with: vec![1.0, 1.0],
            },
            windows(),
            10,
        )
        .unwrap();
        assert_eq!(evo.check_axioms(25), windows().check_axioms(25));
    }
}
