//! A small catalog of integrands with closed-form antiderivatives.
//!
//! Descriptors are written as `+`-joined terms:
//!
//! | term                        | function                         |
//! |-----------------------------|----------------------------------|
//! | `const:c`                   | `c`                              |
//! | `pow:alpha[,scale][,shift]` | `scale * (x - shift)^alpha`, `alpha > -1` |
//! | `poly:a0,a1,...`            | `a0 + a1 x + ...`                |
//! | `ind:a,b`                   | `1` on `[a, b)`, else `0`         |
//!
//! Numbers are parsed as binary64 and printed back in shortest round-trip
//! form, so `parse(display(φ)) == φ` bit for bit. A `+` only separates terms
//! when a term keyword follows it, so exponents like `1e+5` are fine.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DiscreteMeasure, MeasureError, MEASURE_TOLERANCE};
use crate::axioms::Verdict;
use crate::chronology::lifespans_by_stage;
use crate::element::ElementId;
use crate::evolution::Evolution;
use crate::intervals::IntervalSet;

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Const(f64),
    Pow { alpha: f64, scale: f64, shift: f64 },
    Poly(Vec<f64>),
    Indicator { a: f64, b: f64 },
}

const KEYWORDS: [&str; 4] = ["const:", "pow:", "poly:", "ind:"];

fn unsupported(what: impl Into<String>) -> MeasureError {
    MeasureError::CatalogUnsupported(what.into())
}

fn poly_eval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn poly_primitive(coefficients: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, a) in coefficients.iter().enumerate().rev() {
        acc = acc * x + a / (i as f64 + 1.0);
    }
    acc * x
}

impl Term {
    fn validate(&self) -> Result<(), MeasureError> {
        match self {
            Term::Pow { alpha, .. } if !(*alpha > -1.0) => Err(unsupported(format!(
                "power exponent {alpha} is not integrable (need alpha > -1)"
            ))),
            Term::Poly(c) if c.is_empty() => Err(unsupported("polynomial without coefficients")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Term::Const(c) => *c,
            Term::Pow {
                alpha,
                scale,
                shift,
            } => scale * libm::pow(x - shift, *alpha),
            Term::Poly(c) => poly_eval(c, x),
            Term::Indicator { a, b } => {
                if *a <= x && x < *b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_lo^hi` by antiderivative.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64, MeasureError> {
        Ok(match self {
            Term::Const(c) => {
                if *c == 0.0 {
                    0.0
                } else {
                    c * (hi - lo)
                }
            }
            Term::Pow {
                alpha,
                scale,
                shift,
            } => {
                if lo < *shift {
                    return Err(unsupported(format!(
                        "power term is undefined below {shift}, integrating from {lo}"
                    )));
                }
                let p = alpha + 1.0;
                scale * (libm::pow(hi - shift, p) - libm::pow(lo - shift, p)) / p
            }
            Term::Poly(c) => poly_primitive(c, hi) - poly_primitive(c, lo),
            Term::Indicator { a, b } => (hi.min(*b) - lo.max(*a)).max(0.0),
        })
    }

    fn fmt_numbers(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v:?}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "const:{c:?}"),
            Term::Pow {
                alpha,
                scale,
                shift,
            } => {
                write!(f, "pow:")?;
                if *shift != 0.0 {
                    Term::fmt_numbers(f, &[*alpha, *scale, *shift])
                } else if *scale != 1.0 {
                    Term::fmt_numbers(f, &[*alpha, *scale])
                } else {
                    Term::fmt_numbers(f, &[*alpha])
                }
            }
            Term::Poly(c) => {
                write!(f, "poly:")?;
                Term::fmt_numbers(f, c)
            }
            Term::Indicator { a, b } => {
                write!(f, "ind:")?;
                Term::fmt_numbers(f, &[*a, *b])
            }
        }
    }
}

impl FromStr for Term {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, MeasureError> {
        let (kind, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| unsupported(format!("missing ':' in term {s:?}")))?;
        let numbers: Vec<f64> = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| unsupported(format!("bad number {a:?} in term {s:?}")))
            })
            .collect::<Result<_, _>>()?;
        let arity = |lo: usize, hi: usize| {
            if numbers.len() < lo || numbers.len() > hi {
                Err(unsupported(format!(
                    "term {s:?} takes {lo} to {hi} numbers"
                )))
            } else {
                Ok(())
            }
        };
        let term = match kind.trim() {
            "const" => {
                arity(1, 1)?;
                Term::Const(numbers[0])
            }
            "pow" => {
                arity(1, 3)?;
                Term::Pow {
                    alpha: numbers[0],
                    scale: numbers.get(1).copied().unwrap_or(1.0),
                    shift: numbers.get(2).copied().unwrap_or(0.0),
                }
            }
            "poly" => Term::Poly(numbers),
            "ind" => {
                arity(2, 2)?;
                Term::Indicator {
                    a: numbers[0],
                    b: numbers[1],
                }
            }
            other => return Err(unsupported(format!("unknown term kind {other:?}"))),
        };
        term.validate()?;
        Ok(term)
    }
}

/// A finite sum of catalog terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    terms: Vec<Term>,
}

impl Integrand {
    pub fn new(terms: Vec<Term>) -> Result<Self, MeasureError> {
        if terms.is_empty() {
            return Err(unsupported("empty integrand"));
        }
        for t in &terms {
            t.validate()?;
        }
        Ok(Integrand { terms })
    }

    pub fn constant(c: f64) -> Self {
        Integrand {
            terms: alloc::vec![Term::Const(c)],
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn integrate_interval(&self, lo: f64, hi: f64) -> Result<f64, MeasureError> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, t| Ok(acc + t.integrate(lo, hi)?))
    }

    /// Sum over parts in ascending order.
    pub fn integrate(&self, set: &IntervalSet) -> Result<f64, MeasureError> {
        set.parts().iter().try_fold(0.0, |acc, [lo, hi]| {
            Ok(acc + self.integrate_interval(*lo, *hi)?)
        })
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for Integrand {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, MeasureError> {
        let mut pieces: Vec<String> = Vec::new();
        for chunk in s.split('+') {
            let starts_term = KEYWORDS.iter().any(|k| chunk.trim_start().starts_with(k));
            match pieces.last_mut() {
                Some(last) if !starts_term => {
                    last.push('+');
                    last.push_str(chunk);
                }
                _ => pieces.push(chunk.to_string()),
            }
        }
        Integrand::new(pieces.iter().map(|p| p.parse()).collect::<Result<_, _>>()?)
    }
}

impl Serialize for Integrand {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Integrand {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

type Family = Arc<dyn Fn(u64) -> Integrand + Send + Sync>;

/// Integrands `φ_k`, one per stage, with an optional declared bound `|φ_k| <= C`.
#[derive(Clone)]
pub struct StageIntegrand {
    family: Family,
    bound: Option<f64>,
}

impl fmt::Debug for StageIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StageIntegrand")
            .field("first", &(self.family)(1))
            .field("bound", &self.bound)
            .finish()
    }
}

impl StageIntegrand {
    pub fn fixed(phi: Integrand, bound: Option<f64>) -> Self {
        StageIntegrand {
            family: Arc::new(move |_| phi.clone()),
            bound,
        }
    }

    pub fn per_stage(
        family: impl Fn(u64) -> Integrand + Send + Sync + 'static,
        bound: Option<f64>,
    ) -> Self {
        StageIntegrand {
            family: Arc::new(family),
            bound,
        }
    }

    pub fn at(&self, k: u64) -> Integrand {
        (self.family)(k)
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralTrace {
    /// `∫_{E_k} φ_k dμ` for `k < horizon`.
    pub integrals: Vec<f64>,
    pub measures: Vec<f64>,
    /// `max |φ_k(x)|` over `x ∈ E_k` (0 on empty stages).
    pub sup_abs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
    /// Whether `|∫_{E_k} φ_k| <= C μ(E_k)` at every stage; absent without a bound.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_holds: Option<Verdict>,
    /// Stages where the stagewise inequality fails.
    pub bound_failures: Vec<u64>,
    /// Stages with a point where `|φ_k(x)| > C`.
    pub pointwise_failures: Vec<u64>,
    /// With a bound declared and every lifespan bounded: the first `K` from which
    /// `|∫_{E_k} φ_k| > C μ(E_k)` at every remaining stage.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contradiction_from: Option<u64>,
}

fn point(x: &ElementId) -> Result<f64, MeasureError> {
    x.as_num()
        .map(|n| n as f64)
        .ok_or_else(|| unsupported(format!("cannot evaluate an integrand at {x}")))
}

/// `∫_{E_k} φ_k dμ = Σ_{x ∈ E_k} φ_k(x) w(x)` for `k < horizon`, with bound diagnostics.
pub fn stage_integral(
    evo: &Evolution,
    mu: &DiscreteMeasure,
    phi: &StageIntegrand,
    horizon: u64,
) -> Result<IntegralTrace, MeasureError> {
    let mut integrals = Vec::new();
    let mut measures = Vec::new();
    let mut sup_abs = Vec::new();
    for (i, stage) in evo.prefix(horizon).iter().enumerate() {
        let f = phi.at(i as u64 + 1);
        let (mut integral, mut measure, mut sup) = (0.0, 0.0, 0.0f64);
        for x in stage.iter() {
            let w = mu.weight(x)?;
            let value = f.eval(point(x)?);
            integral += value * w;
            measure += w;
            sup = sup.max(libm::fabs(value));
        }
        integrals.push(integral);
        measures.push(measure);
        sup_abs.push(sup);
    }

    let bound = phi.bound();
    let mut bound_failures = Vec::new();
    let mut pointwise_failures = Vec::new();
    let mut contradiction_from = None;
    if let Some(c) = bound {
        let exceeds: Vec<bool> = integrals
            .iter()
            .zip(&measures)
            .map(|(integral, m)| libm::fabs(*integral) > c * m + MEASURE_TOLERANCE)
            .collect();
        bound_failures = (1..horizon)
            .filter(|k| exceeds[(*k - 1) as usize])
            .collect();
        pointwise_failures = (1..horizon)
            .filter(|k| sup_abs[(*k - 1) as usize] > c)
            .collect();
        let premise = lifespans_by_stage(evo, horizon).iter().all(Option::is_some);
        if premise && exceeds.last() == Some(&true) {
            let run = exceeds.iter().rev().take_while(|e| **e).count() as u64;
            contradiction_from = Some(horizon - run);
        }
    }
    let bound_holds = bound.map(|_| {
        if bound_failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    });

    Ok(IntegralTrace {
        integrals,
        measures,
        sup_abs,
        bound,
        bound_holds,
        bound_failures,
        pointwise_failures,
        contradiction_from,
    })
}
