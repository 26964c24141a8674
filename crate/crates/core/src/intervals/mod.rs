//! Stages on the real line and symbolic stages pulled back through probes.

mod probe;
mod real;
mod set;
mod span;

use core::fmt;

pub use probe::{ProbeRange, ScalarEvolution, ScalarProbe};
pub use real::{shell_evolution, sliding_window_evolution, RealEvolution};
pub use set::IntervalSet;
pub use span::{SpanEvolution, SupportVector};

#[derive(Clone, Debug, PartialEq)]
pub enum IntervalError {
    EmptySet,
    BadWindow {
        width: f64,
        step: f64,
    },
    /// A base stage reaches outside the probe's range.
    RangeMismatch {
        stage: u64,
        value: f64,
    },
    ZeroVectorRejected,
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    /// A probe that cannot be surjective: zero coefficients, no points, or size 0.
    ZeroProbe,
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::EmptySet => write!(f, "cannot sample from an empty set"),
            IntervalError::BadWindow { width, step } => {
                write!(
                    f,
                    "window needs 0 < step < width, got width {width}, step {step}"
                )
            }
            IntervalError::RangeMismatch { stage, value } => {
                write!(f, "stage {stage} contains {value}, outside the probe range")
            }
            IntervalError::ZeroVectorRejected => {
                write!(f, "the zero vector is not in the ground set")
            }
            IntervalError::DimensionMismatch { expected, got } => {
                write!(f, "expected a point of dimension {expected}, got {got}")
            }
            IntervalError::ZeroProbe => write!(f, "probe is degenerate and not surjective"),
        }
    }
}

impl core::error::Error for IntervalError {}
