use core::fmt;

use crate::element::ElementId;

/// Which half of a chronology left an index unrealized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapKind {
    Appearance,
    Disappearance,
}

/// A map that was declared bijective but is not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BijectionDefect {
    /// Two distinct elements share an image.
    Collision {
        first: ElementId,
        second: ElementId,
        image: ElementId,
    },
    /// An element of the source has no image, or one of the target has no preimage.
    Gap { element: ElementId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvolutionError {
    ChronologyInfeasible {
        element: ElementId,
        appear: u64,
        disappear: u64,
    },
    /// No element appears at index `index` (appearance gap) or disappears at
    /// `index + 1` (disappearance gap).
    SurjectivityGap {
        index: u64,
        kind: GapKind,
    },
    SurjectivityViolated(ElementId),
    MapUndefined(ElementId),
    NotABijection(BijectionDefect),
    /// A lazy ground was scanned this far without meeting the required index.
    ScanLimit {
        index: u64,
    },
}

impl fmt::Display for EvolutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvolutionError::ChronologyInfeasible {
                element,
                appear,
                disappear,
            } => write!(
                f,
                "chronology infeasible at {element}: A = {appear}, D = {disappear}, need A + 2 <= D"
            ),
            EvolutionError::SurjectivityGap {
                index,
                kind: GapKind::Appearance,
            } => {
                write!(f, "no element appears at index {index}")
            }
            EvolutionError::SurjectivityGap {
                index,
                kind: GapKind::Disappearance,
            } => {
                write!(f, "no element disappears at index {}", index + 1)
            }
            EvolutionError::SurjectivityViolated(e) => {
                write!(f, "ground element {e} has no preimage")
            }
            EvolutionError::MapUndefined(x) => write!(f, "map is undefined at {x}"),
            EvolutionError::NotABijection(BijectionDefect::Collision {
                first,
                second,
                image,
            }) => {
                write!(
                    f,
                    "not a bijection: {first} and {second} both map to {image}"
                )
            }
            EvolutionError::NotABijection(BijectionDefect::Gap { element }) => {
                write!(f, "not a bijection: {element} is unmatched")
            }
            EvolutionError::ScanLimit { index } => {
                write!(f, "scan limit reached while looking for index {index}")
            }
        }
    }
}

impl core::error::Error for EvolutionError {}
