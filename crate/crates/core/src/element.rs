//! Ground-set elements and stages.

use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Opaque identifier of a ground-set element.
///
/// Numeric identifiers sort before names; names sort lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementId {
    Num(i64),
    Name(String),
}

impl ElementId {
    pub fn name(s: &str) -> Self {
        ElementId::Name(String::from(s))
    }

    pub fn as_num(&self) -> Option<i64> {
        match self {
            ElementId::Num(n) => Some(*n),
            ElementId::Name(_) => None,
        }
    }
}

impl From<i64> for ElementId {
    fn from(n: i64) -> Self {
        ElementId::Num(n)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId::name(s)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Num(n) => write!(f, "{n}"),
            ElementId::Name(s) => f.write_str(s),
        }
    }
}

/// One stage of an evolution. Iteration order is the `ElementId` order.
pub type Stage = BTreeSet<ElementId>;

/// Builds a stage from any iterator of things convertible to ids.
pub fn stage_of<I, T>(items: I) -> Stage
where
    I: IntoIterator<Item = T>,
    T: Into<ElementId>,
{
    items.into_iter().map(Into::into).collect()
}

/// Numeric stage `{lo, ..., hi}`; empty when `lo > hi`.
pub fn range_stage(lo: i64, hi: i64) -> Stage {
    (lo..=hi).map(ElementId::Num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn numbers_sort_before_names() {
        let mut ids = [
            ElementId::name("b"),
            ElementId::Num(10),
            ElementId::name("a"),
            ElementId::Num(-3),
        ];
        ids.sort();
        let shown: Vec<_> = ids.iter().map(|id| alloc::format!("{id}")).collect();
        assert_eq!(shown, ["-3", "10", "a", "b"]);
    }

    #[test]
    fn range_stage_bounds() {
        assert_eq!(range_stage(1, 4), stage_of([1i64, 2, 3, 4]));
        assert!(range_stage(3, 2).is_empty());
    }
}
