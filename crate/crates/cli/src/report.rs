//! Report documents written to standard output.

use serde::Serialize;
use serde_json::Value;

use evoset_core::axioms::{AxiomReport, Verdict, Violation};
use evoset_core::element::Stage;
use evoset_core::intervals::IntervalSet;

use crate::model::ModelFile;

/// Violations listed in full; the rest are only counted.
pub const VIOLATIONS_SHOWN: usize = 32;

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub name: String,
    pub kind: String,
    pub sha256: String,
}

impl From<&ModelFile> for ModelInfo {
    fn from(model: &ModelFile) -> Self {
        ModelInfo {
            name: model.name.clone(),
            kind: model.kind().to_string(),
            sha256: model.digest.clone(),
        }
    }
}

/// The document printed by every command. Contains no timing, so identical
/// inputs give identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelInfo>,
    pub report: Value,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

/// Size of a set of elements or of a set of reals.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Extent {
    Elements(usize),
    Intervals { parts: usize, length: f64 },
}

pub trait Extents {
    fn extent(&self) -> Extent;
}

impl Extents for Stage {
    fn extent(&self) -> Extent {
        Extent::Elements(self.len())
    }
}

impl Extents for IntervalSet {
    fn extent(&self) -> Extent {
        Extent::Intervals {
            parts: self.parts().len(),
            length: self.measure(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomSummary {
    pub horizon: u64,
    pub verdicts: [Verdict; 4],
    pub coverage: Verdict,
    pub unknown_count: usize,
    pub closed: Extent,
    pub open: Extent,
    pub unseen: Extent,
    pub violation_count: usize,
    pub violations: Value,
}

impl AxiomSummary {
    pub fn new<S: Serialize + Extents>(report: &AxiomReport<S>) -> Self {
        let shown: Vec<&Violation<S>> = report.violations.iter().take(VIOLATIONS_SHOWN).collect();
        AxiomSummary {
            horizon: report.horizon,
            verdicts: report.verdicts,
            coverage: report.coverage,
            unknown_count: report.unknown_count(),
            closed: report.closed.extent(),
            open: report.open.extent(),
            unseen: report.unseen.extent(),
            violation_count: report.violations.len(),
            violations: serde_json::to_value(shown).expect("violations serialize"),
        }
    }

    pub fn has_failure(&self) -> bool {
        self.verdicts.contains(&Verdict::Fail) || self.coverage == Verdict::Fail
    }
}
