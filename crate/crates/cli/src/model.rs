//! JSON model files and the evolutions they describe.
//!
//! A model file is a JSON object with a `kind` and kind-specific fields,
//! plus two optional top-level blocks:
//!
//! - `measure`: exactly one of `{"geometric": r}`, `{"weights": [[x, w], ...]}`
//!   or `{"carrier": [[lo, hi], ...]}`;
//! - `integrand`: `{"phi": "<descriptor>", "bound": C}` with `bound` optional.
//!
//! Models nested inside another model (`index`, `base`) take no blocks.
//! Every field is checked and errors carry a JSON pointer into the document.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use evoset_core::chronology::{
    from_chronology, Chronology, ChronologySource, Lifespan, MonotoneChronology,
};
use evoset_core::element::{ElementId, Stage};
use evoset_core::evolution::{Evolution, Ground};
use evoset_core::genealogy::{
    generational_evolution, prime_model, GenealogyModel, GenerationTrace,
};
use evoset_core::intervals::{
    shell_evolution, sliding_window_evolution, IntervalSet, RealEvolution, ScalarEvolution,
    ScalarProbe, SpanEvolution,
};
use evoset_core::maps::{FiniteMap, GroundMap};
use evoset_core::measure::{
    atom_augmented_evolution, construct_convergent_evolution, ArithmeticAtoms, AtomFamily,
    ConvergentConstruction, DiscreteMeasure, Integrand, LebesgueModel,
};

use crate::error::CliError;

/// Most elements (or interval parts) an explicit-stages model may list.
pub const MAX_LISTED: usize = 1_000_000;
/// Largest bound accepted by `prime-genealogy`.
pub const MAX_PRIME_BOUND: u64 = 1_000_000;
/// Largest horizon accepted by `lebesgue-convergent`.
pub const MAX_CONVERGENT_HORIZON: u64 = 100_000;

pub const KINDS: [&str; 11] = [
    "example-square",
    "chronology",
    "sliding-window",
    "shell",
    "scalar-pullback",
    "span",
    "genealogy",
    "prime-genealogy",
    "atom-augmented",
    "lebesgue-convergent",
    "explicit-stages",
];

pub const BUILTINS: [&str; 4] = [
    "example-square",
    "toy-genealogy",
    "geom-pair",
    "prime-genealogy",
];

/// The document behind a built-in model name.
pub fn builtin(name: &str) -> Option<Value> {
    let doc = match name {
        "example-square" => json!({"kind": "example-square"}),
        "toy-genealogy" => json!({
            "kind": "genealogy",
            "elements": ["m1", "f1", "m2", "f2", "m3", "f3"],
            "males": ["m1", "m2", "m3"],
            "females": ["f1", "f2", "f3"],
            "marriages": [["m1", "f1"], ["m2", "f2"], ["m3", "f3"]],
            "reproduction": [["m2", "f1"], ["f2", "f1"], ["m3", "f2"], ["f3", "f2"]]
        }),
        "geom-pair" => json!({
            "kind": "chronology",
            "period": 1,
            "lifespan": 2,
            "measure": {"geometric": 0.5}
        }),
        "prime-genealogy" => json!({"kind": "prime-genealogy", "bound": 100}),
        _ => return None,
    };
    Some(doc)
}

#[derive(Clone, Debug)]
pub enum MeasureSpec {
    Discrete(DiscreteMeasure),
    /// Lebesgue measure restricted to a carrier of length 1.
    Carrier(IntervalSet),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandBlock {
    pub phi: Integrand,
    #[serde(default)]
    pub bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum ChronologySpec {
    Entries(Chronology),
    Periodic { period: u64, lifespan: u64 },
}

#[derive(Clone, Debug)]
pub enum AtomSpec {
    Arithmetic(ArithmeticAtoms),
    Listed {
        atoms: Vec<Stage>,
        map: Vec<(ElementId, ElementId)>,
    },
}

#[derive(Clone, Debug)]
pub struct FounderSpec {
    pub males: Stage,
    pub females: Stage,
}

#[derive(Clone, Debug)]
pub enum ModelSpec {
    ExampleSquare,
    Chronology {
        source: ChronologySpec,
        check_horizon: Option<u64>,
    },
    SlidingWindow {
        width: f64,
        step: f64,
    },
    Shell {
        index: Box<ModelSpec>,
    },
    ScalarPullback {
        probe: ScalarProbe,
        base: Box<ModelSpec>,
    },
    Span {
        index: Box<ModelSpec>,
    },
    Genealogy {
        model: GenealogyModel,
        founders: Option<FounderSpec>,
    },
    PrimeGenealogy {
        bound: u64,
        founders: Option<FounderSpec>,
    },
    AtomAugmented {
        base: Box<ModelSpec>,
        atoms: AtomSpec,
    },
    LebesgueConvergent {
        phi: Integrand,
        tol: f64,
        horizon: u64,
    },
    ExplicitStages {
        ground: Option<Stage>,
        stages: Vec<Stage>,
    },
    ExplicitIntervals {
        ground: Option<IntervalSet>,
        stages: Vec<IntervalSet>,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::ExampleSquare => "example-square",
            ModelSpec::Chronology { .. } => "chronology",
            ModelSpec::SlidingWindow { .. } => "sliding-window",
            ModelSpec::Shell { .. } => "shell",
            ModelSpec::ScalarPullback { .. } => "scalar-pullback",
            ModelSpec::Span { .. } => "span",
            ModelSpec::Genealogy { .. } => "genealogy",
            ModelSpec::PrimeGenealogy { .. } => "prime-genealogy",
            ModelSpec::AtomAugmented { .. } => "atom-augmented",
            ModelSpec::LebesgueConvergent { .. } => "lebesgue-convergent",
            ModelSpec::ExplicitStages { .. } | ModelSpec::ExplicitIntervals { .. } => {
                "explicit-stages"
            }
        }
    }
}

/// A validated model file.
#[derive(Clone, Debug)]
pub struct ModelFile {
    /// The path or built-in name it was loaded from.
    pub name: String,
    /// Lowercase hex SHA-256 of the canonical (sorted-key, compact) document.
    pub digest: String,
    pub spec: ModelSpec,
    pub measure: Option<MeasureSpec>,
    pub integrand: Option<IntegrandBlock>,
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        self.spec.kind()
    }
}

/// Loads a model from a file, falling back to the built-in names.
pub fn load_model(arg: &str) -> Result<ModelFile, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return parse_model(path);
    }
    match builtin(arg) {
        Some(doc) => parse_document(arg, doc),
        None => Err(CliError::ModelNotFound(arg.to_string())),
    }
}

pub fn parse_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_str(&path.display().to_string(), &text)
}

pub fn parse_str(name: &str, text: &str) -> Result<ModelFile, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        CliError::schema(
            "",
            format!(
                "invalid JSON at line {} column {}: {e}",
                e.line(),
                e.column()
            ),
        )
    })?;
    parse_document(name, doc)
}

pub fn parse_document(name: &str, doc: Value) -> Result<ModelFile, CliError> {
    let digest = hex::encode(Sha256::digest(
        serde_json::to_vec(&doc).expect("JSON values serialize"),
    ));
    let Value::Object(mut map) = doc else {
        return Err(CliError::schema("", "a model must be a JSON object"));
    };
    let measure = map
        .remove("measure")
        .map(|v| parse_measure(v, "/measure"))
        .transpose()?;
    let integrand = map
        .remove("integrand")
        .map(|v| fields::<IntegrandBlock>(v, "/integrand"))
        .transpose()?;
    let spec = parse_spec(Value::Object(map), "")?;
    Ok(ModelFile {
        name: name.to_string(),
        digest,
        spec,
        measure,
        integrand,
    })
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(prefix: &str, path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = prefix.to_string();
    for segment in path.iter() {
        match segment {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", escape(key))),
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

fn fields<T: DeserializeOwned>(value: Value, pointer: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let at = pointer_of(pointer, e.path());
        CliError::schema(at, e.into_inner().to_string())
    })
}

fn at(pointer: &str, field: &str) -> String {
    format!("{pointer}/{}", escape(field))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFields {
    geometric: Option<f64>,
    weights: Option<Vec<(ElementId, f64)>>,
    carrier: Option<Vec<[f64; 2]>>,
}

fn parse_measure(value: Value, pointer: &str) -> Result<MeasureSpec, CliError> {
    let m: MeasureFields = fields(value, pointer)?;
    match (m.geometric, m.weights, m.carrier) {
        (Some(r), None, None) => DiscreteMeasure::geometric(r)
            .map(MeasureSpec::Discrete)
            .map_err(|e| CliError::schema(at(pointer, "geometric"), e.to_string())),
        (None, Some(pairs), None) => {
            let mut table = BTreeMap::new();
            for (i, (x, w)) in pairs.into_iter().enumerate() {
                if table.insert(x.clone(), w).is_some() {
                    return Err(CliError::schema(
                        format!("{pointer}/weights/{i}"),
                        format!("duplicate weight for {x}"),
                    ));
                }
            }
            DiscreteMeasure::table(table)
                .map(MeasureSpec::Discrete)
                .map_err(|e| CliError::schema(at(pointer, "weights"), e.to_string()))
        }
        (None, None, Some(parts)) => {
            let carrier = IntervalSet::from_parts(parts);
            if (carrier.measure() - 1.0).abs() > evoset_core::measure::MEASURE_TOLERANCE {
                return Err(CliError::schema(
                    at(pointer, "carrier"),
                    format!("carrier has length {}, not 1", carrier.measure()),
                ));
            }
            Ok(MeasureSpec::Carrier(carrier))
        }
        _ => Err(CliError::schema(
            pointer,
            "expected exactly one of `geometric`, `weights`, `carrier`",
        )),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoFields {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChronologyFields {
    entries: Option<Vec<(ElementId, u64, u64)>>,
    period: Option<u64>,
    lifespan: Option<u64>,
    check_horizon: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowFields {
    width: f64,
    step: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexFields {
    index: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PullbackFields {
    probe: ScalarProbe,
    base: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Founders {
    males: Vec<ElementId>,
    females: Vec<ElementId>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenealogyFields {
    elements: Vec<ElementId>,
    males: Vec<ElementId>,
    females: Vec<ElementId>,
    #[serde(default)]
    marriages: Vec<(ElementId, ElementId)>,
    #[serde(default)]
    reproduction: Vec<(ElementId, ElementId)>,
    founders: Option<Founders>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimeFields {
    bound: u64,
    founders: Option<Founders>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFields {
    first: Option<i64>,
    stride: Option<i64>,
    listed: Option<Vec<Vec<ElementId>>>,
    map: Option<Vec<(ElementId, ElementId)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AugmentedFields {
    base: Value,
    atoms: AtomFields,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergentFields {
    phi: Integrand,
    tol: f64,
    horizon: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitFields {
    stages: Option<Vec<Vec<ElementId>>>,
    intervals: Option<Vec<Vec<[f64; 2]>>>,
    ground: Option<Value>,
}

fn unique(items: Vec<ElementId>, pointer: &str) -> Result<Stage, CliError> {
    let mut out = Stage::new();
    for (i, x) in items.into_iter().enumerate() {
        if !out.insert(x.clone()) {
            return Err(CliError::schema(
                format!("{pointer}/{i}"),
                format!("{x} is listed twice"),
            ));
        }
    }
    Ok(out)
}

fn keyed(
    pairs: Vec<(ElementId, ElementId)>,
    pointer: &str,
) -> Result<BTreeMap<ElementId, ElementId>, CliError> {
    let mut out = BTreeMap::new();
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        if out.insert(a.clone(), b).is_some() {
            return Err(CliError::schema(
                format!("{pointer}/{i}"),
                format!("{a} appears twice"),
            ));
        }
    }
    Ok(out)
}

fn founders(f: Option<Founders>, pointer: &str) -> Result<Option<FounderSpec>, CliError> {
    f.map(|f| {
        Ok(FounderSpec {
            males: unique(f.males, &format!("{pointer}/founders/males"))?,
            females: unique(f.females, &format!("{pointer}/founders/females"))?,
        })
    })
    .transpose()
}

fn parse_spec(value: Value, pointer: &str) -> Result<ModelSpec, CliError> {
    let Value::Object(mut map) = value else {
        return Err(CliError::schema(pointer, "a model must be a JSON object"));
    };
    let kind = match map.remove("kind") {
        Some(Value::String(kind)) => kind,
        Some(_) => {
            return Err(CliError::schema(
                at(pointer, "kind"),
                "`kind` must be a string",
            ))
        }
        None => {
            return Err(CliError::schema(
                at(pointer, "kind"),
                "missing field `kind`",
            ))
        }
    };
    let rest = Value::Object(map);
    let spec = match kind.as_str() {
        "example-square" => {
            fields::<NoFields>(rest, pointer)?;
            ModelSpec::ExampleSquare
        }
        "chronology" => {
            let f: ChronologyFields = fields(rest, pointer)?;
            let source = match (f.entries, f.period, f.lifespan) {
                (Some(entries), None, None) => {
                    let mut chron = Chronology::default();
                    for (i, (x, a, d)) in entries.into_iter().enumerate() {
                        if chron.get(&x).is_some() {
                            return Err(CliError::schema(
                                format!("{pointer}/entries/{i}"),
                                format!("{x} is listed twice"),
                            ));
                        }
                        chron.insert(x, Lifespan::new(a, d));
                    }
                    ChronologySpec::Entries(chron)
                }
                (None, Some(period), Some(lifespan)) => {
                    if period == 0 {
                        return Err(CliError::schema(
                            at(pointer, "period"),
                            "period must be at least 1",
                        ));
                    }
                    if lifespan < 2 {
                        return Err(CliError::schema(
                            at(pointer, "lifespan"),
                            "lifespan must be at least 2",
                        ));
                    }
                    ChronologySpec::Periodic { period, lifespan }
                }
                _ => {
                    return Err(CliError::schema(
                        pointer,
                        "expected either `entries` or both `period` and `lifespan`",
                    ))
                }
            };
            ModelSpec::Chronology {
                source,
                check_horizon: f.check_horizon,
            }
        }
        "sliding-window" => {
            let f: WindowFields = fields(rest, pointer)?;
            ModelSpec::SlidingWindow {
                width: f.width,
                step: f.step,
            }
        }
        "shell" => {
            let f: IndexFields = fields(rest, pointer)?;
            ModelSpec::Shell {
                index: Box::new(parse_spec(f.index, &at(pointer, "index"))?),
            }
        }
        "span" => {
            let f: IndexFields = fields(rest, pointer)?;
            ModelSpec::Span {
                index: Box::new(parse_spec(f.index, &at(pointer, "index"))?),
            }
        }
        "scalar-pullback" => {
            let f: PullbackFields = fields(rest, pointer)?;
            f.probe
                .validate()
                .map_err(|e| CliError::schema(at(pointer, "probe"), e.to_string()))?;
            ModelSpec::ScalarPullback {
                probe: f.probe,
                base: Box::new(parse_spec(f.base, &at(pointer, "base"))?),
            }
        }
        "genealogy" => {
            let f: GenealogyFields = fields(rest, pointer)?;
            let model = GenealogyModel::new(
                unique(f.elements, &at(pointer, "elements"))?,
                unique(f.males, &at(pointer, "males"))?,
                unique(f.females, &at(pointer, "females"))?,
                keyed(f.marriages, &at(pointer, "marriages"))?,
                keyed(f.reproduction, &at(pointer, "reproduction"))?,
            )
            .map_err(|e| CliError::schema(pointer, e.to_string()))?;
            ModelSpec::Genealogy {
                model,
                founders: founders(f.founders, pointer)?,
            }
        }
        "prime-genealogy" => {
            let f: PrimeFields = fields(rest, pointer)?;
            if f.bound < 2 || f.bound > MAX_PRIME_BOUND {
                return Err(CliError::schema(
                    at(pointer, "bound"),
                    format!("bound must lie in 2..={MAX_PRIME_BOUND}"),
                ));
            }
            ModelSpec::PrimeGenealogy {
                bound: f.bound,
                founders: founders(f.founders, pointer)?,
            }
        }
        "atom-augmented" => {
            let f: AugmentedFields = fields(rest, pointer)?;
            let base = Box::new(parse_spec(f.base, &at(pointer, "base"))?);
            let a = f.atoms;
            let atoms_at = at(pointer, "atoms");
            let atoms = match (a.first, a.stride, a.listed, a.map) {
                (Some(first), Some(stride), None, None) => {
                    if stride < 2 || first < 0 {
                        return Err(CliError::schema(
                            atoms_at,
                            "arithmetic atoms need stride >= 2 and first >= 0",
                        ));
                    }
                    AtomSpec::Arithmetic(ArithmeticAtoms { first, stride })
                }
                (None, None, Some(listed), Some(map)) => AtomSpec::Listed {
                    atoms: listed
                        .into_iter()
                        .map(|atom| atom.into_iter().collect())
                        .collect(),
                    map,
                },
                _ => {
                    return Err(CliError::schema(
                        atoms_at,
                        "expected `first` and `stride`, or `listed` and `map`",
                    ))
                }
            };
            ModelSpec::AtomAugmented { base, atoms }
        }
        "lebesgue-convergent" => {
            let f: ConvergentFields = fields(rest, pointer)?;
            if !(f.tol > 0.0) {
                return Err(CliError::schema(
                    at(pointer, "tol"),
                    "tolerance must be positive",
                ));
            }
            if f.horizon < 3 || f.horizon > MAX_CONVERGENT_HORIZON {
                return Err(CliError::schema(
                    at(pointer, "horizon"),
                    format!("horizon must lie in 3..={MAX_CONVERGENT_HORIZON}"),
                ));
            }
            ModelSpec::LebesgueConvergent {
                phi: f.phi,
                tol: f.tol,
                horizon: f.horizon,
            }
        }
        "explicit-stages" => parse_explicit(fields(rest, pointer)?, pointer)?,
        _ => return Err(CliError::UnknownKind(kind)),
    };
    Ok(spec)
}

fn parse_explicit(f: ExplicitFields, pointer: &str) -> Result<ModelSpec, CliError> {
    let ground_at = at(pointer, "ground");
    match (f.stages, f.intervals) {
        (Some(stages), None) => {
            let listed: usize = stages.iter().map(Vec::len).sum();
            if listed > MAX_LISTED {
                return Err(CliError::schema(
                    at(pointer, "stages"),
                    format!("{listed} elements listed, at most {MAX_LISTED} allowed"),
                ));
            }
            let ground = f
                .ground
                .map(|g| fields::<Vec<ElementId>>(g, &ground_at))
                .transpose()?;
            let ground = ground.map(|g| unique(g, &ground_at)).transpose()?;
            if let Some(ground) = &ground {
                for (i, stage) in stages.iter().enumerate() {
                    if let Some(j) = stage.iter().position(|x| !ground.contains(x)) {
                        return Err(CliError::schema(
                            format!("{pointer}/stages/{i}/{j}"),
                            format!("{} is not in the ground", stage[j]),
                        ));
                    }
                }
            }
            Ok(ModelSpec::ExplicitStages {
                ground,
                stages: stages
                    .into_iter()
                    .map(|s| s.into_iter().collect())
                    .collect(),
            })
        }
        (None, Some(intervals)) => {
            let listed: usize = intervals.iter().map(Vec::len).sum();
            if listed > MAX_LISTED {
                return Err(CliError::schema(
                    at(pointer, "intervals"),
                    format!("{listed} parts listed, at most {MAX_LISTED} allowed"),
                ));
            }
            let ground = f
                .ground
                .map(|g| fields::<Vec<[f64; 2]>>(g, &ground_at))
                .transpose()?
                .map(IntervalSet::from_parts);
            let stages: Vec<IntervalSet> =
                intervals.into_iter().map(IntervalSet::from_parts).collect();
            if let Some(ground) = &ground {
                if let Some(i) = stages.iter().position(|s| !s.is_subset(ground)) {
                    return Err(CliError::schema(
                        format!("{pointer}/intervals/{i}"),
                        "stage leaves the ground",
                    ));
                }
            }
            Ok(ModelSpec::ExplicitIntervals { ground, stages })
        }
        _ => Err(CliError::schema(
            pointer,
            "expected exactly one of `stages`, `intervals`",
        )),
    }
}

/// The stage family a model evaluates to.
#[derive(Clone, Debug)]
pub enum Stages {
    Discrete(Evolution),
    Real(RealEvolution),
    Scalar(ScalarEvolution),
    Span(SpanEvolution),
}

#[derive(Clone, Debug)]
pub struct GenealogyRun {
    pub model: GenealogyModel,
    pub trace: GenerationTrace,
}

/// A model evaluated for a given horizon.
#[derive(Clone, Debug)]
pub struct Built {
    pub stages: Stages,
    pub genealogy: Option<GenealogyRun>,
    pub convergence: Option<ConvergentConstruction>,
    pub measure: Option<MeasureSpec>,
    pub integrand: Option<IntegrandBlock>,
}

impl Built {
    pub fn lebesgue(&self) -> Result<Option<LebesgueModel>, CliError> {
        if let Some(c) = &self.convergence {
            return Ok(Some(c.model.clone()));
        }
        match (&self.stages, &self.measure) {
            (Stages::Real(real), Some(MeasureSpec::Carrier(carrier))) => {
                Ok(Some(LebesgueModel::new(carrier.clone(), real.clone())?))
            }
            _ => Ok(None),
        }
    }

    pub fn discrete_measure(&self) -> Option<&DiscreteMeasure> {
        match &self.measure {
            Some(MeasureSpec::Discrete(mu)) => Some(mu),
            _ => None,
        }
    }
}

struct Node {
    stages: Stages,
    genealogy: Option<GenealogyRun>,
    convergence: Option<ConvergentConstruction>,
}

impl Node {
    fn plain(stages: Stages) -> Self {
        Node {
            stages,
            genealogy: None,
            convergence: None,
        }
    }
}

fn discrete(node: Node, kind: &str, role: &str) -> Result<Evolution, CliError> {
    match node.stages {
        Stages::Discrete(evo) => Ok(evo),
        _ => Err(CliError::Invalid(format!(
            "{role} must be an enumerated model, got `{kind}`"
        ))),
    }
}

pub fn build(model: &ModelFile, horizon: u64) -> Result<Built, CliError> {
    let node = build_spec(&model.spec, horizon, model.measure.as_ref())?;
    match (&node.stages, &model.measure) {
        (Stages::Discrete(evo), Some(MeasureSpec::Discrete(mu))) => {
            mu.check_ground(evo.ground())?
        }
        (Stages::Real(_), Some(MeasureSpec::Carrier(_))) if node.convergence.is_none() => {}
        (_, None) => {}
        _ => {
            return Err(CliError::Invalid(format!(
                "the measure block does not fit a `{}` model",
                model.kind()
            )))
        }
    }
    let mut measure = model.measure.clone();
    let mut integrand = model.integrand.clone();
    if let (Some(c), ModelSpec::LebesgueConvergent { phi, .. }) = (&node.convergence, &model.spec) {
        measure = Some(MeasureSpec::Carrier(c.model.carrier().clone()));
        integrand = integrand.or(Some(IntegrandBlock {
            phi: phi.clone(),
            bound: None,
        }));
    }
    Ok(Built {
        stages: node.stages,
        genealogy: node.genealogy,
        convergence: node.convergence,
        measure,
        integrand,
    })
}

fn genealogy_node(
    model: GenealogyModel,
    founders: &Option<FounderSpec>,
    horizon: u64,
) -> Result<Node, CliError> {
    let (males, females) = match founders {
        Some(f) => (f.males.clone(), f.females.clone()),
        None => model.founders(),
    };
    let (trace, evo) = generational_evolution(&model, &males, &females, horizon)?;
    Ok(Node {
        stages: Stages::Discrete(evo),
        genealogy: Some(GenealogyRun { model, trace }),
        convergence: None,
    })
}

fn build_spec(
    spec: &ModelSpec,
    horizon: u64,
    measure: Option<&MeasureSpec>,
) -> Result<Node, CliError> {
    let node = match spec {
        ModelSpec::ExampleSquare => Node::plain(Stages::Discrete(Evolution::example_square())),
        ModelSpec::Chronology {
            source,
            check_horizon,
        } => {
            let source = match source {
                ChronologySpec::Entries(chron) => ChronologySource::Finite(chron.clone()),
                ChronologySpec::Periodic { period, lifespan } => {
                    ChronologySource::Monotone(MonotoneChronology::periodic(*period, *lifespan))
                }
            };
            Node::plain(Stages::Discrete(from_chronology(
                source,
                check_horizon.unwrap_or(horizon),
            )?))
        }
        ModelSpec::SlidingWindow { width, step } => {
            Node::plain(Stages::Real(sliding_window_evolution(*width, *step)?))
        }
        ModelSpec::Shell { index } => {
            let evo = discrete(
                build_spec(index, horizon, None)?,
                index.kind(),
                "a shell index",
            )?;
            Node::plain(Stages::Real(shell_evolution(evo)))
        }
        ModelSpec::Span { index } => {
            let evo = discrete(
                build_spec(index, horizon, None)?,
                index.kind(),
                "a span index",
            )?;
            Node::plain(Stages::Span(SpanEvolution::new(evo)))
        }
        ModelSpec::ScalarPullback { probe, base } => {
            let real = match build_spec(base, horizon, None)?.stages {
                Stages::Real(real) => real,
                _ => {
                    return Err(CliError::Invalid(format!(
                        "a pullback base must be an interval model, got `{}`",
                        base.kind()
                    )))
                }
            };
            Node::plain(Stages::Scalar(ScalarEvolution::new(
                probe.clone(),
                real,
                horizon,
            )?))
        }
        ModelSpec::Genealogy { model, founders } => {
            genealogy_node(model.clone(), founders, horizon)?
        }
        ModelSpec::PrimeGenealogy { bound, founders } => {
            genealogy_node(prime_model(*bound), founders, horizon)?
        }
        ModelSpec::AtomAugmented { base, atoms } => {
            let Some(MeasureSpec::Discrete(mu)) = measure else {
                return Err(CliError::Invalid(
                    "atom-augmented models need a `weights` or `geometric` measure".into(),
                ));
            };
            let evo = discrete(
                build_spec(base, horizon, None)?,
                base.kind(),
                "an augmented base",
            )?;
            let (ground, family, map): (Ground, AtomFamily, Arc<dyn GroundMap>) = match atoms {
                AtomSpec::Arithmetic(a) => (
                    Ground::naturals(),
                    AtomFamily::Arithmetic(*a),
                    Arc::new(a.complement_map()?),
                ),
                AtomSpec::Listed { atoms, map } => {
                    let mut ground: BTreeSet<ElementId> =
                        map.iter().map(|(x, _)| x.clone()).collect();
                    ground.extend(atoms.iter().flatten().cloned());
                    let f = FiniteMap::new(map.iter().cloned());
                    (
                        Ground::Finite(ground),
                        AtomFamily::Listed(atoms.clone()),
                        Arc::new(f),
                    )
                }
            };
            let augmented = atom_augmented_evolution(ground, &evo, family, map, mu, horizon)?;
            Node::plain(Stages::Discrete(augmented.evolution))
        }
        ModelSpec::LebesgueConvergent { phi, tol, horizon } => {
            let construction = construct_convergent_evolution(phi, *tol, *horizon)?;
            Node {
                stages: Stages::Real(construction.model.stages().clone()),
                genealogy: None,
                convergence: Some(construction),
            }
        }
        ModelSpec::ExplicitStages { ground, stages } => {
            Node::plain(Stages::Discrete(match ground {
                Some(g) => Evolution::explicit(Ground::Finite(g.clone()), stages.clone()),
                None => Evolution::explicit_over_union(stages.clone()),
            }))
        }
        ModelSpec::ExplicitIntervals { ground, stages } => {
            let ground = ground.clone().unwrap_or_else(|| {
                stages
                    .iter()
                    .fold(IntervalSet::empty(), |acc, s| acc.union(s))
            });
            Node::plain(Stages::Real(RealEvolution::explicit(
                ground,
                stages.clone(),
            )))
        }
    };
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use evoset_core::genealogy::toy_three_generation;

    fn parse(text: &str) -> Result<ModelFile, CliError> {
        parse_str("test", text)
    }

    fn schema_pointer(text: &str) -> String {
        match parse(text) {
            Err(CliError::Schema { pointer, .. }) => pointer,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn builtins_parse() {
        for name in BUILTINS {
            let model = load_model(name).unwrap();
            assert_eq!(model.name, name);
            assert_eq!(model.digest.len(), 64);
        }
        assert_eq!(
            load_model("example-square").unwrap().kind(),
            "example-square"
        );
        assert_eq!(load_model("geom-pair").unwrap().kind(), "chronology");
    }

    #[test]
    fn toy_builtin_matches_the_core_model() {
        match load_model("toy-genealogy").unwrap().spec {
            ModelSpec::Genealogy {
                model,
                founders: None,
            } => assert_eq!(model, toy_three_generation()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prime_model_kind() {
        let model = parse(r#"{"kind":"prime-genealogy","bound":100}"#).unwrap();
        assert!(matches!(
            model.spec,
            ModelSpec::PrimeGenealogy {
                bound: 100,
                founders: None
            }
        ));
    }

    #[test]
    fn unknown_kind() {
        assert!(
            matches!(parse(r#"{"kind":"nope"}"#), Err(CliError::UnknownKind(k)) if k == "nope")
        );
        assert!(matches!(
            parse(r#"{"kind":"shell","index":{"kind":"nope"}}"#),
            Err(CliError::UnknownKind(_))
        ));
    }

    #[test]
    fn schema_errors_point_into_the_document() {
        assert_eq!(schema_pointer(r#"{}"#), "/kind");
        assert_eq!(
            schema_pointer(r#"{"kind":"sliding-window","width":"x","step":1}"#),
            "/width"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"chronology","entries":[[0,0,2],[1,1,"x"]]}"#),
            "/entries/1/2"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"shell","index":{"kind":"example-square","extra":1}}"#),
            "/index/extra"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"example-square","measure":{"geometric":2}}"#),
            "/measure/geometric"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"example-square","integrand":{"phi":"sin:1"}}"#),
            "/integrand/phi"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"explicit-stages","ground":[1,2],"stages":[[1],[2,3]]}"#),
            "/stages/1/1"
        );
        assert_eq!(
            schema_pointer(r#"{"kind":"prime-genealogy","bound":1}"#),
            "/bound"
        );
        assert_eq!(schema_pointer("[1]"), "");
        assert_eq!(schema_pointer("{"), "");
    }

    #[test]
    fn digest_ignores_key_order_and_whitespace() {
        let a = parse(r#"{"kind":"sliding-window","width":2,"step":1}"#).unwrap();
        let b = parse("{ \"step\": 1,\n \"width\": 2, \"kind\": \"sliding-window\" }").unwrap();
        assert_eq!(a.digest, b.digest);
        let c = parse(r#"{"kind":"sliding-window","width":3,"step":1}"#).unwrap();
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn geom_pair_builds_pairs() {
        let built = build(&load_model("geom-pair").unwrap(), 8).unwrap();
        let Stages::Discrete(evo) = &built.stages else {
            panic!()
        };
        assert_eq!(*evo.stage(1), evoset_core::element::stage_of([0i64, 1]));
        assert_eq!(*evo.stage(5), evoset_core::element::stage_of([4i64, 5]));
        assert!(built.discrete_measure().is_some());
    }

    #[test]
    fn measure_must_fit_the_model() {
        let model =
            parse(r#"{"kind":"sliding-window","width":2,"step":1,"measure":{"geometric":0.5}}"#)
                .unwrap();
        assert!(matches!(build(&model, 8), Err(CliError::Invalid(_))));
        let model = parse(r#"{"kind":"example-square","measure":{"carrier":[[0,1]]}}"#).unwrap();
        assert!(matches!(build(&model, 8), Err(CliError::Invalid(_))));
        let model =
            parse(r#"{"kind":"explicit-stages","stages":[["a"]],"measure":{"geometric":0.5}}"#)
                .unwrap();
        assert!(matches!(build(&model, 8), Err(CliError::Measure(_))));
    }

    #[test]
    fn nested_models() {
        let span =
            parse(r#"{"kind":"span","index":{"kind":"chronology","period":1,"lifespan":2}}"#)
                .unwrap();
        assert!(matches!(build(&span, 8).unwrap().stages, Stages::Span(_)));
        let pull = parse(
            r#"{"kind":"scalar-pullback","probe":{"probe":"linear","coefficients":[1,1]},
                "base":{"kind":"sliding-window","width":2,"step":1}}"#,
        )
        .unwrap();
        assert!(matches!(build(&pull, 8).unwrap().stages, Stages::Scalar(_)));
        let bad = parse(r#"{"kind":"shell","index":{"kind":"sliding-window","width":2,"step":1}}"#)
            .unwrap();
        assert!(matches!(build(&bad, 8), Err(CliError::Invalid(_))));
    }

    #[test]
    fn atom_augmented_arithmetic() {
        let model = parse(
            r#"{"kind":"atom-augmented","base":{"kind":"chronology","period":1,"lifespan":2},
                "atoms":{"first":2,"stride":3},"measure":{"geometric":0.5}}"#,
        )
        .unwrap();
        let built = build(&model, 16).unwrap();
        let Stages::Discrete(evo) = built.stages else {
            panic!()
        };
        assert_eq!(*evo.stage(1), evoset_core::element::stage_of([0i64, 1, 2]));
        let missing = parse(r#"{"kind":"atom-augmented","base":{"kind":"example-square"},"atoms":{"first":2,"stride":3}}"#).unwrap();
        assert!(matches!(build(&missing, 8), Err(CliError::Invalid(_))));
    }

    #[test]
    fn explicit_element_cap() {
        let stage: Vec<u32> = (0..1001).collect();
        let stages: Vec<&Vec<u32>> = std::iter::repeat_n(&stage, 1000).collect();
        let text =
            serde_json::to_string(&json!({"kind": "explicit-stages", "stages": stages})).unwrap();
        assert_eq!(schema_pointer(&text), "/stages");
    }
}
