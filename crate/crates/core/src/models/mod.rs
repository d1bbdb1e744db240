//! Model types and their per-cell components.
//!
//! Every model computed over a cube exposes its output as components: one
//! element per cube cell, in the cube's canonical cell order. Bitmap
//! components (and label columns with a focal label) define core cells, which
//! is what the highlight machinery competes over.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::cube::{num, Cube};
use crate::error::{Error, Result};

pub mod benchmark;
pub mod correlation;
pub mod inform;
pub mod kmeans;
pub mod kpi;
pub mod outliers;
pub mod regression;
pub mod stats;
pub mod timeseries;
pub mod topk;
pub mod variance;

pub use benchmark::{benchmark_discrepancy, benchmark_values};
pub use correlation::correlation;
pub use inform::{inform_scores, kl_to_uniform};
pub use kmeans::kmeans;
pub use kpi::{kpi, KpiRule, KpiRules};
pub use outliers::outliers;
pub use regression::regression;
pub use timeseries::{ar_predict, ts_decompose};
pub use topk::topk_rank;
pub use variance::variance_test;

#[derive(Debug, Clone, PartialEq)]
pub enum Elements {
    Numeric(Vec<f64>),
    Bitmap(Vec<bool>),
    Label(Vec<String>),
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Numeric(v) => v.len(),
            Elements::Bitmap(v) => v.len(),
            Elements::Label(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn numeric(&self) -> Option<&[f64]> {
        match self {
            Elements::Numeric(v) => Some(v),
            _ => None,
        }
    }

    pub fn bitmap(&self) -> Option<&[bool]> {
        match self {
            Elements::Bitmap(v) => Some(v),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Elements::Numeric(v) => Value::Array(v.iter().map(|x| num(*x)).collect()),
            Elements::Bitmap(v) => Value::Array(v.iter().map(|b| json!(u8::from(*b))).collect()),
            Elements::Label(v) => json!(v),
        }
    }

    /// Display string of element `i`.
    pub fn display(&self, i: usize) -> String {
        match self {
            Elements::Numeric(v) => crate::cube::fmt_num(v[i]),
            Elements::Bitmap(v) => u8::from(v[i]).to_string(),
            Elements::Label(v) => v[i].clone(),
        }
    }
}

/// Rule selecting the core elements of a component.
#[derive(Debug, Clone, PartialEq)]
pub enum CorePredicate {
    /// Bitmap elements equal to 1.
    Ones,
    /// Label elements equal to the focal label.
    Label(String),
    /// Descriptive column; never a highlight candidate.
    Nothing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub elements: Elements,
    pub core: CorePredicate,
}

impl Component {
    pub fn numeric(name: &str, v: Vec<f64>) -> Self {
        Component {
            name: name.to_string(),
            elements: Elements::Numeric(v),
            core: CorePredicate::Nothing,
        }
    }

    pub fn bitmap(name: &str, v: Vec<bool>) -> Self {
        Component {
            name: name.to_string(),
            elements: Elements::Bitmap(v),
            core: CorePredicate::Ones,
        }
    }

    pub fn label(name: &str, v: Vec<String>) -> Self {
        Component {
            name: name.to_string(),
            elements: Elements::Label(v),
            core: CorePredicate::Nothing,
        }
    }

    pub fn is_candidate(&self) -> bool {
        self.core != CorePredicate::Nothing
    }

    /// Positions of the core cells, through the element-to-cell bijection.
    pub fn core_cells(&self) -> Vec<usize> {
        match (&self.core, &self.elements) {
            (CorePredicate::Ones, Elements::Bitmap(v)) => (0..v.len()).filter(|&i| v[i]).collect(),
            (CorePredicate::Label(l), Elements::Label(v)) => (0..v.len()).filter(|&i| &v[i] == l).collect(),
            _ => Vec::new(),
        }
    }

    fn core_json(&self) -> Value {
        match &self.core {
            CorePredicate::Ones => json!("element = 1"),
            CorePredicate::Label(l) => json!(format!("element = '{l}'")),
            CorePredicate::Nothing => Value::Null,
        }
    }
}

/// A set of antagonistic components competing for the highlight.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub name: String,
    pub members: Vec<usize>,
    /// Members sum element-wise to 1.
    pub partitioning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub model_type: String,
    pub binding: BTreeMap<String, String>,
    pub characterization: Map<String, Value>,
    pub components: Vec<Component>,
    pub families: Vec<Family>,
}

impl Model {
    pub fn new(model_type: &str, cube: &Cube, measure: &str) -> Self {
        let mut binding = BTreeMap::new();
        binding.insert("cube".to_string(), cube.name.clone());
        binding.insert("measure".to_string(), measure.to_string());
        Model {
            model_type: model_type.to_string(),
            binding,
            characterization: Map::new(),
            components: Vec::new(),
            families: Vec::new(),
        }
    }

    pub fn bind(mut self, key: &str, value: impl ToString) -> Self {
        self.binding.insert(key.to_string(), value.to_string());
        self
    }

    pub fn characterize(&mut self, key: &str, v: Value) {
        self.characterization.insert(key.to_string(), v);
    }

    pub fn push(&mut self, c: Component) -> usize {
        self.components.push(c);
        self.components.len() - 1
    }

    pub fn family(&mut self, name: &str, members: Vec<usize>, partitioning: bool) {
        self.families.push(Family {
            name: name.to_string(),
            members,
            partitioning,
        });
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Checks the data-to-model bijection and the partition law.
    pub fn validate(&self, cells: usize) -> Result<()> {
        for c in &self.components {
            if c.elements.len() != cells {
                return Err(Error::model(
                    &self.model_type,
                    format!("component {} has {} elements for {cells} cells", c.name, c.elements.len()),
                ));
            }
        }
        for (i, c) in self.components.iter().enumerate() {
            if self.components[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::model(&self.model_type, format!("component name {} repeats", c.name)));
            }
        }
        for f in self.families.iter().filter(|f| f.partitioning) {
            let mut counts = vec![0usize; cells];
            for &m in &f.members {
                for i in self.components[m].core_cells() {
                    counts[i] += 1;
                }
            }
            for (cell, &sum) in counts.iter().enumerate() {
                if sum != 1 {
                    return Err(Error::model(
                        &self.model_type,
                        format!("family {} covers cell {cell} {sum} times", f.name),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.model_type,
            "binding": self.binding,
            "characterization": self.characterization,
            "components": self.components.iter().map(|c| json!({
                "name": c.name,
                "core_predicate": c.core_json(),
                "elements": c.elements.to_json(),
            })).collect::<Vec<_>>(),
            "families": self.families.iter().map(|f| json!({
                "name": f.name,
                "components": f.members.iter().map(|&m| self.components[m].name.clone()).collect::<Vec<_>>(),
                "partitioning": f.partitioning,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Splits a boolean column into a partitioning pair of bitmap components.
pub(crate) fn antagonists(model: &mut Model, family: &str, yes: &str, no: &str, bits: Vec<bool>) {
    let neg = bits.iter().map(|b| !b).collect();
    let a = model.push(Component::bitmap(yes, bits));
    let b = model.push(Component::bitmap(no, neg));
    model.family(family, vec![a, b], true);
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Num(f64),
    Str(String),
}

impl Param {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Param::Num(v) => Some(*v),
            Param::Str(s) => s.parse().ok(),
        }
    }
}

/// Everything a model type may read when it is instantiated.
pub struct ModelRequest<'a> {
    pub cube: &'a Cube,
    pub measure: &'a str,
    pub attributes: &'a [String],
    pub params: &'a BTreeMap<String, Param>,
    /// Reference cube for comparative models.
    pub other: Option<&'a Cube>,
    /// One benchmark value per cell, with the benchmark's name.
    pub benchmark: Option<(&'a str, &'a [f64])>,
    pub rules: Option<&'a KpiRules>,
    pub seed: u64,
}

impl ModelRequest<'_> {
    pub fn param_f64(&self, name: &str, default: f64) -> Result<f64> {
        match self.params.get(name) {
            None => Ok(default),
            Some(p) => p
                .as_f64()
                .ok_or_else(|| Error::model(name, format!("parameter {name} must be numeric"))),
        }
    }

    pub fn param_usize(&self, name: &str, default: usize) -> Result<usize> {
        let v = self.param_f64(name, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::model(name, format!("parameter {name} must be a non-negative integer")));
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub inputs: Vec<&'static str>,
    pub outputs: Vec<&'static str>,
}

pub trait ModelType: Send + Sync {
    fn name(&self) -> &str;
    fn signature(&self) -> Signature;
    fn compute(&self, req: &ModelRequest) -> Result<Model>;
}

struct Builtin {
    name: &'static str,
    inputs: &'static [&'static str],
    outputs: &'static [&'static str],
    f: fn(&ModelRequest) -> Result<Model>,
}

impl ModelType for Builtin {
    fn name(&self) -> &str {
        self.name
    }
    fn signature(&self) -> Signature {
        Signature {
            inputs: self.inputs.to_vec(),
            outputs: self.outputs.to_vec(),
        }
    }
    fn compute(&self, req: &ModelRequest) -> Result<Model> {
        (self.f)(req)
    }
}

fn attribute<'a>(req: &'a ModelRequest, model: &str) -> Result<&'a str> {
    req.attributes
        .first()
        .map(String::as_str)
        .ok_or_else(|| Error::model(model, "an attribute is required"))
}

/// The palette of model types, addressed by case-insensitive name.
#[derive(Clone)]
pub struct Registry {
    types: BTreeMap<String, Arc<dyn ModelType>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { types: BTreeMap::new() }
    }

    pub fn register(&mut self, t: Arc<dyn ModelType>) -> Result<()> {
        let key = t.name().to_ascii_lowercase();
        if t.signature().outputs.is_empty() {
            return Err(Error::model(t.name(), "output signature declares no component"));
        }
        if self.types.contains_key(&key) {
            return Err(Error::Duplicate(t.name().to_string()));
        }
        self.types.insert(key, t);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn ModelType>> {
        self.types
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.types.values().map(|t| t.name().to_string()).collect()
    }

    pub fn compute(&self, name: &str, req: &ModelRequest) -> Result<Model> {
        let m = self.get(name)?.compute(req)?;
        m.validate(req.cube.len())?;
        Ok(m)
    }
}

impl Default for Registry {
    fn default() -> Self {
        let builtins = [
            Builtin {
                name: "topk",
                inputs: &["NumberOfValues", "NameOfMeasure"],
                outputs: &["Rank", "Top-k", "Non-top-k"],
                f: |r| topk_rank(r.cube, r.measure, r.param_usize("k", 5)?),
            },
            Builtin {
                name: "outliers",
                inputs: &["Threshold", "NameOfMeasure"],
                outputs: &["Outlierness", "Outliers", "Non-outliers"],
                f: |r| outliers(r.cube, r.measure, r.param_f64("threshold", 2.0)?),
            },
            Builtin {
                name: "kmeans",
                inputs: &["NumberOfClusters", "NameOfMeasure"],
                outputs: &["Cluster_1..k", "Representative"],
                f: |r| kmeans(r.cube, &[r.measure.to_string()], r.param_usize("k", 2)?, r.seed),
            },
            Builtin {
                name: "kpi",
                inputs: &["LabelingRules", "NameOfMeasure"],
                outputs: &["Assessment"],
                f: |r| {
                    let rules = r.rules.ok_or_else(|| Error::model("kpi", "no labeling rules bound"))?;
                    kpi(r.cube, r.measure, rules)
                },
            },
            Builtin {
                name: "benchmark",
                inputs: &["Benchmark", "NameOfMeasure"],
                outputs: &["BenchmarkValue", "Discrepancy", "MC-", "MC+"],
                f: |r| {
                    let (name, vals) = r.benchmark.ok_or_else(|| Error::model("benchmark", "no benchmark bound"))?;
                    benchmark_discrepancy(r.cube, r.measure, name, vals)
                },
            },
            Builtin {
                name: "ftest",
                inputs: &["ReferenceCube", "NameOfMeasure"],
                outputs: &["Fstat", "Discrepancy", "AboveStdev", "BelowStdev"],
                f: |r| {
                    let old = r.other.ok_or_else(|| Error::model("ftest", "no reference cube bound"))?;
                    variance_test(r.cube, old, r.measure)
                },
            },
            Builtin {
                name: "ts_decompose",
                inputs: &["Window", "TimeDimension", "NameOfMeasure"],
                outputs: &["Trend", "Seasonality", "Noise"],
                f: |r| {
                    let time = attribute(r, "ts_decompose")?;
                    ts_decompose(r.cube, r.measure, time, r.param_usize("window", 5)?)
                },
            },
            Builtin {
                name: "correlation",
                inputs: &["Threshold", "NameOfMeasure", "Attribute"],
                outputs: &["Participation"],
                f: |r| {
                    let attr = attribute(r, "correlation")?;
                    let threshold = r.params.get("threshold").and_then(Param::as_f64);
                    correlation(r.cube, r.measure, attr, threshold)
                },
            },
            Builtin {
                name: "regression",
                inputs: &["Threshold", "NameOfMeasure", "Attributes"],
                outputs: &["Expected", "Discrepancy", "Above", "Below"],
                f: |r| {
                    if r.attributes.is_empty() {
                        return Err(Error::model("regression", "at least one attribute is required"));
                    }
                    regression(r.cube, r.measure, r.attributes, r.param_f64("threshold", 1.0)?)
                },
            },
        ];
        let mut r = Registry::empty();
        for b in builtins {
            r.register(Arc::new(b)).expect("distinct builtin names");
        }
        r
    }
}

/// Reads a numeric attribute column: a measure of the cube, or a level
/// property written `dim.level.property`.
pub fn attribute_column(cube: &Cube, attr: &str) -> Result<Vec<f64>> {
    if let Ok(v) = cube.values(attr) {
        return Ok(v);
    }
    let parts: Vec<&str> = attr.splitn(3, '.').collect();
    if parts.len() == 3 {
        let input = crate::extend::Input::Property {
            dimension: parts[0].into(),
            level: parts[1].into(),
            property: parts[2].into(),
        };
        let b = crate::extend::FunctionBinding {
            function: "const".into(),
            inputs: [("value".to_string(), input)].into_iter().collect(),
            scope: crate::extend::Scope::Cell,
            outputs: vec!["__attr".into()],
        };
        let ext = crate::extend::extend_cube(cube, &b, &crate::extend::FunctionRegistry::default())?;
        return ext.values("__attr");
    }
    Err(Error::UnknownMeasure(attr.to_string()))
}
