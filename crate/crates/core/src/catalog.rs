//! The catalog: dimensions, registered cubes, named cube queries, benchmarks
//! and KPI rules, loaded from a directory of CSV and JSON files or registered
//! at run time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cube::{Axis, Cube};
use crate::dimension::{Dimension, PathTable};
use crate::error::{Error, Result};
use crate::extend::FunctionRegistry;
use crate::iql::{parse_cube_query, render_cube_query};
use crate::models::{benchmark_values, KpiRule, KpiRules, Registry};
use crate::query::{eval_cube_query, CubeQuery};

/// Where the expected values of an assessment come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Benchmark {
    /// A cube query whose result shares the assessed cube's coordinates.
    Query(CubeQuery),
    /// A registered cube or named query.
    Cube(String),
    Constant(f64),
}

#[derive(Clone, Default)]
pub struct Catalog {
    pub dimensions: BTreeMap<String, Arc<Dimension>>,
    pub cubes: BTreeMap<String, Arc<Cube>>,
    pub queries: BTreeMap<String, CubeQuery>,
    pub benchmarks: BTreeMap<String, Benchmark>,
    pub kpi_rules: BTreeMap<String, KpiRules>,
    pub models: Registry,
    pub functions: FunctionRegistry,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionSpec {
    name: String,
    /// Hierarchy table files, relative to the catalog directory.
    #[serde(default)]
    tables: Vec<String>,
    /// Inline hierarchy tables as CSV text.
    #[serde(default)]
    csv: Vec<String>,
    #[serde(default)]
    degenerate: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CubeSpec {
    name: String,
    /// `dimension` (bottom level) or `dimension.level`.
    #[serde(default)]
    axes: Vec<String>,
    #[serde(default)]
    measures: Vec<String>,
    facts: Option<String>,
    csv: Option<String>,
    /// A named cube query instead of stored facts.
    query: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkSpec {
    name: String,
    query: Option<String>,
    cube: Option<String>,
    constant: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleSpec {
    lo: Option<f64>,
    hi: Option<f64>,
    label: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KpiSpec {
    name: String,
    measure: Option<String>,
    rules: Vec<RuleSpec>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    #[serde(default)]
    dimensions: Vec<Value>,
    #[serde(default)]
    cubes: Vec<Value>,
    #[serde(default)]
    benchmarks: Vec<Value>,
    #[serde(default)]
    kpi_rules: Vec<Value>,
}

fn from_value<T: serde::de::DeserializeOwned>(kind: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Json(format!("{kind}: {e}")))
}

impl Catalog {
    pub fn new() -> Self {
        Catalog::default()
    }

    /// Loads `catalog.json` from `dir`; file names in it are relative to `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = std::fs::read_to_string(dir.join("catalog.json"))
            .map_err(|e| Error::Io(format!("{}: {e}", dir.join("catalog.json").display())))?;
        let doc: CatalogDoc = serde_json::from_str(&text)?;
        let mut c = Catalog::new();
        for d in &doc.dimensions {
            c.register_in("dimension", d, Some(dir))?;
        }
        for q in &doc.cubes {
            c.register_in("cube", q, Some(dir))?;
        }
        for b in &doc.benchmarks {
            c.register_in("benchmark-query", b, Some(dir))?;
        }
        for k in &doc.kpi_rules {
            c.register_in("kpi-rules", k, Some(dir))?;
        }
        Ok(c)
    }

    /// Registers a payload of the given kind: `dimension`, `cube`,
    /// `benchmark-query` or `kpi-rules`.
    pub fn register(&mut self, kind: &str, payload: &Value) -> Result<()> {
        self.register_in(kind, payload, None)
    }

    fn register_in(&mut self, kind: &str, payload: &Value, dir: Option<&Path>) -> Result<()> {
        let path = |f: &str| -> Result<PathBuf> {
            match dir {
                Some(d) => Ok(d.join(f)),
                None => Err(Error::Schema(format!("file `{f}` can only be named in a catalog directory"))),
            }
        };
        match kind {
            "dimension" => {
                let s: DimensionSpec = from_value(kind, payload)?;
                let mut tables = Vec::new();
                for f in &s.tables {
                    let p = path(f)?;
                    let file = std::fs::File::open(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                    tables.push(PathTable::from_csv(file)?);
                }
                for text in &s.csv {
                    tables.push(PathTable::from_csv(text.as_bytes())?);
                }
                let mut d = Dimension::from_paths(&s.name, &tables)?;
                d.degenerate = s.degenerate;
                self.add_dimension(d)
            }
            "cube" => {
                let s: CubeSpec = from_value(kind, payload)?;
                if let Some(text) = &s.query {
                    return self.add_query(&s.name, parse_cube_query(text)?);
                }
                let axes = s.axes.iter().map(|a| self.axis(a)).collect::<Result<Vec<_>>>()?;
                let cube = match (&s.facts, &s.csv) {
                    (Some(f), None) => {
                        let p = path(f)?;
                        let file = std::fs::File::open(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                        Cube::from_csv(&s.name, file, axes, &s.measures)?
                    }
                    (None, Some(text)) => Cube::from_csv(&s.name, text.as_bytes(), axes, &s.measures)?,
                    _ => return Err(Error::Schema(format!("cube {}: give exactly one of facts, csv, query", s.name))),
                };
                self.add_cube(cube)
            }
            "benchmark-query" | "benchmark" => {
                let s: BenchmarkSpec = from_value(kind, payload)?;
                let b = match (s.query, s.cube, s.constant) {
                    (Some(q), None, None) => Benchmark::Query(parse_cube_query(&q)?),
                    (None, Some(c), None) => Benchmark::Cube(c),
                    (None, None, Some(v)) => Benchmark::Constant(v),
                    _ => {
                        return Err(Error::Schema(format!(
                            "benchmark {}: give exactly one of query, cube, constant",
                            s.name
                        )))
                    }
                };
                self.add_benchmark(&s.name, b)
            }
            "kpi-rules" | "kpi" => {
                let s: KpiSpec = from_value(kind, payload)?;
                let rules = s
                    .rules
                    .into_iter()
                    .map(|r| KpiRule {
                        lo: r.lo.unwrap_or(f64::NEG_INFINITY),
                        hi: r.hi.unwrap_or(f64::INFINITY),
                        label: r.label,
                    })
                    .collect();
                self.add_kpi_rules(KpiRules::new(&s.name, s.measure, rules)?)
            }
            other => Err(Error::Schema(format!("unknown catalog kind `{other}`"))),
        }
    }

    fn axis(&self, spec: &str) -> Result<Axis> {
        let (d, l) = match spec.split_once('.') {
            Some((d, l)) => (d, Some(l)),
            None => (spec, None),
        };
        let dim = self.dimension(d)?;
        let level = match l {
            Some(l) => dim.level_index(l)?,
            None => dim.bottom(),
        };
        Ok(Axis::new(dim, level))
    }

    pub fn dimension(&self, name: &str) -> Result<Arc<Dimension>> {
        self.dimensions
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))
    }

    fn name_taken(&self, name: &str) -> bool {
        self.cubes.contains_key(name)
            || self.queries.contains_key(name)
            || self.benchmarks.contains_key(name)
            || self.kpi_rules.contains_key(name)
    }

    fn fresh(&self, name: &str) -> Result<()> {
        if self.name_taken(name) {
            Err(Error::Duplicate(name.to_string()))
        } else {
            Ok(())
        }
    }

    pub fn add_dimension(&mut self, d: Dimension) -> Result<()> {
        if self.dimensions.contains_key(&d.name) {
            return Err(Error::Duplicate(d.name.clone()));
        }
        self.dimensions.insert(d.name.clone(), Arc::new(d));
        Ok(())
    }

    pub fn add_cube(&mut self, c: Cube) -> Result<()> {
        self.fresh(&c.name)?;
        self.cubes.insert(c.name.clone(), Arc::new(c));
        Ok(())
    }

    /// Registers a named query after checking that it evaluates.
    pub fn add_query(&mut self, name: &str, q: CubeQuery) -> Result<()> {
        self.fresh(name)?;
        self.eval_query(&q, name)?;
        self.queries.insert(name.to_string(), q);
        Ok(())
    }

    pub fn add_benchmark(&mut self, name: &str, b: Benchmark) -> Result<()> {
        self.fresh(name)?;
        match &b {
            Benchmark::Query(q) => {
                self.eval_query(q, name)?;
            }
            Benchmark::Cube(c) => {
                self.resolve_cube(c)?;
            }
            Benchmark::Constant(_) => {}
        }
        self.benchmarks.insert(name.to_string(), b);
        Ok(())
    }

    pub fn add_kpi_rules(&mut self, rules: KpiRules) -> Result<()> {
        self.fresh(&rules.name)?;
        self.kpi_rules.insert(rules.name.clone(), rules);
        Ok(())
    }

    /// The cube a query's base names. Only stored cubes can be queried.
    pub fn base(&self, name: &str) -> Result<Arc<Cube>> {
        self.cubes.get(name).cloned().ok_or_else(|| Error::UnknownCube(name.to_string()))
    }

    pub fn eval_query(&self, q: &CubeQuery, name: &str) -> Result<Cube> {
        eval_cube_query(&*self.base(&q.base)?, q, name)
    }

    /// A stored cube, or the result of a named query.
    pub fn resolve_cube(&self, name: &str) -> Result<Cube> {
        if let Some(c) = self.cubes.get(name) {
            return Ok((**c).clone());
        }
        if let Some(q) = self.queries.get(name) {
            return self.eval_query(q, name);
        }
        Err(Error::UnknownCube(name.to_string()))
    }

    /// Benchmark values for every cell of `cube`.
    pub fn benchmark_for(&self, name: &str, cube: &Cube, measure: &str) -> Result<Vec<f64>> {
        let b = self
            .benchmarks
            .get(name)
            .ok_or_else(|| Error::Plan(format!("unknown benchmark `{name}`")))?;
        match b {
            Benchmark::Constant(v) => Ok(vec![*v; cube.len()]),
            Benchmark::Query(q) => benchmark_values(cube, measure, &self.eval_query(q, name)?, name),
            Benchmark::Cube(c) => benchmark_values(cube, measure, &self.resolve_cube(c)?, name),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dimensions": self.dimensions.values().map(|d| json!({
                "name": d.name,
                "degenerate": d.degenerate,
                "levels": d.levels().iter().map(|l| json!({"name": l.name, "members": l.members().len()})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "cubes": self.cubes.values().map(|c| json!({
                "name": c.name,
                "schema": c.schema_json(),
                "cells": c.len(),
            })).collect::<Vec<_>>(),
            "queries": self.queries.iter().map(|(n, q)| json!({"name": n, "text": render_cube_query(q)})).collect::<Vec<_>>(),
            "benchmarks": self.benchmarks.iter().map(|(n, b)| json!({
                "name": n,
                "source": match b {
                    Benchmark::Query(q) => json!({"query": render_cube_query(q)}),
                    Benchmark::Cube(c) => json!({"cube": c}),
                    Benchmark::Constant(v) => json!({"constant": v}),
                },
            })).collect::<Vec<_>>(),
            "kpi_rules": self.kpi_rules.values().map(|k| json!({
                "name": k.name,
                "measure": k.measure,
                "rules": k.rules().iter().map(|r| json!({
                    "lo": crate::cube::num(r.lo),
                    "hi": crate::cube::num(r.hi),
                    "label": r.label,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "model_types": self.models.names(),
        })
    }
}

/// A catalog shared between sessions: concurrent reads, exclusive
/// registration.
#[derive(Clone, Default)]
pub struct SharedCatalog(Arc<RwLock<Catalog>>);

impl SharedCatalog {
    pub fn new(c: Catalog) -> Self {
        SharedCatalog(Arc::new(RwLock::new(c)))
    }

    pub fn read(&self) -> parking_lot::RwLockReadGuard<'_, Catalog> {
        self.0.read()
    }

    /// Registers on a copy and swaps it in only on success.
    pub fn register(&self, kind: &str, payload: &Value) -> Result<()> {
        let mut guard = self.0.write();
        let mut next = guard.clone();
        next.register(kind, payload)?;
        *guard = next;
        Ok(())
    }
}
